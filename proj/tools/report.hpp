#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace hifi::cli {

using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

/// One command's output: a metadata record, a table and summary values.
struct Report {
    std::string command;
    std::uint64_t seed = 0;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, Cell>> summary;

    void add_row(std::vector<Cell> row);
    void add_summary(std::string key, Cell value);
};

enum class Format { csv, json };

nlohmann::ordered_json metadata_json(const Report& r);
std::string render_csv(const Report& r);
std::string render_json(const Report& r);
std::string render(const Report& r, Format format);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);
std::string cell_text(const Cell& cell);

/// Writes to a temporary file in the same directory, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace hifi::cli
