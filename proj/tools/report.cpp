#include "report.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <unistd.h>

namespace hifi::cli {

void Report::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw std::logic_error(fmt::format("row has {} cells, table has {} columns", row.size(),
                                           columns.size()));
    }
    rows.push_back(std::move(row));
}

void Report::add_summary(std::string key, Cell value) {
    summary.emplace_back(std::move(key), std::move(value));
}

std::string format_number(double value) {
    if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    return fmt::format("{}", value);
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

nlohmann::ordered_json cell_json(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> nlohmann::ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return nullptr;
                return v;
            } else {
                return v;
            }
        },
        cell);
}

}  // namespace

std::string cell_text(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "";
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return fmt::format("{}", v);
            } else if constexpr (std::is_same_v<T, double>) {
                return format_number(v);
            } else {
                return v;
            }
        },
        cell);
}

nlohmann::ordered_json metadata_json(const Report& r) {
    nlohmann::ordered_json m;
    m["tool"] = "hifi";
    m["version"] = HIFI_VERSION;
    m["command"] = r.command;
    m["seed"] = r.seed;
    m["config"] = r.config;
    return m;
}

std::string render_csv(const Report& r) {
    std::string out = "# " + metadata_json(r).dump() + "\n";
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
        out += (i ? "," : "") + csv_escape(r.columns[i]);
    }
    out += "\n";
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += (i ? "," : "") + csv_escape(cell_text(row[i]));
        }
        out += "\n";
    }
    for (const auto& [key, value] : r.summary) {
        out += "# summary," + csv_escape(key) + "," + csv_escape(cell_text(value)) + "\n";
    }
    return out;
}

std::string render_json(const Report& r) {
    nlohmann::ordered_json j;
    j["metadata"] = metadata_json(r);
    j["columns"] = r.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[r.columns[i]] = cell_json(row[i]);
        j["rows"].push_back(std::move(obj));
    }
    j["summary"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : r.summary) j["summary"][key] = cell_json(value);
    return j.dump(2) + "\n";
}

std::string render(const Report& r, Format format) {
    return format == Format::json ? render_json(r) : render_csv(r);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += fmt::format(".tmp-{}", static_cast<long>(::getpid()));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace hifi::cli
