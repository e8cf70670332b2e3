#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "hifi/ancilla.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using hifi::cli::run;

namespace {

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "hifi_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string> data_lines(const std::string& csv) {
    std::vector<std::string> lines;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    return parts;
}

}  // namespace

TEST(Cli, TeleportLinearN2Fidelities) {
    const Invocation r = invoke({"teleport", "--n", "2", "--profile", "linear", "--input", "0.6,0.8"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = data_lines(r.out);
    ASSERT_GE(lines.size(), 2u);
    const auto header = split(lines[0], ',');
    const auto col = std::find(header.begin(), header.end(), "fidelity") - header.begin();
    const auto kcol = std::find(header.begin(), header.end(), "k") - header.begin();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i], ',');
        const double f = std::stod(cells[static_cast<std::size_t>(col)]);
        const int k = std::stoi(cells[static_cast<std::size_t>(kcol)]);
        EXPECT_NEAR(f, k == 1 ? 0.36 : 0.64, 1e-12);
    }
}

TEST(Cli, MetadataRecordFirst) {
    const Invocation r = invoke({"scan", "--n", "4", "--seed", "17"});
    ASSERT_EQ(r.code, 0);
    ASSERT_EQ(r.out.rfind("# ", 0), 0u);
    const auto meta = nlohmann::json::parse(r.out.substr(2, r.out.find('\n') - 2));
    EXPECT_EQ(meta["tool"], "hifi");
    EXPECT_EQ(meta["seed"], 17);
    EXPECT_EQ(meta["command"], "scan");
    EXPECT_TRUE(meta.contains("version"));
    EXPECT_EQ(meta["config"]["n"][0], 4);
}

TEST(Cli, CsvAndJsonCarryTheSameNumbers) {
    const Invocation csv = invoke({"scan", "--n-range", "2:12:5", "--profile", "linear,sine"});
    const Invocation js = invoke({"scan", "--n-range", "2:12:5", "--profile", "linear,sine", "--format", "json"});
    ASSERT_EQ(csv.code, 0);
    ASSERT_EQ(js.code, 0);
    const auto j = nlohmann::json::parse(js.out);
    const auto lines = data_lines(csv.out);
    const auto header = split(lines[0], ',');
    ASSERT_EQ(j["rows"].size(), lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i], ',');
        const auto& row = j["rows"][i - 1];
        for (std::size_t c = 0; c < header.size(); ++c) {
            const auto& v = row[header[c]];
            if (v.is_number()) {
                EXPECT_EQ(std::stod(cells[c]), v.get<double>()) << header[c];
            } else if (v.is_null()) {
                EXPECT_TRUE(c < cells.size() ? cells[c].empty() : true);
            }
        }
    }
}

TEST(Cli, DeterministicOutput) {
    const std::vector<std::string> args{"teleport", "--n", "3", "--samples", "500", "--seed", "9"};
    const Invocation a = invoke(args);
    const Invocation b = invoke(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    auto other = args;
    other.back() = "10";
    EXPECT_NE(invoke(other).out, a.out);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"teleport"}).code, 2);                                   // no n
    EXPECT_EQ(invoke({"teleport", "--n", "1", "--profile", "linear"}).code, 2);  // linear needs n >= 2
    EXPECT_EQ(invoke({"teleport", "--n", "2", "--profile", "bogus"}).code, 2);
    EXPECT_EQ(invoke({"teleport", "--n", "2", "--input", "-1,1"}).code, 2);
    EXPECT_EQ(invoke({"teleport", "--n", "2", "--input", "0,0"}).code, 2);
    EXPECT_EQ(invoke({"teleport", "--n", "6", "--basis-cap", "50"}).code, 2);
    EXPECT_EQ(invoke({"cnot-demo", "--n", "4"}).code, 2);
    EXPECT_EQ(invoke({"oracle-check", "--n", "5"}).code, 2);
    EXPECT_EQ(invoke({"scan", "--n-range", "5:2"}).code, 2);
    EXPECT_EQ(invoke({"teleport", "--n", "2", "--profile", "file:/nonexistent.json"}).code, 2);
    EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, InputNormalizationWarns) {
    const Invocation r = invoke({"teleport", "--n", "2", "--input", "3,4"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    EXPECT_EQ(invoke({"teleport", "--n", "2", "--input", "0.6,0.8"}).err, "");
}

TEST(Cli, ComplexInputJson) {
    const fs::path in = scratch("input.json");
    std::ofstream(in) << R"({"input": {"a0": [0.6, 0], "a1": [0, 0.8]}})";
    const Invocation r = invoke({"teleport", "--n", "2", "--input-json", in.string(), "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["metadata"]["config"]["input"]["a1"][1].get<double>(), 0.8);
    for (const auto& row : j["rows"]) EXPECT_GT(row["fidelity"].get<double>(), 0.0);
}

TEST(Cli, OracleCheckPassesAndCatchesInjectedSignFault) {
    const Invocation ok = invoke({"oracle-check", "--n", "2", "--inputs", "4"});
    EXPECT_EQ(ok.code, 0) << ok.err;
    const Invocation bad = invoke({"oracle-check", "--n", "2", "--inputs", "4", "--inject-fault", "cz-sign"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("cz-parity-sign-bookkeeping"), std::string::npos);
    EXPECT_EQ(bad.err.find("FAIL teleport"), std::string::npos);
}

TEST(Cli, OptimizedProfileRoundTrip) {
    const fs::path prof = scratch("opt_profile.json");
    fs::remove(prof);
    const Invocation r = invoke({"optimize", "--n", "4", "--profile-out", prof.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    ASSERT_TRUE(fs::exists(prof));
    const auto loaded = hifi::load_profile_json(prof);
    EXPECT_FALSE(loaded.renormalized);
    EXPECT_EQ(loaded.profile.n(), 4u);
    const Invocation t = invoke({"teleport", "--profile", "file:" + prof.string()});
    EXPECT_EQ(t.code, 0) << t.err;
    EXPECT_EQ(invoke({"teleport", "--n", "5", "--profile", "file:" + prof.string()}).code, 2);
}

TEST(Cli, OptimizeExactCzPrintsBothReadings) {
    const fs::path prof = scratch("cz_profile.json");
    const Invocation r = invoke({"optimize", "--n", "6", "--objective", "exact-cz", "--profile-out", prof.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("additive_reading"), std::string::npos);
    EXPECT_NE(r.err.find("multiplicative_reading"), std::string::npos);
}

TEST(Cli, CnotDemoSummary) {
    const Invocation r = invoke({"cnot-demo", "--n", "2", "--pairing", "matched", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_LT(j["summary"]["cnot_min_purity"].get<double>(), 0.999);
    EXPECT_NEAR(j["summary"]["cz_contrast_min_purity"].get<double>(), 1.0, 1e-9);
    EXPECT_TRUE(j["summary"]["basis_values_correct"].get<bool>());
}

TEST(Cli, AtomicWriteLeavesNoTempFiles) {
    const fs::path dir = scratch("atomic");
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path out = dir / "scan.csv";
    const Invocation r = invoke({"scan", "--n", "8", "--out", out.string()});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), 1);
    EXPECT_EQ(slurp(out), invoke({"scan", "--n", "8"}).out);
}

TEST(CliBinary, RunsAsProcessWithExitCodes) {
    const std::string bin = HIFI_CLI_PATH;
    const fs::path out = scratch("bin_out.csv");
    const std::string cmd = bin + " teleport --n 2 --profile linear --input 0.6,0.8 --out " + out.string() +
                            " > /dev/null 2>&1";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(out));
    const int bad = std::system((bin + " oracle-check --n 2 --inputs 2 --inject-fault cz-sign > /dev/null 2>&1").c_str());
    EXPECT_EQ(WEXITSTATUS(bad), 1);
    const int cfg = std::system((bin + " teleport --n 9 --basis-cap 10 > /dev/null 2>&1").c_str());
    EXPECT_EQ(WEXITSTATUS(cfg), 2);
}
