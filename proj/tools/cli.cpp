#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hifi/fidelity.hpp"
#include "hifi/optimize.hpp"
#include "hifi/protocol.hpp"
#include "report.hpp"

namespace hifi::cli {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::size_t n = 0;  // 0 = not given
    std::string n_range;
    std::string profile;
    std::string profile2;
    std::string input;
    std::string input2;
    std::string input_json;
    std::string ensemble = "uniform-p0";
    std::uint64_t seed = 0;
    std::string format = "csv";
    std::string out;
    std::size_t basis_cap = FockLimits{}.basis_cap;
    std::string endpoints = "pinned";
    std::string objective = "second-order";
    std::string pairing = "all-pairs";
    std::string inject_fault;
    std::string profile_out;
    std::size_t samples = 0;
    std::size_t inputs = 20;
    bool independent = false;
    int max_iterations = 20000;
};

struct CommandResult {
    Report report;
    int code = exit_ok;
    std::vector<std::string> notes;  // printed to stdout when the report goes to a file
};

// ---------------------------------------------------------------- parsing

double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", what, text));
    }
    if (used != text.size() || !std::isfinite(v)) {
        throw ConfigError(fmt::format("{}: '{}' is not a finite number", what, text));
    }
    return v;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", what, text));
    }
    return static_cast<std::size_t>(std::stoull(text));
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

QubitAmplitudes normalized_input(Complex a0, Complex a1, const std::string& what, std::ostream& err) {
    const double norm2 = std::norm(a0) + std::norm(a1);
    if (!(norm2 > 0.0)) throw ConfigError(what + ": amplitudes are both zero");
    const QubitAmplitudes q = QubitAmplitudes::normalize(a0, a1);
    if (std::abs(norm2 - 1.0) > 1e-12) {
        err << fmt::format("warning: {} normalized from norm {} to ({}, {})\n", what,
                           format_number(std::sqrt(norm2)), format_number(q.a0().real()),
                           format_number(q.a1().real()));
    }
    return q;
}

QubitAmplitudes parse_real_input(const std::string& text, const std::string& what, std::ostream& err) {
    const auto parts = split(text, ',');
    if (parts.size() != 2) throw ConfigError(what + ": expected two values 'a0,a1'");
    const double a0 = parse_double(parts[0], what);
    const double a1 = parse_double(parts[1], what);
    if (a0 < 0.0 || a1 < 0.0) {
        throw ConfigError(what + ": real amplitudes must be non-negative; use --input-json for phases");
    }
    return normalized_input(a0, a1, what, err);
}

Complex json_amplitude(const nlohmann::json& v, const std::string& what) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ConfigError(what + ": amplitude must be a number or [re, im]");
}

QubitAmplitudes json_qubit(const nlohmann::json& v, const std::string& what, std::ostream& err) {
    if (!v.is_object() || !v.contains("a0") || !v.contains("a1")) {
        throw ConfigError(what + ": expected an object with 'a0' and 'a1'");
    }
    return normalized_input(json_amplitude(v["a0"], what), json_amplitude(v["a1"], what), what, err);
}

struct Inputs {
    QubitAmplitudes q;
    QubitAmplitudes q2;
};

Inputs resolve_inputs(const Options& o, std::ostream& err) {
    const double h = std::numbers::sqrt2 / 2.0;
    Inputs in{QubitAmplitudes(h, h), QubitAmplitudes(h, h)};
    if (!o.input_json.empty()) {
        if (!o.input.empty() || !o.input2.empty()) {
            throw ConfigError("--input-json cannot be combined with --input/--input2");
        }
        std::ifstream f(o.input_json);
        if (!f) throw ConfigError("cannot open input file " + o.input_json);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("invalid JSON in " + o.input_json + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("input")) throw ConfigError(o.input_json + ": missing 'input'");
        in.q = json_qubit(j["input"], "input", err);
        if (j.contains("input2")) in.q2 = json_qubit(j["input2"], "input2", err);
        return in;
    }
    if (!o.input.empty()) in.q = parse_real_input(o.input, "--input", err);
    if (!o.input2.empty()) in.q2 = parse_real_input(o.input2, "--input2", err);
    return in;
}

std::vector<std::size_t> resolve_n_list(const Options& o) {
    if (!o.n_range.empty()) {
        if (o.n != 0) throw ConfigError("--n and --n-range are mutually exclusive");
        const auto parts = split(o.n_range, ':');
        if (parts.size() < 2 || parts.size() > 3) throw ConfigError("--n-range: expected A:B or A:B:step");
        const std::size_t a = parse_count(parts[0], "--n-range");
        const std::size_t b = parse_count(parts[1], "--n-range");
        const std::size_t step = parts.size() == 3 ? parse_count(parts[2], "--n-range") : 1;
        if (a < 1 || b < a || step < 1) throw ConfigError("--n-range: need 1 <= A <= B and step >= 1");
        std::vector<std::size_t> ns;
        for (std::size_t n = a; n <= b; n += step) ns.push_back(n);
        return ns;
    }
    if (o.n == 0) throw ConfigError("--n or --n-range is required");
    return {o.n};
}

CoefficientProfile resolve_profile(const std::string& spec, std::size_t n, std::ostream& err) {
    if (spec.starts_with("file:")) {
        const std::string path = spec.substr(5);
        LoadedProfile loaded = [&] {
            try {
                return load_profile_json(path);
            } catch (const std::exception& e) {
                throw ConfigError(fmt::format("cannot load profile '{}': {}", path, e.what()));
            }
        }();
        if (loaded.renormalized) {
            err << fmt::format("warning: profile {} had norm {}; renormalized\n", path,
                               format_number(loaded.input_norm));
        }
        if (n != 0 && loaded.profile.n() != n) {
            throw ConfigError(fmt::format("profile {} has n={}, requested n={}", path, loaded.profile.n(), n));
        }
        return loaded.profile;
    }
    if (n == 0) throw ConfigError("--n is required for profile '" + spec + "'");
    return profile_by_name(spec, n);
}

// The n for single-n commands: --n, or the n of a profile file.
std::size_t single_n(const Options& o) {
    if (!o.n_range.empty()) throw ConfigError("this command takes --n, not --n-range");
    return o.n;
}

InputEnsemble resolve_ensemble(const Options& o, std::ostream& err) {
    if (o.ensemble == "uniform-p0") return InputEnsemble::uniform_p0();
    if (o.ensemble == "basis-pair") return InputEnsemble::basis_pair();
    if (o.ensemble == "fixed") return InputEnsemble::fixed(resolve_inputs(o, err).q);
    throw ConfigError("--ensemble must be uniform-p0, basis-pair or fixed");
}

Endpoints resolve_endpoints(const Options& o) {
    if (o.endpoints == "pinned") return Endpoints::pinned;
    if (o.endpoints == "free") return Endpoints::free;
    throw ConfigError("--endpoints must be pinned or free");
}

CnotPairing resolve_pairing(const Options& o) {
    if (o.pairing == "matched") return CnotPairing::matched;
    if (o.pairing == "all-pairs") return CnotPairing::all_pairs;
    throw ConfigError("--pairing must be matched or all-pairs");
}

ProtocolOptions protocol_options(const Options& o) {
    ProtocolOptions p;
    p.limits.basis_cap = o.basis_cap;
    return p;
}

// ---------------------------------------------------------------- helpers

nlohmann::ordered_json amplitude_json(Complex a) { return {a.real(), a.imag()}; }

nlohmann::ordered_json qubit_json(const QubitAmplitudes& q) {
    return {{"a0", amplitude_json(q.a0())}, {"a1", amplitude_json(q.a1())}};
}

nlohmann::ordered_json profile_values_json(const CoefficientProfile& p) {
    return std::vector<double>(p.values().begin(), p.values().end());
}

std::string profile_name(const std::string& spec, const CoefficientProfile& p) {
    return spec.starts_with("file:") ? spec : std::string(to_string(p.label()));
}

Cell i64(std::size_t v) { return static_cast<std::int64_t>(v); }

double qubit_distance_up_to_phase(const QubitAmplitudes& a, const QubitAmplitudes& b) {
    const Complex overlap = std::conj(b.a0()) * a.a0() + std::conj(b.a1()) * a.a1();
    const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex{1, 0};
    return std::max(std::abs(a.a0() - phase * b.a0()), std::abs(a.a1() - phase * b.a1()));
}

double pair_distance_up_to_phase(const TwoQubitAmplitudes& a, const TwoQubitAmplitudes& b) {
    Complex overlap{};
    for (std::size_t i = 0; i < 4; ++i) overlap += std::conj(b[i]) * a[i];
    const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex{1, 0};
    double d = 0.0;
    for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(a[i] - phase * b[i]));
    return d;
}

TwoQubitAmplitudes ideal_cz(const QubitAmplitudes& q, const QubitAmplitudes& q2) {
    return {q.a0() * q2.a0(), q.a0() * q2.a1(), q.a1() * q2.a0(), -q.a1() * q2.a1()};
}

double pair_fidelity(const TwoQubitAmplitudes& a, const TwoQubitAmplitudes& b) {
    Complex overlap{};
    for (std::size_t i = 0; i < 4; ++i) overlap += std::conj(a[i]) * b[i];
    return std::norm(overlap);
}

// Probability-weighted CZ infidelity for fixed inputs from the closed-form branch outputs.
double cz_fixed_input_error(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                            const CoefficientProfile& p, const CoefficientProfile& p2) {
    const auto d = outcome_distribution(q, p);
    const auto d2 = outcome_distribution(q2, p2);
    const TwoQubitAmplitudes ideal = ideal_cz(q, q2);
    double e = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        for (std::size_t k2 = 0; k2 < d2.size(); ++k2) {
            const double w = d[k] * d2[k2];
            if (w == 0.0) continue;
            const auto out = cz_output_formula(q, q2, p, p2, static_cast<long>(k), static_cast<long>(k2));
            e += w * (1.0 - pair_fidelity(ideal, out));
        }
    }
    return e;
}

double uniform53(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

QubitAmplitudes random_qubit(std::mt19937_64& rng) {
    const double p0 = uniform53(rng);
    const double phi0 = kTwoPi * uniform53(rng);
    const double phi1 = kTwoPi * uniform53(rng);
    return QubitAmplitudes::normalize(std::polar(std::sqrt(p0), phi0), std::polar(std::sqrt(1.0 - p0), phi1));
}

std::vector<OccupationVector> basis_up_to(std::size_t m, std::size_t max_photons) {
    std::vector<OccupationVector> out;
    std::vector<std::uint8_t> counts(m, 0);
    auto rec = [&](auto&& self, std::size_t mode, std::size_t left) -> void {
        if (mode == m) {
            out.emplace_back(counts);
            return;
        }
        for (std::size_t c = 0; c <= left; ++c) {
            counts[mode] = static_cast<std::uint8_t>(c);
            self(self, mode + 1, left - c);
        }
        counts[mode] = 0;
    };
    rec(rec, 0, max_photons);
    return out;
}

std::vector<CoefficientProfile> check_profiles(std::size_t n) {
    std::vector<CoefficientProfile> ps{profile_uniform(n), profile_sine(n)};
    if (n >= 2) ps.push_back(profile_linear(n));
    return ps;
}

// ---------------------------------------------------------------- commands

nlohmann::ordered_json base_config(const Options& o) {
    nlohmann::ordered_json c;
    c["format"] = o.format;
    c["basis_cap"] = o.basis_cap;
    return c;
}

CommandResult cmd_teleport(const Options& o, std::ostream& err) {
    const std::string spec = o.profile.empty() ? "sine" : o.profile;
    const CoefficientProfile p = resolve_profile(spec, single_n(o), err);
    const Inputs in = resolve_inputs(o, err);
    const auto outs = teleport_enumerate(in.q, p, protocol_options(o));

    CommandResult res;
    Report& r = res.report;
    r.command = "teleport";
    r.seed = o.seed;
    r.config = base_config(o);
    r.config["n"] = p.n();
    r.config["profile"] = profile_name(spec, p);
    r.config["profile_values"] = profile_values_json(p);
    r.config["input"] = qubit_json(in.q);
    r.config["samples"] = o.samples;

    r.columns = {"pattern", "k", "probability", "out_a0_re", "out_a0_im", "out_a1_re", "out_a1_im",
                 "fidelity", "degenerate", "correction_re", "correction_im"};
    if (o.samples > 0) r.columns.push_back("sampled_count");

    std::vector<std::int64_t> counts(outs.size(), 0);
    if (o.samples > 0) {
        std::vector<double> probs;
        for (const auto& t : outs) probs.push_back(t.probability);
        std::mt19937_64 seeds(o.seed);
        for (std::size_t i = 0; i < o.samples; ++i) ++counts[sample_index(probs, seeds())];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const auto& t = outs[i];
        total += t.probability;
        std::vector<Cell> row{t.pattern.to_string(' '), i64(t.k), t.probability,
                              t.output.a0().real(), t.output.a0().imag(),
                              t.output.a1().real(), t.output.a1().imag(),
                              fidelity(in.q, t.output), t.degenerate,
                              t.correction_phase.real(), t.correction_phase.imag()};
        if (o.samples > 0) row.emplace_back(counts[i]);
        r.add_row(std::move(row));
    }
    const PostSelectionSummary klm = klm_postselect(outs, in.q);
    r.add_summary("total_probability", total);
    r.add_summary("average_infidelity", average_infidelity(outs, in.q));
    r.add_summary("closed_form_infidelity", average_error_exact(p, InputEnsemble::fixed(in.q)));
    r.add_summary("klm_success_probability", klm.success_probability);
    r.add_summary("klm_conditional_fidelity", klm.conditional_fidelity);
    r.add_summary("klm_failure_probability", klm.failure_probability);
    return res;
}

CommandResult cmd_cz(const Options& o, std::ostream& err) {
    const std::string spec = o.profile.empty() ? "sine" : o.profile;
    const std::size_t n = single_n(o);
    const CoefficientProfile p = resolve_profile(spec, n, err);
    const std::string spec2 = o.profile2.empty() ? spec : o.profile2;
    const CoefficientProfile p2 = resolve_profile(spec2, n == 0 ? p.n() : n, err);
    const Inputs in = resolve_inputs(o, err);
    CzOptions copts;
    copts.protocol = protocol_options(o);
    const auto outs = cz_gate(in.q, in.q2, p, p2, copts);

    CommandResult res;
    Report& r = res.report;
    r.command = "cz";
    r.seed = o.seed;
    r.config = base_config(o);
    r.config["n"] = p.n();
    r.config["profile"] = profile_name(spec, p);
    r.config["profile2"] = profile_name(spec2, p2);
    r.config["input"] = qubit_json(in.q);
    r.config["input2"] = qubit_json(in.q2);

    r.columns = {"pattern", "pattern2", "k", "k2", "probability", "flip_q", "flip_q2",
                 "out00_re", "out00_im", "out01_re", "out01_im", "out10_re", "out10_im",
                 "out11_re", "out11_im", "fidelity", "degenerate"};
    const TwoQubitAmplitudes ideal = ideal_cz(in.q, in.q2);
    double total = 0.0;
    double infidelity = 0.0;
    for (const auto& g : outs) {
        const double f = pair_fidelity(ideal, g.output);
        total += g.probability;
        infidelity += g.probability * (1.0 - f);
        std::vector<Cell> row{g.pattern.to_string(' '), g.pattern2.to_string(' '), i64(g.k), i64(g.k2),
                              g.probability, g.applied_corrections.sign_flip_q,
                              g.applied_corrections.sign_flip_q2};
        for (const Complex& a : g.output) {
            row.emplace_back(a.real());
            row.emplace_back(a.imag());
        }
        row.emplace_back(f);
        row.emplace_back(g.degenerate);
        r.add_row(std::move(row));
    }
    r.add_summary("branches", i64(outs.size()));
    r.add_summary("total_probability", total);
    r.add_summary("average_infidelity", infidelity);
    r.add_summary("closed_form_infidelity", cz_fixed_input_error(in.q, in.q2, p, p2));
    return res;
}

CommandResult cmd_cnot_demo(const Options& o, std::ostream& err) {
    const std::size_t n = single_n(o);
    if (n != 2 && n != 3) throw ConfigError("cnot-demo supports --n 2 or 3");
    const std::string spec = o.profile.empty() ? "sine" : o.profile;
    const CoefficientProfile p = resolve_profile(spec, n, err);
    const Inputs in = resolve_inputs(o, err);
    const CnotPairing pairing = resolve_pairing(o);
    const ProtocolOptions popts = protocol_options(o);

    CommandResult res;
    Report& r = res.report;
    r.command = "cnot-demo";
    r.seed = o.seed;
    r.config = base_config(o);
    r.config["n"] = n;
    r.config["profile"] = profile_name(spec, p);
    r.config["pairing"] = std::string(to_string(pairing));
    r.config["input"] = qubit_json(in.q);
    r.config["input2"] = qubit_json(in.q2);

    r.columns = {"run", "pattern", "pattern2", "k", "k2", "probability", "degenerate",
                 "purity", "pop00", "pop01", "pop10", "pop11"};
    auto add_rows = [&](const std::string& run, const std::vector<CnotBranch>& branches) {
        double min_all = 1.0;
        double min_nondegenerate = 1.0;
        double max_dev = 0.0;
        for (const auto& b : branches) {
            const auto& g = b.outcome;
            min_all = std::min(min_all, b.purity);
            if (!g.degenerate) min_nondegenerate = std::min(min_nondegenerate, b.purity);
            max_dev = std::max(max_dev, std::abs(1.0 - b.purity));
            r.add_row({run, g.pattern.to_string(' '), g.pattern2.to_string(' '), i64(g.k), i64(g.k2),
                       g.probability, g.degenerate, b.purity, b.populations[0], b.populations[1],
                       b.populations[2], b.populations[3]});
        }
        return std::array<double, 3>{min_all, min_nondegenerate, max_dev};
    };
    const auto cnot = add_rows("cnot", cnot_direct(in.q, in.q2, p, p, pairing, popts));
    const auto cz = add_rows("cz-contrast", cz_purity_contrast(in.q, in.q2, p, p, popts));

    // Computational-basis values on branches where the target saw the ancilla.
    bool basis_ok = true;
    std::int64_t basis_checked = 0;
    for (int b = 0; b < 2; ++b) {
        for (int b2 = 0; b2 < 2; ++b2) {
            const QubitAmplitudes q = b ? QubitAmplitudes::one() : QubitAmplitudes::zero();
            const QubitAmplitudes q2 = b2 ? QubitAmplitudes::one() : QubitAmplitudes::zero();
            const auto want = static_cast<std::size_t>(2 * b + (b ^ b2));
            for (const auto& br : cnot_direct(q, q2, p, p, pairing, popts)) {
                const auto& g = br.outcome;
                const bool usable = pairing == CnotPairing::all_pairs
                                        ? (g.k2 >= 1 && g.k2 <= n)
                                        : (g.k == g.k2 && !g.degenerate);
                if (!usable) continue;
                ++basis_checked;
                if (std::abs(br.populations[want] - 1.0) > 1e-9) basis_ok = false;
            }
        }
    }
    r.add_summary("cnot_min_purity", cnot[0]);
    r.add_summary("cnot_min_purity_nondegenerate", cnot[1]);
    r.add_summary("cnot_impure_branch_found", cnot[0] < 0.999);
    r.add_summary("cz_contrast_min_purity", cz[0]);
    r.add_summary("cz_contrast_max_purity_deviation", cz[2]);
    r.add_summary("basis_values_correct", basis_ok);
    r.add_summary("basis_branches_checked", basis_checked);
    return res;
}

CommandResult cmd_scan(const Options& o, std::ostream& err) {
    const auto ns = resolve_n_list(o);
    const std::string specs = o.profile.empty() ? "linear" : o.profile;
    const InputEnsemble e = resolve_ensemble(o, err);
    const auto samples = ensemble_samples(e);

    CommandResult res;
    Report& r = res.report;
    r.command = "scan";
    r.seed = o.seed;
    r.config = base_config(o);
    r.config["n"] = ns;
    r.config["profile"] = split(specs, ',');
    r.config["ensemble"] = o.ensemble;
    if (e.kind == EnsembleKind::fixed) r.config["input"] = qubit_json(e.input);

    r.columns = {"n", "profile", "exact_error", "second_order_error", "scaled_error",
                 "continuum_error", "klm_failure", "cz_error", "scaled_cz_error"};
    for (std::size_t n : ns) {
        for (const std::string& spec : split(specs, ',')) {
            const CoefficientProfile p = resolve_profile(spec, n, err);
            const double exact = average_error_exact(p, samples);
            const auto cont = continuum_error(p);
            const double cz = cz_average_error_factored(p, p, samples);
            const double n2 = static_cast<double>(n) * static_cast<double>(n);
            r.add_row({i64(n), profile_name(spec, p), exact, average_error_second_order(p), n2 * exact,
                       cont ? Cell{*cont} : Cell{}, klm_failure_probability(n), cz, n2 * cz});
        }
    }
    return res;
}

ObjectiveKind resolve_objective(const Options& o) {
    if (o.objective == "second-order") return ObjectiveKind::second_order;
    if (o.objective == "exact") return ObjectiveKind::exact_single;
    if (o.objective == "exact-cz") return ObjectiveKind::exact_cz;
    throw ConfigError("--objective must be second-order, exact or exact-cz");
}

std::string default_profile_path(std::size_t n, const Options& o) {
    return fmt::format("profile_n{}_{}_{}.json", n, o.objective, o.endpoints);
}

CommandResult cmd_optimize(const Options& o, std::ostream& err) {
    const auto ns = resolve_n_list(o);
    const ObjectiveKind kind = resolve_objective(o);
    const Endpoints endpoints = resolve_endpoints(o);
    const InputEnsemble e = resolve_ensemble(o, err);
    if (o.independent && kind != ObjectiveKind::exact_cz) {
        throw ConfigError("--independent requires --objective exact-cz");
    }
    DescentOptions dopts;
    dopts.endpoints = endpoints;
    dopts.max_iterations = o.max_iterations;
    const bool single = ns.size() == 1;

    CommandResult res;
    Report& r = res.report;
    r.command = "optimize";
    r.seed = o.seed;
    r.config = base_config(o);
    r.config["n"] = ns;
    r.config["objective"] = o.objective;
    r.config["endpoints"] = o.endpoints;
    r.config["ensemble"] = o.ensemble;
    r.config["independent"] = o.independent;
    r.config["max_iterations"] = o.max_iterations;

    r.columns = {"n", "objective_value", "linear_objective", "improvement_vs_linear", "iterations",
                 "converged", "single_improvement", "additive_reading", "multiplicative_reading",
                 "profile_file"};

    for (std::size_t n : ns) {
        if (n < 2 && kind != ObjectiveKind::second_order) {
            throw ConfigError("exact objectives need n >= 2");
        }
        std::vector<Cell> row{i64(n)};
        std::vector<std::pair<CoefficientProfile, std::string>> to_write;
        const std::string path = o.profile_out.empty() ? default_profile_path(n, o)
                                 : single               ? o.profile_out
                                                        : fmt::format("{}.n{}.json", o.profile_out, n);
        if (kind == ObjectiveKind::exact_cz && o.independent) {
            const auto pr = optimize_exact_cz_independent(n, e, o.seed, dopts);
            row.insert(row.end(), {pr.objective_value, Cell{}, pr.improvement_vs_linear,
                                   static_cast<std::int64_t>(pr.iterations), pr.converged, Cell{}, Cell{},
                                   Cell{}});
            to_write.emplace_back(pr.profile, path);
            to_write.emplace_back(pr.profile2, path + ".profile2.json");
        } else if (kind == ObjectiveKind::exact_cz) {
            const auto rep = cz_improvement_report(n, e, o.seed, dopts);
            row.insert(row.end(), {rep.optimized_error, rep.linear_error, rep.measured_improvement,
                                   Cell{}, rep.converged, rep.single_improvement, rep.additive_reading,
                                   rep.multiplicative_reading});
            to_write.emplace_back(CoefficientProfile(rep.optimized_profile, ProfileLabel::optimized), path);
        } else {
            const OptimizationResult opt = kind == ObjectiveKind::second_order
                                               ? optimize_second_order(n, endpoints)
                                               : optimize_exact(n, e, kind, o.seed, dopts);
            auto opt_cell = [](const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; };
            row.insert(row.end(), {opt.objective_value, opt_cell(opt.linear_objective),
                                   opt_cell(opt.improvement_vs_linear),
                                   static_cast<std::int64_t>(opt.iterations), opt.converged, Cell{},
                                   Cell{}, Cell{}});
            to_write.emplace_back(opt.profile, path);
        }
        for (const auto& [prof, file] : to_write) write_atomic(file, profile_to_json(prof));
        row.emplace_back(path);
        r.add_row(std::move(row));

        const auto& cells = r.rows.back();
        res.notes.push_back(fmt::format("n={} improvement_vs_linear={} profile={}", n,
                                        cell_text(cells[3]), path));
        if (kind == ObjectiveKind::exact_cz && !o.independent) {
            res.notes.push_back(fmt::format(
                "n={} measured={} additive_reading={} multiplicative_reading={} single={}", n,
                cell_text(cells[3]), cell_text(cells[7]), cell_text(cells[8]), cell_text(cells[6])));
        }
    }
    return res;
}

struct CheckTally {
    std::string name;
    double tolerance;
    double max_deviation = 0.0;
    std::int64_t cases = 0;

    void record(double deviation) {
        ++cases;
        if (!(deviation <= max_deviation)) max_deviation = deviation;  // NaN sticks
    }
    bool passed() const { return max_deviation <= tolerance; }
};

CommandResult cmd_oracle_check(const Options& o, std::ostream& err) {
    std::vector<std::size_t> ns;
    if (o.n == 0) {
        ns = {1, 2, 3, 4};
    } else {
        if (o.n > 4) throw ConfigError("oracle-check is limited to n <= 4");
        ns = {o.n};
    }
    if (!o.inject_fault.empty() && o.inject_fault != "cz-sign") {
        throw ConfigError("--inject-fault supports only cz-sign");
    }
    const ProtocolOptions popts = protocol_options(o);
    CzOptions copts;
    copts.protocol = popts;
    copts.swap_parity_rule = o.inject_fault == "cz-sign";

    CheckTally tele_out{"teleport-output-vs-closed-form", 1e-10};
    CheckTally tele_prob{"teleport-probability-vs-closed-form", 1e-10};
    CheckTally success{"success-probability-vs-closed-form", 1e-10};
    CheckTally translation{"translational-property", 1e-10};
    CheckTally cz_signs{"cz-uncorrected-signs", 1e-10};
    CheckTally cz_bookkeeping{"cz-parity-sign-bookkeeping", 1e-10};
    CheckTally cz_table{"cz-basis-truth-table", 1e-10};
    CheckTally cz_prob{"cz-probability-vs-closed-form", 1e-10};
    CheckTally klm{"klm-postselection", 1e-12};

    std::mt19937_64 rng(o.seed);
    for (std::size_t m = 1; m <= 6; ++m) {
        std::vector<std::size_t> modes(m);
        for (std::size_t i = 0; i < m; ++i) modes[i] = i;
        const ModeUnitary u = dft_unitary(m);
        for (const auto& s : basis_up_to(m, m)) {
            const FockState lhs = apply_mode_unitary(cyclic_shift(FockState::basis(s), modes), u, modes);
            FockState rhs(m);
            for (const auto& [t, amp] : apply_mode_unitary(FockState::basis(s), u, modes)) {
                rhs.add(t, translation_phase(t, m) * amp);
            }
            translation.record(max_abs_difference(lhs, rhs));
        }
    }

    for (std::size_t n : ns) {
        for (const CoefficientProfile& p : check_profiles(n)) {
            std::vector<QubitAmplitudes> qs{QubitAmplitudes::zero(), QubitAmplitudes::one()};
            for (std::size_t i = 0; i < o.inputs; ++i) qs.push_back(random_qubit(rng));
            for (const auto& q : qs) {
                const auto outs = teleport_enumerate(q, p, popts);
                const auto dist = outcome_distribution(q, p);
                std::vector<double> by_k(n + 2, 0.0);
                for (const auto& t : outs) {
                    by_k[t.k] += t.probability;
                    tele_out.record(qubit_distance_up_to_phase(
                        t.output, teleport_output_formula(q, p, static_cast<long>(t.k))));
                    success.record(std::abs(fidelity(q, t.output) -
                                            success_probability_exact(q, p, static_cast<long>(t.k))));
                }
                for (std::size_t k = 0; k < by_k.size(); ++k) tele_prob.record(std::abs(by_k[k] - dist[k]));
            }

            const std::size_t cz_pairs = n >= 4 ? 2 : 4;
            for (std::size_t i = 0; i < cz_pairs; ++i) {
                const QubitAmplitudes q = random_qubit(rng);
                const QubitAmplitudes q2 = random_qubit(rng);
                const auto raw = cz_gate_uncorrected(q, q2, p, p, popts);
                for (const auto& g : raw) {
                    const auto sign = cz_uncorrected_signs(static_cast<long>(g.k), static_cast<long>(g.k2));
                    // Strip the ideal CZ sign from the corrected closed form and apply the
                    // predicted uncorrected signs instead.
                    auto want = cz_output_formula(q, q2, p, p, static_cast<long>(g.k), static_cast<long>(g.k2));
                    want[3] = -want[3];
                    for (std::size_t b = 0; b < 4; ++b) want[b] *= sign[b];
                    cz_signs.record(pair_distance_up_to_phase(g.output, want));
                }
                const auto outs = cz_gate(q, q2, p, p, copts);
                const auto d = outcome_distribution(q, p);
                const auto d2 = outcome_distribution(q2, p);
                std::map<std::pair<std::size_t, std::size_t>, double> by_k;
                for (const auto& g : outs) {
                    by_k[{g.k, g.k2}] += g.probability;
                    cz_bookkeeping.record(pair_distance_up_to_phase(
                        g.output, cz_output_formula(q, q2, p, p, static_cast<long>(g.k),
                                                    static_cast<long>(g.k2))));
                }
                for (std::size_t k = 0; k < d.size(); ++k) {
                    for (std::size_t k2 = 0; k2 < d2.size(); ++k2) {
                        const auto it = by_k.find({k, k2});
                        cz_prob.record(std::abs((it == by_k.end() ? 0.0 : it->second) - d[k] * d2[k2]));
                    }
                }
            }
        }

        const CoefficientProfile pu = profile_uniform(n);
        for (int i = 0; i < 3; ++i) {
            const QubitAmplitudes q = random_qubit(rng);
            const auto summary = klm_postselect(teleport_enumerate(q, pu, popts), q);
            klm.record(std::abs(summary.conditional_fidelity - 1.0));
            klm.record(std::abs(summary.failure_probability - klm_failure_probability(n)));
        }

        if (n <= 3) {
            std::map<std::pair<OccupationVector, OccupationVector>, Complex> reference;
            for (const auto& g : cz_gate(QubitAmplitudes::zero(), QubitAmplitudes::zero(), pu, pu, copts)) {
                reference[{g.pattern, g.pattern2}] = g.output[0];
            }
            const double want_sign[4] = {1.0, 1.0, 1.0, -1.0};
            for (int b = 0; b < 2; ++b) {
                for (int b2 = 0; b2 < 2; ++b2) {
                    const QubitAmplitudes q = b ? QubitAmplitudes::one() : QubitAmplitudes::zero();
                    const QubitAmplitudes q2 = b2 ? QubitAmplitudes::one() : QubitAmplitudes::zero();
                    const auto idx = static_cast<std::size_t>(2 * b + b2);
                    for (const auto& g : cz_gate(q, q2, pu, pu, copts)) {
                        if (g.degenerate) continue;
                        const auto it = reference.find({g.pattern, g.pattern2});
                        cz_table.record(it == reference.end()
                                            ? 1.0
                                            : std::abs(g.output[idx] - want_sign[idx] * it->second));
                    }
                }
            }
        }
    }

    CommandResult res;
    Report& r = res.report;
    r.command = "oracle-check";
    r.seed = o.seed;
    r.config = base_config(o);
    r.config["n"] = ns;
    r.config["inputs"] = o.inputs;
    if (!o.inject_fault.empty()) r.config["inject_fault"] = o.inject_fault;

    r.columns = {"check", "cases", "max_deviation", "tolerance", "passed"};
    std::vector<std::string> failed;
    for (const CheckTally* c : {&tele_out, &tele_prob, &success, &translation, &cz_signs,
                                &cz_bookkeeping, &cz_table, &cz_prob, &klm}) {
        r.add_row({c->name, c->cases, c->max_deviation, c->tolerance, c->passed()});
        res.notes.push_back(fmt::format("{} {} max_deviation={} cases={}", c->passed() ? "PASS" : "FAIL",
                                        c->name, format_number(c->max_deviation), c->cases));
        if (!c->passed()) failed.push_back(c->name);
    }
    std::string failed_list;
    for (const auto& f : failed) failed_list += (failed_list.empty() ? "" : ",") + f;
    r.add_summary("all_passed", failed.empty());
    r.add_summary("failed_checks", failed_list);
    if (!failed.empty()) {
        err << "oracle-check failed: " << failed_list << "\n";
        res.code = exit_check_failed;
    }
    return res;
}

// ---------------------------------------------------------------- wiring

void add_output_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", o.out, "Write the report to this file instead of stdout");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--basis-cap", o.basis_cap, "Maximum number of Fock basis terms")
        ->check(CLI::PositiveNumber);
}

void add_profile_option(CLI::App* cmd, Options& o, const std::string& deflt) {
    cmd->add_option("--profile", o.profile,
                    "uniform | linear | sine | file:PATH (default " + deflt + ")");
}

void add_input_options(CLI::App* cmd, Options& o, bool two) {
    cmd->add_option("--input", o.input, "Real amplitudes a0,a1 of the input qubit");
    if (two) cmd->add_option("--input2", o.input2, "Real amplitudes a0,a1 of the second qubit");
    cmd->add_option("--input-json", o.input_json, "JSON file with complex inputs");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Teleportation and gate simulator for photon-number ancillas", "hifi"};
    app.set_version_flag("--version", std::string(HIFI_VERSION));
    app.require_subcommand(1);

    auto* teleport = app.add_subcommand("teleport", "Enumerate teleportation outcomes for one input");
    teleport->add_option("--n", o.n, "Ancilla size");
    add_profile_option(teleport, o, "sine");
    add_input_options(teleport, o, false);
    teleport->add_option("--samples", o.samples, "Draw this many seeded outcome samples");

    auto* cz = app.add_subcommand("cz", "Enumerate CZ gate outcomes for two inputs");
    cz->add_option("--n", o.n, "Ancilla size");
    add_profile_option(cz, o, "sine");
    cz->add_option("--profile2", o.profile2, "Profile of the second ancilla (default: --profile)");
    add_input_options(cz, o, true);

    auto* cnot = app.add_subcommand("cnot-demo", "Direct CNOT ancilla purity demonstration");
    cnot->add_option("--n", o.n, "Ancilla size (2 or 3)")->required();
    add_profile_option(cnot, o, "sine");
    add_input_options(cnot, o, true);
    cnot->add_option("--pairing", o.pairing, "matched | all-pairs");

    auto* scan = app.add_subcommand("scan", "Analytic error table over n and profiles");
    scan->add_option("--n", o.n, "Ancilla size");
    scan->add_option("--n-range", o.n_range, "A:B[:step]");
    add_profile_option(scan, o, "linear; comma-separated list allowed");
    scan->add_option("--ensemble", o.ensemble, "uniform-p0 | basis-pair | fixed");
    add_input_options(scan, o, false);

    auto* optimize = app.add_subcommand("optimize", "Optimize the ancilla profile");
    optimize->add_option("--n", o.n, "Ancilla size");
    optimize->add_option("--n-range", o.n_range, "A:B[:step]");
    optimize->add_option("--objective", o.objective, "second-order | exact | exact-cz");
    optimize->add_option("--endpoints", o.endpoints, "pinned | free");
    optimize->add_option("--ensemble", o.ensemble, "uniform-p0 | basis-pair | fixed");
    add_input_options(optimize, o, false);
    optimize->add_flag("--independent", o.independent, "Optimize the two CZ profiles separately");
    optimize->add_option("--profile-out", o.profile_out, "Where to write the optimized profile JSON");
    optimize->add_option("--max-iterations", o.max_iterations, "Descent iteration cap")
        ->check(CLI::PositiveNumber);

    auto* oracle = app.add_subcommand("oracle-check", "Compare the simulator with closed forms (n <= 4)");
    oracle->add_option("--n", o.n, "Restrict to one ancilla size");
    oracle->add_option("--inputs", o.inputs, "Random inputs per profile");
    oracle->add_option("--inject-fault", o.inject_fault)->group("");

    for (auto* cmd : {teleport, cz, cnot, scan, optimize, oracle}) add_output_options(cmd, o);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o_out;
        std::ostringstream o_err;
        const int code = app.exit(e, o_out, o_err);
        out << o_out.str();
        err << o_err.str();
        return code == 0 ? exit_ok : exit_config_error;
    }

    try {
        CommandResult res;
        if (*teleport) res = cmd_teleport(o, err);
        else if (*cz) res = cmd_cz(o, err);
        else if (*cnot) res = cmd_cnot_demo(o, err);
        else if (*scan) res = cmd_scan(o, err);
        else if (*optimize) res = cmd_optimize(o, err);
        else res = cmd_oracle_check(o, err);

        const std::string text = render(res.report, o.format == "json" ? Format::json : Format::csv);
        if (o.out.empty()) {
            out << text;
            for (const auto& note : res.notes) err << note << "\n";
        } else {
            write_atomic(o.out, text);
            for (const auto& note : res.notes) out << note << "\n";
        }
        return res.code;
    } catch (const ProtocolError& e) {
        err << "error: " << e.what() << "\n";
        return exit_check_failed;
    } catch (const BasisCapExceeded& e) {
        err << "error: basis cap exceeded: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_config_error;
    }
}

}  // namespace hifi::cli
