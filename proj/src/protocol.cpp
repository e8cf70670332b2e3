#include "hifi/protocol.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace hifi {

namespace {

std::vector<std::size_t> mode_range(std::size_t first, std::size_t count) {
    std::vector<std::size_t> modes(count);
    std::iota(modes.begin(), modes.end(), first);
    return modes;
}

bool is_interior(std::size_t k, std::size_t n) { return k >= 1 && k <= n; }

// Output qubit of one register after measurement: either a mode of the
// post-measurement state or, for k = 0 / k = n+1, a fixed classical bit.
struct OutputSlot {
    std::optional<std::size_t> mode;
    int fixed_bit = 0;
};

OutputSlot output_slot(std::size_t k, std::size_t n, std::size_t register_offset) {
    if (is_interior(k, n)) return {register_offset + (k - 1), 0};
    return {std::nullopt, k == 0 ? 0 : 1};
}

int occupancy_bit(std::uint8_t photons) {
    if (photons > 1) throw ProtocolError("output mode holds more than one photon");
    return photons;
}

// Two-register layout after assembly:
//   q = 0, x = 1..n, y = n+1..2n, q' = 2n+1, x' = 2n+2..3n+1, y' = 3n+2..4n+1.
// Post-measurement states keep y then y' (2n modes).
struct GateBranch {
    OccupationVector pattern;
    OccupationVector pattern2;
    double probability;
    FockState post;
};

std::vector<GateBranch> run_two_registers(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                          const FockState& ancilla, std::size_t n,
                                          const FockLimits& limits) {
    // tensor(q, q2, ancilla) has q=0, q'=1, x=2.., y=n+2.., x'=2n+2.., y'=3n+2..
    const FockState unordered = tensor(tensor(q.to_fock(), q2.to_fock(), limits), ancilla, limits);
    std::vector<std::size_t> order;
    order.push_back(0);
    for (std::size_t i = 0; i < 2 * n; ++i) order.push_back(2 + i);
    order.push_back(1);
    for (std::size_t i = 0; i < 2 * n; ++i) order.push_back(2 + 2 * n + i);
    FockState state = permute_modes(unordered, order);

    const ModeUnitary dft = dft_unitary(n + 1);
    const std::vector<std::size_t> c = mode_range(0, n + 1);
    const std::vector<std::size_t> c2 = mode_range(2 * n + 1, n + 1);
    state = apply_mode_unitary(state, dft, c, limits);
    state = apply_mode_unitary(state, dft, c2, limits);

    std::vector<std::size_t> measured = c;
    measured.insert(measured.end(), c2.begin(), c2.end());
    const std::vector<std::size_t> first = mode_range(0, n + 1);
    const std::vector<std::size_t> second = mode_range(n + 1, n + 1);

    std::vector<GateBranch> out;
    for (auto& m : measure_photon_numbers(state, measured)) {
        out.push_back({m.pattern.select(first), m.pattern.select(second), m.probability,
                       std::move(m.post_state)});
    }
    return out;
}

struct Extracted {
    TwoQubitAmplitudes amplitudes{};
    FockState residual;
    FockState residual2;
    double deviation = 0.0;
};

// Splits a 2n-mode post-measurement state into the two output qubits and the
// two residual registers.
Extracted extract_two_qubits(const FockState& post, std::size_t n, const OutputSlot& slot,
                             const OutputSlot& slot2) {
    std::vector<std::size_t> keep;
    if (slot.mode) keep.push_back(*slot.mode);
    if (slot2.mode) keep.push_back(*slot2.mode);

    Extracted ex;
    FockState rest = post;
    if (!keep.empty()) {
        Factorization f = factor_out(post, keep);
        ex.deviation = f.deviation;
        rest = std::move(f.rest);
        for (const auto& [occ, amp] : f.kept) {
            std::size_t pos = 0;
            const int b = slot.mode ? occupancy_bit(occ[pos++]) : slot.fixed_bit;
            const int b2 = slot2.mode ? occupancy_bit(occ[pos]) : slot2.fixed_bit;
            ex.amplitudes[static_cast<std::size_t>(2 * b + b2)] += amp;
        }
    } else {
        ex.amplitudes[static_cast<std::size_t>(2 * slot.fixed_bit + slot2.fixed_bit)] = 1.0;
    }

    const std::size_t first_len = n - (slot.mode ? 1 : 0);
    const std::vector<std::size_t> first = mode_range(0, first_len);
    Factorization split = factor_out(rest, first);
    ex.deviation = std::max(ex.deviation, split.deviation);
    ex.residual = std::move(split.kept);
    ex.residual2 = std::move(split.rest);
    return ex;
}

void normalize(TwoQubitAmplitudes& v) {
    double s = 0.0;
    for (const Complex& a : v) s += std::norm(a);
    const double scale = 1.0 / std::sqrt(s);
    for (Complex& a : v) a *= scale;
}

void apply_phase_and_sign(TwoQubitAmplitudes& v, Complex corr, Complex corr2,
                          const SignCorrections& signs) {
    for (std::size_t b = 0; b < 2; ++b) {
        for (std::size_t b2 = 0; b2 < 2; ++b2) {
            Complex& a = v[2 * b + b2];
            if (b == 0) a *= corr;
            if (b2 == 0) a *= corr2;
            if (b == 1 && signs.sign_flip_q) a = -a;
            if (b2 == 1 && signs.sign_flip_q2) a = -a;
        }
    }
}

void flip_target(TwoQubitAmplitudes& v) {
    std::swap(v[0], v[1]);
    std::swap(v[2], v[3]);
}

enum class GateKind { cz, cz_uncorrected, cnot };

struct GateRun {
    GateOutcome outcome;
    FockState post;
    OutputSlot slot;
    OutputSlot slot2;
};

std::vector<GateRun> run_gate(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                              const CoefficientProfile& p, const CoefficientProfile& p2,
                              GateKind kind, CnotPairing pairing, bool swap_parity,
                              const ProtocolOptions& options) {
    const std::size_t n = p.n();
    const FockState ancilla = kind == GateKind::cnot ? cnot_ancilla_state(p, p2, pairing)
                                                     : cz_ancilla_state(p, p2);
    std::vector<GateRun> runs;
    for (auto& branch : run_two_registers(q, q2, ancilla, n, options.limits)) {
        GateRun run;
        GateOutcome& g = run.outcome;
        g.pattern = branch.pattern;
        g.pattern2 = branch.pattern2;
        g.k = branch.pattern.total();
        g.k2 = branch.pattern2.total();
        g.probability = branch.probability;
        g.degenerate = !is_interior(g.k, n) || !is_interior(g.k2, n);
        g.correction_phase = phase_correction(branch.pattern, n + 1);
        g.correction_phase2 = phase_correction(branch.pattern2, n + 1);
        if (kind == GateKind::cz) {
            g.applied_corrections = swap_parity ? cz_sign_corrections(g.k2, g.k)
                                                : cz_sign_corrections(g.k, g.k2);
        }
        if (kind == GateKind::cnot && pairing == CnotPairing::all_pairs) {
            // The target picks up parity(n - k + q); undo the known part. A
            // degenerate k' leaves q' as a fixed bit that never saw the ancilla.
            g.target_flip = is_interior(g.k2, n) && (n + g.k) % 2 == 1;
        }

        run.slot = output_slot(g.k, n, 0);
        run.slot2 = output_slot(g.k2, n, n);
        Extracted ex = extract_two_qubits(branch.post, n, run.slot, run.slot2);
        g.factor_deviation = ex.deviation;
        g.residual = std::move(ex.residual);
        g.residual2 = std::move(ex.residual2);
        g.output = ex.amplitudes;
        apply_phase_and_sign(g.output, g.correction_phase, g.correction_phase2,
                             g.applied_corrections);
        if (g.target_flip) flip_target(g.output);
        normalize(g.output);

        if (kind != GateKind::cnot && g.factor_deviation > options.factor_tolerance) {
            throw ProtocolError("residual registers do not factor out (deviation " +
                                std::to_string(g.factor_deviation) + ")");
        }
        run.post = std::move(branch.post);
        runs.push_back(std::move(run));
    }
    return runs;
}

CnotBranch purity_branch(GateRun&& run) {
    CnotBranch b;
    std::vector<std::size_t> keep;
    if (run.slot.mode) keep.push_back(*run.slot.mode);
    if (run.slot2.mode) keep.push_back(*run.slot2.mode);
    if (keep.empty()) {
        b.purity = 1.0;
        b.populations[static_cast<std::size_t>(2 * run.slot.fixed_bit + run.slot2.fixed_bit)] = 1.0;
    } else {
        const DensityMatrix rho = reduced_density_matrix(run.post, keep);
        rho.check_invariants();
        b.purity = rho.purity();
        for (std::size_t i = 0; i < rho.dimension(); ++i) {
            std::size_t pos = 0;
            const OccupationVector& occ = rho.basis[i];
            const int bit = run.slot.mode ? occupancy_bit(occ[pos++]) : run.slot.fixed_bit;
            const int bit2 = run.slot2.mode ? occupancy_bit(occ[pos]) : run.slot2.fixed_bit;
            b.populations[static_cast<std::size_t>(2 * bit + bit2)] +=
                rho.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
        }
    }
    if (run.outcome.target_flip) {
        std::swap(b.populations[0], b.populations[1]);
        std::swap(b.populations[2], b.populations[3]);
    }
    b.outcome = std::move(run.outcome);
    return b;
}

}  // namespace

// ---------------------------------------------------------------------------

QubitAmplitudes::QubitAmplitudes(Complex a0, Complex a1) : a0_(a0), a1_(a1) {
    if (std::abs(std::norm(a0) + std::norm(a1) - 1.0) > 1e-12) {
        throw std::invalid_argument("qubit amplitudes are not normalized");
    }
}

QubitAmplitudes QubitAmplitudes::normalize(Complex a0, Complex a1) {
    const double n2 = std::norm(a0) + std::norm(a1);
    if (!(n2 > 0.0) || !std::isfinite(n2)) throw std::invalid_argument("qubit amplitudes are zero");
    const double s = 1.0 / std::sqrt(n2);
    return {a0 * s, a1 * s};
}

FockState QubitAmplitudes::to_fock() const {
    FockState s(1);
    if (a0_ != Complex{}) s.add(OccupationVector{0}, a0_);
    if (a1_ != Complex{}) s.add(OccupationVector{1}, a1_);
    return s;
}

double fidelity(const QubitAmplitudes& a, const QubitAmplitudes& b) {
    return std::norm(std::conj(a.a0()) * b.a0() + std::conj(a.a1()) * b.a1());
}

Complex translation_phase(const OccupationVector& pattern, std::size_t m) {
    std::size_t exponent = 0;
    for (std::size_t l = 0; l < pattern.size(); ++l) exponent += l * pattern[l];
    exponent %= m;
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(exponent) /
                               static_cast<double>(m));
}

Complex phase_correction(const OccupationVector& pattern, std::size_t m) {
    return std::conj(translation_phase(pattern, m));
}

std::vector<TeleportOutcome> teleport_enumerate(const QubitAmplitudes& q, const CoefficientProfile& p,
                                                const ProtocolOptions& options) {
    const std::size_t n = p.n();
    FockState state = tensor(q.to_fock(), single_ancilla_state(p), options.limits);
    const std::vector<std::size_t> c = mode_range(0, n + 1);
    state = apply_mode_unitary(state, dft_unitary(n + 1), c, options.limits);

    std::vector<TeleportOutcome> out;
    for (auto& m : measure_photon_numbers(state, c)) {
        TeleportOutcome t;
        t.pattern = m.pattern;
        t.k = m.pattern.total();
        t.probability = m.probability;
        t.correction_phase = phase_correction(m.pattern, n + 1);
        t.degenerate = !is_interior(t.k, n);
        if (t.k == 0) {
            t.output = QubitAmplitudes::zero();
            t.residual = std::move(m.post_state);
        } else if (t.k == n + 1) {
            t.output = QubitAmplitudes::one();
            t.residual = std::move(m.post_state);
        } else {
            const std::size_t slot = t.k - 1;
            Factorization f = factor_out(m.post_state, std::span(&slot, 1));
            t.factor_deviation = f.deviation;
            if (f.deviation > options.factor_tolerance) {
                throw ProtocolError("residual y register does not factor out (deviation " +
                                    std::to_string(f.deviation) + ")");
            }
            Complex a0{};
            Complex a1{};
            for (const auto& [occ, amp] : f.kept) (occupancy_bit(occ[0]) ? a1 : a0) += amp;
            t.output = QubitAmplitudes::normalize(a0 * t.correction_phase, a1);
            t.residual = std::move(f.rest);
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::size_t sample_index(const std::vector<double>& probabilities, std::uint64_t seed) {
    if (probabilities.empty()) throw std::invalid_argument("sample_index: empty distribution");
    std::mt19937_64 rng(seed);
    // Explicit 53-bit construction keeps draws identical across standard libraries.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        cumulative += probabilities[i] / total;
        if (u < cumulative) return i;
    }
    return probabilities.size() - 1;
}

TeleportOutcome teleport_sample(const QubitAmplitudes& q, const CoefficientProfile& p,
                                std::uint64_t seed, const ProtocolOptions& options) {
    auto outcomes = teleport_enumerate(q, p, options);
    std::vector<double> probs;
    probs.reserve(outcomes.size());
    for (const auto& o : outcomes) probs.push_back(o.probability);
    return std::move(outcomes[sample_index(probs, seed)]);
}

PostSelectionSummary klm_postselect(const std::vector<TeleportOutcome>& outcomes,
                                    const QubitAmplitudes& q) {
    PostSelectionSummary s;
    double weighted = 0.0;
    for (const auto& o : outcomes) {
        if (o.degenerate) {
            s.failure_probability += o.probability;
            continue;
        }
        s.success_probability += o.probability;
        weighted += o.probability * fidelity(q, o.output);
    }
    s.conditional_fidelity = s.success_probability > 0.0 ? weighted / s.success_probability : 0.0;
    return s;
}

double average_infidelity(const std::vector<TeleportOutcome>& outcomes, const QubitAmplitudes& q) {
    double err = 0.0;
    for (const auto& o : outcomes) err += o.probability * (1.0 - fidelity(q, o.output));
    return err;
}

SignCorrections cz_sign_corrections(std::size_t k, std::size_t k2) {
    return {k2 % 2 == 1, k % 2 == 1};
}

std::vector<GateOutcome> cz_gate(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                 const CoefficientProfile& p, const CoefficientProfile& p2,
                                 const CzOptions& options) {
    std::vector<GateOutcome> out;
    for (auto& run : run_gate(q, q2, p, p2, GateKind::cz, CnotPairing::matched,
                              options.swap_parity_rule, options.protocol)) {
        out.push_back(std::move(run.outcome));
    }
    return out;
}

std::vector<GateOutcome> cz_gate_uncorrected(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                             const CoefficientProfile& p,
                                             const CoefficientProfile& p2,
                                             const ProtocolOptions& options) {
    std::vector<GateOutcome> out;
    for (auto& run : run_gate(q, q2, p, p2, GateKind::cz_uncorrected, CnotPairing::matched, false,
                              options)) {
        out.push_back(std::move(run.outcome));
    }
    return out;
}

std::vector<CnotBranch> cnot_direct(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                    const CoefficientProfile& p, const CoefficientProfile& p2,
                                    CnotPairing pairing, const ProtocolOptions& options) {
    if (p.n() < 2) throw std::invalid_argument("cnot_direct requires n >= 2");
    std::vector<CnotBranch> out;
    for (auto& run : run_gate(q, q2, p, p2, GateKind::cnot, pairing, false, options)) {
        out.push_back(purity_branch(std::move(run)));
    }
    return out;
}

std::vector<CnotBranch> cz_purity_contrast(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                           const CoefficientProfile& p,
                                           const CoefficientProfile& p2,
                                           const ProtocolOptions& options) {
    std::vector<CnotBranch> out;
    for (auto& run : run_gate(q, q2, p, p2, GateKind::cz, CnotPairing::matched, false, options)) {
        out.push_back(purity_branch(std::move(run)));
    }
    return out;
}

}  // namespace hifi
