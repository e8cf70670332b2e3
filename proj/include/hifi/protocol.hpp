#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hifi/ancilla.hpp"
#include "hifi/fock.hpp"

namespace hifi {

/// Signals an internal inconsistency in a protocol run, such as a residual
/// register that fails to factor out of the output.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// a0|0> + a1|1>, unit norm to 1e-12.
class QubitAmplitudes {
public:
    QubitAmplitudes() = default;
    QubitAmplitudes(Complex a0, Complex a1);

    /// Rescales to unit norm; throws on the zero vector.
    static QubitAmplitudes normalize(Complex a0, Complex a1);
    static QubitAmplitudes zero() { return {Complex{1, 0}, Complex{}}; }
    static QubitAmplitudes one() { return {Complex{}, Complex{1, 0}}; }

    Complex a0() const { return a0_; }
    Complex a1() const { return a1_; }
    double p0() const { return std::norm(a0_); }
    double p1() const { return std::norm(a1_); }

    /// Single-mode Fock state: photon absent = 0, present = 1.
    FockState to_fock() const;

private:
    Complex a0_{1.0, 0.0};
    Complex a1_{};
};

/// |<a|b>|^2.
double fidelity(const QubitAmplitudes& a, const QubitAmplitudes& b);

struct ProtocolOptions {
    FockLimits limits{};
    double factor_tolerance = 1e-9;
};

/// prod_l exp(2 pi i l r_l / m): the relative phase picked up by translating
/// the input of an m-mode DFT one mode to the right.
Complex translation_phase(const OccupationVector& pattern, std::size_t m);

/// Conjugate of translation_phase. Multiplying the |0> component of the
/// output qubit by this value removes the relative phase between the two
/// terms of a measured branch.
Complex phase_correction(const OccupationVector& pattern, std::size_t m);

struct TeleportOutcome {
    OccupationVector pattern;    // r_0 .. r_n
    std::size_t k = 0;           // total photons counted
    Complex correction_phase{1.0, 0.0};
    QubitAmplitudes output;      // after correction, normalized
    double probability = 0.0;
    FockState residual;          // remaining y modes
    bool degenerate = false;     // k == 0 or k == n+1
    double factor_deviation = 0.0;
};

/// Full Fock-space run of single-qubit teleportation; outcomes in
/// lexicographic pattern order.
std::vector<TeleportOutcome> teleport_enumerate(const QubitAmplitudes& q, const CoefficientProfile& p,
                                                const ProtocolOptions& options = {});

/// One outcome drawn with its enumerated probability.
TeleportOutcome teleport_sample(const QubitAmplitudes& q, const CoefficientProfile& p,
                                std::uint64_t seed, const ProtocolOptions& options = {});

/// Index drawn from a discrete distribution; 53-bit uniform from mt19937_64.
std::size_t sample_index(const std::vector<double>& probabilities, std::uint64_t seed);

/// KLM-style post-selection: discard k = 0 and k = n+1.
struct PostSelectionSummary {
    double success_probability = 0.0;
    double conditional_fidelity = 0.0;  // probability-weighted mean over kept branches
    double failure_probability = 0.0;
};

PostSelectionSummary klm_postselect(const std::vector<TeleportOutcome>& outcomes,
                                    const QubitAmplitudes& q);

/// Probability-weighted mean of 1 - |<q|out>|^2 over every branch.
double average_infidelity(const std::vector<TeleportOutcome>& outcomes, const QubitAmplitudes& q);

// ---------------------------------------------------------------------------
// Two-qubit gates

struct SignCorrections {
    bool sign_flip_q = false;
    bool sign_flip_q2 = false;
    friend bool operator==(const SignCorrections&, const SignCorrections&) = default;
};

/// Parity rule for the controlled sign flip: flip |q=1> when k' is odd and
/// |q'=1> when k is odd.
SignCorrections cz_sign_corrections(std::size_t k, std::size_t k2);

/// Two-qubit amplitudes indexed 2*q + q'.
using TwoQubitAmplitudes = std::array<Complex, 4>;

struct GateOutcome {
    OccupationVector pattern;   // measured counts on register c
    OccupationVector pattern2;  // measured counts on register c'
    std::size_t k = 0;
    std::size_t k2 = 0;
    Complex correction_phase{1.0, 0.0};
    Complex correction_phase2{1.0, 0.0};
    SignCorrections applied_corrections;
    bool target_flip = false;   // classical NOT on q' (direct CNOT only)
    TwoQubitAmplitudes output{};
    double probability = 0.0;
    FockState residual;         // y minus its output mode
    FockState residual2;        // y' minus its output mode
    bool degenerate = false;    // k or k' outside 1..n
    double factor_deviation = 0.0;
};

struct CzOptions {
    ProtocolOptions protocol{};
    /// Fault injection for self-tests: apply the parity rule with k and k' swapped.
    bool swap_parity_rule = false;
};

std::vector<GateOutcome> cz_gate(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                 const CoefficientProfile& p, const CoefficientProfile& p2,
                                 const CzOptions& options = {});

/// CZ branches before the parity corrections (phase corrections applied).
std::vector<GateOutcome> cz_gate_uncorrected(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                             const CoefficientProfile& p,
                                             const CoefficientProfile& p2,
                                             const ProtocolOptions& options = {});

struct CnotBranch {
    GateOutcome outcome;           // output is the dominant product factor
    double purity = 1.0;           // Tr(rho^2) of the two output qubits
    std::array<double, 4> populations{};  // output-qubit populations after corrections
};

/// Teleportation through the direct-CNOT ancilla. Residual entanglement is
/// reported through purity rather than raised.
std::vector<CnotBranch> cnot_direct(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                    const CoefficientProfile& p, const CoefficientProfile& p2,
                                    CnotPairing pairing = CnotPairing::all_pairs,
                                    const ProtocolOptions& options = {});

/// Same pipeline as cnot_direct but with the controlled-sign ancilla and
/// its parity corrections; every purity should be 1.
std::vector<CnotBranch> cz_purity_contrast(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                           const CoefficientProfile& p,
                                           const CoefficientProfile& p2,
                                           const ProtocolOptions& options = {});

}  // namespace hifi
