#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "hifi/ancilla.hpp"
#include "hifi/protocol.hpp"

namespace hifi {

enum class EnsembleKind {
    uniform_p0,  // P0 ~ Uniform[0,1], P1 = 1 - P0; phases do not enter
    fixed,       // a single input state
    basis_pair,  // |0> and |1> with equal weight
};

struct InputEnsemble {
    EnsembleKind kind = EnsembleKind::uniform_p0;
    QubitAmplitudes input{};   // used when kind == fixed
    int quadrature_order = 64;

    static InputEnsemble uniform_p0(int order = 64) { return {EnsembleKind::uniform_p0, {}, order}; }
    static InputEnsemble fixed(const QubitAmplitudes& q) { return {EnsembleKind::fixed, q, 64}; }
    static InputEnsemble basis_pair() { return {EnsembleKind::basis_pair, {}, 64}; }
};

/// Weighted P0 samples for an ensemble. Weights sum to 1.
struct EnsembleSample {
    double p0;
    double weight;
};
std::vector<EnsembleSample> ensemble_samples(const InputEnsemble& e);

/// Gauss-Legendre nodes and weights mapped onto [0, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureRule gauss_legendre_unit(int order);

/// Probability that the teleported qubit is correct on branch k. Throws
/// std::domain_error when the branch cannot occur.
double success_probability_exact(const QubitAmplitudes& q, const CoefficientProfile& p, long k);

/// True when f(k) != 0, so the relative slope (f(k) - f(k-1)) / f(k) exists.
bool second_order_applicable(const CoefficientProfile& p, long k);

/// 1 - P0 P1 ((f(k) - f(k-1)) / f(k))^2, or the exact value when f(k) = 0.
double success_probability_second_order(const QubitAmplitudes& q, const CoefficientProfile& p, long k);

/// Pr(k) = P0 f(k)^2 + P1 f(k-1)^2 for k = 0..n+1.
std::vector<double> outcome_distribution(const QubitAmplitudes& q, const CoefficientProfile& p);

/// Ensemble average of sum_k Pr(k) (1 - P_S(k)).
double average_error_exact(const CoefficientProfile& p, const InputEnsemble& e = {});
double average_error_exact(const CoefficientProfile& p, std::span<const EnsembleSample> samples);

/// (1/6) sum_{k=0}^{n+1} (f(k) - f(k-1))^2.
double average_error_second_order(const CoefficientProfile& p);

/// Large-n closed form for the named profile families; empty when none exists.
std::optional<double> continuum_error(const CoefficientProfile& p);

/// Failure rate of the uniform profile when k = 0 and k = n+1 are rejected.
double klm_failure_probability(std::size_t n);

/// Ensemble-averaged infidelity of the controlled sign flip, summed
/// branch by branch over (k, k') against the ideal CZ output. Both qubits are
/// drawn independently from `e`.
double cz_average_error_exact(const CoefficientProfile& p, const CoefficientProfile& p2,
                              const InputEnsemble& e = {});

/// 1 - (1 - E) (1 - E'), the same quantity for product ensembles.
double cz_average_error_factored(const CoefficientProfile& p, const CoefficientProfile& p2,
                                 const InputEnsemble& e = {});
double cz_average_error_factored(const CoefficientProfile& p, const CoefficientProfile& p2,
                                 std::span<const EnsembleSample> samples);

struct ErrorReport {
    std::size_t n = 0;
    ProfileLabel profile_label = ProfileLabel::custom;
    double exact_error = 0.0;
    double second_order_error = 0.0;
    std::optional<double> continuum_error;
    double klm_failure = 0.0;
    double scaled = 0.0;  // exact_error * n^2
};

ErrorReport error_report(const CoefficientProfile& p, const InputEnsemble& e = {});

// Closed-form branch outputs, used as oracles against the Fock simulation.

/// c (a0 f(k), a1 f(k-1)), normalized.
QubitAmplitudes teleport_output_formula(const QubitAmplitudes& q, const CoefficientProfile& p, long k);

/// Controlled-sign output after parity corrections, normalized.
TwoQubitAmplitudes cz_output_formula(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                     const CoefficientProfile& p, const CoefficientProfile& p2,
                                     long k, long k2);

/// Relative signs of the |00>, |01>, |10>, |11> terms before the parity
/// corrections: (-1)^{kk'} (1, (-1)^k, (-1)^{k'}, (-1)^{k+k'+1}).
std::array<double, 4> cz_uncorrected_signs(long k, long k2);

}  // namespace hifi
