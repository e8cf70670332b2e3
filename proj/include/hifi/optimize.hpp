#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hifi/ancilla.hpp"
#include "hifi/fidelity.hpp"

namespace hifi {

enum class ObjectiveKind { second_order, exact_single, exact_cz };

std::string_view to_string(ObjectiveKind kind);

/// Which coefficients the optimizer may move.
///  free:   all of f(0..n); only f(-1) = f(n+1) = 0 is imposed.
///  pinned: additionally f(0) = f(n) = 0, the support of the linear profile.
enum class Endpoints { free, pinned };

std::string_view to_string(Endpoints endpoints);

struct SymmetricTridiagonal {
    std::vector<double> diagonal;
    std::vector<double> off_diagonal;

    std::size_t size() const { return diagonal.size(); }
    Eigen::MatrixXd dense() const;
    double quadratic_form(std::span<const double> x) const;
};

/// Q with f.Q.f = sum_{k=0}^{n+1} (f(k) - f(k-1))^2: diagonal 2, off-diagonal -1.
SymmetricTridiagonal second_order_matrix(std::size_t n);

struct OptimizationResult {
    CoefficientProfile profile;
    double objective_value = 0.0;
    ObjectiveKind objective_kind = ObjectiveKind::second_order;
    Endpoints endpoints = Endpoints::free;
    int iterations = 0;
    bool converged = false;
    std::optional<double> linear_objective{};     // same objective on profile_linear(n)
    std::optional<double> improvement_vs_linear{};  // 1 - objective / linear; empty for n < 2
};

/// Ground state of the second-order objective. With Endpoints::free this is
/// profile_sine(n).
OptimizationResult optimize_second_order(std::size_t n, Endpoints endpoints = Endpoints::free);

struct DescentOptions {
    Endpoints endpoints = Endpoints::free;
    int max_iterations = 20000;
    double fd_step = 1e-6;
    double armijo = 1e-4;
    double relative_tolerance = 1e-10;
    int stall_window = 50;
    int perturbed_starts = 3;
    double perturbation = 0.2;
    bool allow_negative = false;  // drop the f >= 0 restriction
};

/// Objective value of `p` for the given kind; CZ uses the same profile on both registers.
double objective_value(const CoefficientProfile& p, ObjectiveKind kind, const InputEnsemble& e);

/// Projected gradient descent over unit-norm profiles with central-difference
/// gradients, started from linear, sine, uniform and seeded perturbations.
OptimizationResult optimize_exact(std::size_t n, const InputEnsemble& e, ObjectiveKind kind,
                                  std::uint64_t seed, const DescentOptions& options = {});

/// Result of optimizing separate profiles for the two CZ registers.
struct PairOptimizationResult {
    CoefficientProfile profile;
    CoefficientProfile profile2;
    double objective_value = 0.0;
    int iterations = 0;
    bool converged = false;
    double improvement_vs_linear = 0.0;
};

PairOptimizationResult optimize_exact_cz_independent(std::size_t n, const InputEnsemble& e,
                                                     std::uint64_t seed,
                                                     const DescentOptions& options = {});

/// Optimized CZ improvement over the linear profile next to the two readings
/// of the quoted figure: additive per-teleport errors and multiplied fidelities.
struct CzImprovementReport {
    std::size_t n = 0;
    Endpoints endpoints = Endpoints::free;
    double linear_error = 0.0;
    double optimized_error = 0.0;
    double measured_improvement = 0.0;
    double single_improvement = 0.0;       // single-teleport improvement at the same n
    double additive_reading = 0.0;         // 1 - pi^2/12
    double multiplicative_reading = 0.0;   // 1 - (pi^2/12)^2
    bool converged = false;
    std::vector<double> optimized_profile;  // f(0..n) of the CZ optimum
};

CzImprovementReport cz_improvement_report(std::size_t n, const InputEnsemble& e, std::uint64_t seed,
                                          const DescentOptions& options = {});

}  // namespace hifi
