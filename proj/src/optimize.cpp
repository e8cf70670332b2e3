#include "hifi/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

namespace hifi {

namespace {

// Parameter vector layout: `blocks` consecutive blocks, one per register
// profile. A block holds f(0..n) (free) or f(1..n-1) (pinned).
struct Layout {
    std::size_t n;
    Endpoints endpoints;
    std::size_t blocks;

    std::size_t block_size() const { return endpoints == Endpoints::free ? n + 1 : n - 1; }
    std::size_t offset() const { return endpoints == Endpoints::free ? 0 : 1; }
    std::size_t size() const { return blocks * block_size(); }

    std::vector<double> full_block(const std::vector<double>& x, std::size_t b) const {
        std::vector<double> f(n + 1, 0.0);
        for (std::size_t i = 0; i < block_size(); ++i) f[offset() + i] = x[b * block_size() + i];
        return f;
    }

    void set_block(std::vector<double>& x, std::size_t b, std::span<const double> f) const {
        for (std::size_t i = 0; i < block_size(); ++i) x[b * block_size() + i] = f[offset() + i];
    }
};

using Objective = std::function<double(const std::vector<CoefficientProfile>&)>;

struct DescentRun {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

class ProjectedDescent {
public:
    ProjectedDescent(Layout layout, Objective objective, const DescentOptions& options)
        : layout_(layout), objective_(std::move(objective)), options_(options) {}

    std::vector<double> project(std::vector<double> x) const {
        if (!options_.allow_negative) {
            for (double& v : x) v = std::max(v, 0.0);
        }
        const std::size_t bs = layout_.block_size();
        for (std::size_t b = 0; b < layout_.blocks; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < bs; ++i) s += x[b * bs + i] * x[b * bs + i];
            if (s <= 0.0) continue;
            const double scale = 1.0 / std::sqrt(s);
            for (std::size_t i = 0; i < bs; ++i) x[b * bs + i] *= scale;
        }
        return x;
    }

    std::vector<CoefficientProfile> profiles(const std::vector<double>& x) const {
        std::vector<CoefficientProfile> out;
        for (std::size_t b = 0; b < layout_.blocks; ++b) {
            out.push_back(CoefficientProfile::normalize(layout_.full_block(x, b), ProfileLabel::optimized));
        }
        return out;
    }

    // Objective on the direction of x: each block is rescaled to unit norm.
    double evaluate(const std::vector<double>& x) const {
        try {
            return objective_(profiles(x));
        } catch (const std::invalid_argument&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    DescentRun run(const std::vector<double>& start) const {
        DescentRun r;
        r.x = project(start);
        r.value = evaluate(r.x);
        std::vector<double> history{r.value};
        double step = 1.0;
        const std::size_t d = r.x.size();
        std::vector<double> grad(d);
        for (int it = 1; it <= options_.max_iterations; ++it) {
            for (std::size_t i = 0; i < d; ++i) {
                std::vector<double> up = r.x;
                std::vector<double> down = r.x;
                up[i] += options_.fd_step;
                down[i] -= options_.fd_step;
                grad[i] = (evaluate(up) - evaluate(down)) / (2.0 * options_.fd_step);
            }
            for (double t = step; t > 1e-30; t *= 0.5) {
                std::vector<double> trial = r.x;
                for (std::size_t i = 0; i < d; ++i) trial[i] -= t * grad[i];
                trial = project(std::move(trial));
                const double value = evaluate(trial);
                double decrease = 0.0;
                for (std::size_t i = 0; i < d; ++i) decrease += grad[i] * (trial[i] - r.x[i]);
                if (value <= r.value + options_.armijo * decrease) {
                    r.x = std::move(trial);
                    r.value = value;
                    step = std::min(2.0 * t, 1e8);
                    break;
                }
            }
            history.push_back(r.value);
            r.iterations = it;
            if (it >= options_.stall_window) {
                const double before = history[history.size() - 1 - static_cast<std::size_t>(options_.stall_window)];
                const double scale = std::max(std::abs(r.value), std::numeric_limits<double>::min());
                if (std::abs(before - r.value) / scale < options_.relative_tolerance) {
                    r.converged = true;
                    break;
                }
            }
        }
        return r;
    }

private:
    Layout layout_;
    Objective objective_;
    DescentOptions options_;
};

// Lowest objective wins; equal objectives fall back to lexicographic order of x.
const DescentRun& best_run(const std::vector<DescentRun>& runs) {
    return *std::min_element(runs.begin(), runs.end(), [](const DescentRun& a, const DescentRun& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.x < b.x;
    });
}

std::vector<std::vector<double>> starting_points(const Layout& layout, std::uint64_t seed,
                                                 const DescentOptions& options) {
    const std::size_t n = layout.n;
    const CoefficientProfile sine_profile = profile_sine(n);
    const std::vector<double> sine(sine_profile.values().begin(), sine_profile.values().end());
    std::vector<std::vector<double>> bases;
    if (n >= 2) {
        const CoefficientProfile lin = profile_linear(n);
        bases.emplace_back(lin.values().begin(), lin.values().end());
    }
    bases.push_back(sine);
    bases.emplace_back(n + 1, 1.0);

    std::vector<std::vector<double>> starts;
    for (const auto& base : bases) {
        std::vector<double> x(layout.size());
        for (std::size_t b = 0; b < layout.blocks; ++b) layout.set_block(x, b, base);
        starts.push_back(std::move(x));
    }
    std::mt19937_64 rng(seed);
    const double amplitude = options.perturbation / std::sqrt(static_cast<double>(n + 1));
    for (int s = 0; s < options.perturbed_starts; ++s) {
        std::vector<double> x(layout.size());
        for (std::size_t b = 0; b < layout.blocks; ++b) layout.set_block(x, b, sine);
        for (double& v : x) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            v += amplitude * (2.0 * u - 1.0);
        }
        starts.push_back(std::move(x));
    }
    return starts;
}

Objective make_objective(ObjectiveKind kind, std::vector<EnsembleSample> samples) {
    switch (kind) {
        case ObjectiveKind::second_order:
            return [](const std::vector<CoefficientProfile>& p) { return average_error_second_order(p[0]); };
        case ObjectiveKind::exact_single:
            return [samples = std::move(samples)](const std::vector<CoefficientProfile>& p) {
                return average_error_exact(p[0], samples);
            };
        case ObjectiveKind::exact_cz:
            return [samples = std::move(samples)](const std::vector<CoefficientProfile>& p) {
                return cz_average_error_factored(p[0], p.size() > 1 ? p[1] : p[0], samples);
            };
    }
    throw std::invalid_argument("unknown objective kind");
}

void require_pinnable(std::size_t n, Endpoints endpoints) {
    if (endpoints == Endpoints::pinned && n < 2) {
        throw std::invalid_argument("pinned endpoints need n >= 2");
    }
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::second_order: return "second-order";
        case ObjectiveKind::exact_single: return "exact";
        case ObjectiveKind::exact_cz: return "exact-cz";
    }
    return "unknown";
}

std::string_view to_string(Endpoints endpoints) {
    return endpoints == Endpoints::free ? "free" : "pinned";
}

Eigen::MatrixXd SymmetricTridiagonal::dense() const {
    const auto m = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        q(i, i) = diagonal[static_cast<std::size_t>(i)];
        if (i + 1 < m) {
            q(i, i + 1) = off_diagonal[static_cast<std::size_t>(i)];
            q(i + 1, i) = off_diagonal[static_cast<std::size_t>(i)];
        }
    }
    return q;
}

double SymmetricTridiagonal::quadratic_form(std::span<const double> x) const {
    if (x.size() != size()) throw std::invalid_argument("quadratic_form: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        s += diagonal[i] * x[i] * x[i];
        if (i + 1 < size()) s += 2.0 * off_diagonal[i] * x[i] * x[i + 1];
    }
    return s;
}

SymmetricTridiagonal second_order_matrix(std::size_t n) {
    if (n < 1) throw std::invalid_argument("second_order_matrix requires n >= 1");
    return {std::vector<double>(n + 1, 2.0), std::vector<double>(n, -1.0)};
}

double objective_value(const CoefficientProfile& p, ObjectiveKind kind, const InputEnsemble& e) {
    return make_objective(kind, ensemble_samples(e))({p});
}

OptimizationResult optimize_second_order(std::size_t n, Endpoints endpoints) {
    require_pinnable(n, endpoints);
    const SymmetricTridiagonal full = second_order_matrix(n);
    const Layout layout{n, endpoints, 1};
    const std::size_t m = layout.block_size();

    // Pinned endpoints restrict Q to its interior rows and columns, which is
    // the same tridiagonal pattern on n-1 sites.
    Eigen::VectorXd diag(static_cast<Eigen::Index>(m));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(m > 0 ? m - 1 : 0));
    for (std::size_t i = 0; i < m; ++i) diag(static_cast<Eigen::Index>(i)) = full.diagonal[i + layout.offset()];
    for (std::size_t i = 0; i + 1 < m; ++i) sub(static_cast<Eigen::Index>(i)) = full.off_diagonal[i + layout.offset()];

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw std::runtime_error("tridiagonal eigensolver failed");

    Eigen::VectorXd ground = solver.eigenvectors().col(0);
    if (ground.sum() < 0.0) ground = -ground;
    std::vector<double> x(ground.data(), ground.data() + ground.size());
    for (double& v : x) v = std::max(v, 0.0);

    OptimizationResult r{.profile = CoefficientProfile::normalize(layout.full_block(x, 0), ProfileLabel::optimized)};
    r.objective_kind = ObjectiveKind::second_order;
    r.endpoints = endpoints;
    r.objective_value = average_error_second_order(r.profile);
    r.iterations = 1;
    r.converged = true;
    if (n >= 2) {
        r.linear_objective = average_error_second_order(profile_linear(n));
        r.improvement_vs_linear = 1.0 - r.objective_value / *r.linear_objective;
    }
    return r;
}

OptimizationResult optimize_exact(std::size_t n, const InputEnsemble& e, ObjectiveKind kind,
                                  std::uint64_t seed, const DescentOptions& options) {
    if (n < 2) throw std::invalid_argument("optimize_exact requires n >= 2");
    const Layout layout{n, options.endpoints, 1};
    const Objective objective = make_objective(kind, ensemble_samples(e));
    const ProjectedDescent descent(layout, objective, options);

    std::vector<DescentRun> runs;
    for (const auto& start : starting_points(layout, seed, options)) runs.push_back(descent.run(start));
    const DescentRun& best = best_run(runs);

    OptimizationResult r{.profile = descent.profiles(best.x)[0]};
    r.objective_kind = kind;
    r.endpoints = options.endpoints;
    r.objective_value = best.value;
    r.iterations = best.iterations;
    r.converged = best.converged;
    r.linear_objective = objective({profile_linear(n)});
    r.improvement_vs_linear = 1.0 - r.objective_value / *r.linear_objective;
    return r;
}

PairOptimizationResult optimize_exact_cz_independent(std::size_t n, const InputEnsemble& e,
                                                     std::uint64_t seed,
                                                     const DescentOptions& options) {
    if (n < 2) throw std::invalid_argument("optimize_exact requires n >= 2");
    const Layout layout{n, options.endpoints, 2};
    const Objective objective = make_objective(ObjectiveKind::exact_cz, ensemble_samples(e));
    const ProjectedDescent descent(layout, objective, options);

    std::vector<DescentRun> runs;
    for (const auto& start : starting_points(layout, seed, options)) runs.push_back(descent.run(start));
    const DescentRun& best = best_run(runs);
    const auto profiles = descent.profiles(best.x);

    PairOptimizationResult r{.profile = profiles[0], .profile2 = profiles[1]};
    r.objective_value = best.value;
    r.iterations = best.iterations;
    r.converged = best.converged;
    const CoefficientProfile lin = profile_linear(n);
    r.improvement_vs_linear = 1.0 - r.objective_value / objective({lin, lin});
    return r;
}

CzImprovementReport cz_improvement_report(std::size_t n, const InputEnsemble& e, std::uint64_t seed,
                                          const DescentOptions& options) {
    const OptimizationResult cz = optimize_exact(n, e, ObjectiveKind::exact_cz, seed, options);
    const OptimizationResult single = optimize_exact(n, e, ObjectiveKind::exact_single, seed, options);
    const double ratio = std::numbers::pi * std::numbers::pi / 12.0;

    CzImprovementReport r;
    r.n = n;
    r.endpoints = options.endpoints;
    r.linear_error = *cz.linear_objective;
    r.optimized_error = cz.objective_value;
    r.measured_improvement = *cz.improvement_vs_linear;
    r.single_improvement = *single.improvement_vs_linear;
    r.additive_reading = 1.0 - ratio;
    r.multiplicative_reading = 1.0 - ratio * ratio;
    r.converged = cz.converged && single.converged;
    r.optimized_profile.assign(cz.profile.values().begin(), cz.profile.values().end());
    return r;
}

}  // namespace hifi
