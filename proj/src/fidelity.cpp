#include "hifi/fidelity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hifi {

namespace {

double legendre_with_derivative(int order, double x, double& derivative) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    derivative = order * (x * p1 - p0) / (x * x - 1.0);
    return p1;
}

// Success-weighted probability sum_k Pr(k) P_S(k) for one branch structure:
// Pr(k) P_S(k) = (P0 f(k) + P1 f(k-1))^2.
double teleport_success(double p0, const CoefficientProfile& p) {
    const double p1 = 1.0 - p0;
    const long n = static_cast<long>(p.n());
    double total = 0.0;
    for (long k = 0; k <= n + 1; ++k) {
        const double pr = p0 * p(k) * p(k) + p1 * p(k - 1) * p(k - 1);
        if (pr <= 0.0) continue;
        const double amp = p0 * p(k) + p1 * p(k - 1);
        total += amp * amp;
    }
    return total;
}

}  // namespace

QuadratureRule gauss_legendre_unit(int order) {
    if (order < 2) throw std::invalid_argument("quadrature order must be >= 2");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            const double p = legendre_with_derivative(order, x, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        legendre_with_derivative(order, x, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(order - 1 - i);
        rule.nodes[lo] = 0.5 * (1.0 - x);
        rule.nodes[hi] = 0.5 * (1.0 + x);
        rule.weights[lo] = 0.5 * w;
        rule.weights[hi] = 0.5 * w;
    }
    return rule;
}

std::vector<EnsembleSample> ensemble_samples(const InputEnsemble& e) {
    switch (e.kind) {
        case EnsembleKind::fixed: return {{e.input.p0(), 1.0}};
        case EnsembleKind::basis_pair: return {{1.0, 0.5}, {0.0, 0.5}};
        case EnsembleKind::uniform_p0: {
            const QuadratureRule rule = gauss_legendre_unit(e.quadrature_order);
            std::vector<EnsembleSample> out;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                out.push_back({rule.nodes[i], rule.weights[i]});
            }
            return out;
        }
    }
    throw std::invalid_argument("unknown ensemble kind");
}

double success_probability_exact(const QubitAmplitudes& q, const CoefficientProfile& p, long k) {
    const long n = static_cast<long>(p.n());
    if (k < 0 || k > n + 1) throw std::out_of_range("branch k outside 0..n+1");
    const double fk = p(k);
    const double fk1 = p(k - 1);
    const double denom = q.p0() * fk * fk + q.p1() * fk1 * fk1;
    if (denom <= 0.0) throw std::domain_error("branch k has zero probability");
    const double num = q.p0() * fk + q.p1() * fk1;
    return std::min(1.0, num * num / denom);
}

bool second_order_applicable(const CoefficientProfile& p, long k) { return p(k) != 0.0; }

double success_probability_second_order(const QubitAmplitudes& q, const CoefficientProfile& p, long k) {
    if (!second_order_applicable(p, k)) return success_probability_exact(q, p, k);
    const double eps = (p(k) - p(k - 1)) / p(k);
    return 1.0 - q.p0() * q.p1() * eps * eps;
}

std::vector<double> outcome_distribution(const QubitAmplitudes& q, const CoefficientProfile& p) {
    const long n = static_cast<long>(p.n());
    std::vector<double> pr(static_cast<std::size_t>(n + 2));
    for (long k = 0; k <= n + 1; ++k) {
        pr[static_cast<std::size_t>(k)] = q.p0() * p(k) * p(k) + q.p1() * p(k - 1) * p(k - 1);
    }
    return pr;
}

double average_error_exact(const CoefficientProfile& p, const InputEnsemble& e) {
    return average_error_exact(p, ensemble_samples(e));
}

double average_error_exact(const CoefficientProfile& p, std::span<const EnsembleSample> samples) {
    const long n = static_cast<long>(p.n());
    double err = 0.0;
    for (const auto& [p0, weight] : samples) {
        const QubitAmplitudes q(std::sqrt(p0), std::sqrt(1.0 - p0));
        const std::vector<double> pr = outcome_distribution(q, p);
        double branch_err = 0.0;
        for (long k = 0; k <= n + 1; ++k) {
            const double prk = pr[static_cast<std::size_t>(k)];
            if (prk <= 0.0) continue;
            branch_err += prk * (1.0 - success_probability_exact(q, p, k));
        }
        err += weight * branch_err;
    }
    return err;
}

double average_error_second_order(const CoefficientProfile& p) {
    const long n = static_cast<long>(p.n());
    double sum = 0.0;
    for (long k = 0; k <= n + 1; ++k) {
        const double d = p(k) - p(k - 1);
        sum += d * d;
    }
    return sum / 6.0;
}

std::optional<double> continuum_error(const CoefficientProfile& p) {
    const double n = static_cast<double>(p.n());
    switch (p.label()) {
        case ProfileLabel::linear: return 2.0 / (n * n);
        case ProfileLabel::sine:
        case ProfileLabel::optimized: return std::numbers::pi * std::numbers::pi / (6.0 * n * n);
        default: return std::nullopt;
    }
}

double klm_failure_probability(std::size_t n) {
    if (n < 1) throw std::invalid_argument("klm_failure_probability requires n >= 1");
    return 1.0 / static_cast<double>(n + 1);
}

double cz_average_error_exact(const CoefficientProfile& p, const CoefficientProfile& p2,
                              const InputEnsemble& e) {
    if (p.n() != p2.n()) throw std::invalid_argument("cz profiles must have the same n");
    const long n = static_cast<long>(p.n());
    const std::vector<EnsembleSample> samples = ensemble_samples(e);
    double success = 0.0;
    for (const auto& [a, wa] : samples) {
        const double a0 = std::sqrt(a);
        const double a1 = std::sqrt(1.0 - a);
        for (const auto& [b, wb] : samples) {
            const double b0 = std::sqrt(b);
            const double b1 = std::sqrt(1.0 - b);
            // Ideal output CZ(q x q') = (a0 b0, a0 b1, a1 b0, -a1 b1); branch
            // amplitude vector (unnormalized) from the corrected gate output.
            double branch_sum = 0.0;
            for (long k = 0; k <= n + 1; ++k) {
                for (long k2 = 0; k2 <= n + 1; ++k2) {
                    const double v00 = a0 * b0 * p(k) * p2(k2);
                    const double v01 = a0 * b1 * p(k) * p2(k2 - 1);
                    const double v10 = a1 * b0 * p(k - 1) * p2(k2);
                    const double v11 = -a1 * b1 * p(k - 1) * p2(k2 - 1);
                    const double overlap = a0 * b0 * v00 + a0 * b1 * v01 + a1 * b0 * v10 - a1 * b1 * v11;
                    branch_sum += overlap * overlap;
                }
            }
            success += wa * wb * branch_sum;
        }
    }
    return 1.0 - success;
}

double cz_average_error_factored(const CoefficientProfile& p, const CoefficientProfile& p2,
                                 const InputEnsemble& e) {
    return cz_average_error_factored(p, p2, ensemble_samples(e));
}

double cz_average_error_factored(const CoefficientProfile& p, const CoefficientProfile& p2,
                                 std::span<const EnsembleSample> samples) {
    if (p.n() != p2.n()) throw std::invalid_argument("cz profiles must have the same n");
    double s1 = 0.0;
    double s2 = 0.0;
    for (const auto& [p0, w] : samples) {
        s1 += w * teleport_success(p0, p);
        s2 += w * teleport_success(p0, p2);
    }
    return 1.0 - s1 * s2;
}

ErrorReport error_report(const CoefficientProfile& p, const InputEnsemble& e) {
    ErrorReport r;
    r.n = p.n();
    r.profile_label = p.label();
    r.exact_error = average_error_exact(p, e);
    r.second_order_error = average_error_second_order(p);
    r.continuum_error = continuum_error(p);
    r.klm_failure = klm_failure_probability(p.n());
    r.scaled = r.exact_error * static_cast<double>(r.n * r.n);
    return r;
}

QubitAmplitudes teleport_output_formula(const QubitAmplitudes& q, const CoefficientProfile& p, long k) {
    return QubitAmplitudes::normalize(q.a0() * p(k), q.a1() * p(k - 1));
}

TwoQubitAmplitudes cz_output_formula(const QubitAmplitudes& q, const QubitAmplitudes& q2,
                                     const CoefficientProfile& p, const CoefficientProfile& p2,
                                     long k, long k2) {
    TwoQubitAmplitudes v{q.a0() * q2.a0() * p(k) * p2(k2), q.a0() * q2.a1() * p(k) * p2(k2 - 1),
                         q.a1() * q2.a0() * p(k - 1) * p2(k2),
                         -q.a1() * q2.a1() * p(k - 1) * p2(k2 - 1)};
    double s = 0.0;
    for (const Complex& x : v) s += std::norm(x);
    if (s <= 0.0) throw std::domain_error("branch (k, k') has zero probability");
    for (Complex& x : v) x /= std::sqrt(s);
    return v;
}

std::array<double, 4> cz_uncorrected_signs(long k, long k2) {
    const auto sign = [](long e) { return (e % 2 == 0) ? 1.0 : -1.0; };
    const double global = sign(k * k2);
    return {global, global * sign(k), global * sign(k2), global * sign(k + k2 + 1)};
}

}  // namespace hifi
