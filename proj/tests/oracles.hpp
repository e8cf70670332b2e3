#pragma once

// Test-only reference implementations, independent of the library's
// multinomial expansion.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hifi/fock.hpp"
#include "hifi/protocol.hpp"

namespace oracle {

using hifi::Complex;
using hifi::OccupationVector;

/// Permanent by summing over all permutations; fine for size <= 8.
inline Complex permanent(const Eigen::MatrixXcd& a) {
    const auto n = static_cast<std::size_t>(a.rows());
    if (n == 0) return 1.0;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Complex total = 0.0;
    do {
        Complex term = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            term *= a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
        }
        total += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

/// <t| U |s> for a_l^dag -> sum_p U(p,l) a_p^dag:
/// Perm(U[rows repeated by t, cols repeated by s]) / sqrt(prod s! prod t!).
inline Complex transition_amplitude(const Eigen::MatrixXcd& u, const OccupationVector& s,
                                    const OccupationVector& t) {
    if (s.total() != t.total()) return 0.0;
    std::vector<Eigen::Index> rows;
    std::vector<Eigen::Index> cols;
    double norm = 1.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (int r = 0; r < t[i]; ++r) rows.push_back(static_cast<Eigen::Index>(i));
        norm *= factorial(t[i]);
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (int r = 0; r < s[i]; ++r) cols.push_back(static_cast<Eigen::Index>(i));
        norm *= factorial(s[i]);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXcd sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = u(rows[static_cast<std::size_t>(i)],
                                                          cols[static_cast<std::size_t>(j)]);
    }
    return permanent(sub) / std::sqrt(norm);
}

/// All occupation vectors on m modes with exactly `photons` photons, lexicographic.
inline std::vector<OccupationVector> basis_with_total(std::size_t m, int photons) {
    std::vector<OccupationVector> out;
    std::vector<std::uint8_t> counts(m, 0);
    auto rec = [&](auto&& self, std::size_t mode, int left) -> void {
        if (mode + 1 == m) {
            counts[mode] = static_cast<std::uint8_t>(left);
            out.emplace_back(counts);
            return;
        }
        for (int c = left; c >= 0; --c) {
            counts[mode] = static_cast<std::uint8_t>(c);
            self(self, mode + 1, left - c);
        }
    };
    if (m == 0) return out;
    rec(rec, 0, photons);
    std::sort(out.begin(), out.end());
    return out;
}

/// Basis states on m modes with total photons in [0, max_photons].
inline std::vector<OccupationVector> basis_up_to(std::size_t m, int max_photons) {
    std::vector<OccupationVector> out;
    for (int k = 0; k <= max_photons; ++k) {
        auto b = basis_with_total(m, k);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

inline double uniform53(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double gaussian(std::mt19937_64& rng) {
    // Box-Muller on the explicit 53-bit uniform, portable across standard libraries.
    const double u1 = 1.0 - uniform53(rng);
    const double u2 = uniform53(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Haar-ish random unitary from QR of a complex Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::MatrixXcd z(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = Complex(gaussian(rng), gaussian(rng));
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ();
    return q;
}

/// Normalized random superposition over the given basis.
inline hifi::FockState random_state(std::size_t m, const std::vector<OccupationVector>& basis,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    hifi::FockState s(m);
    for (const auto& b : basis) s.add(b, Complex(gaussian(rng), gaussian(rng)));
    return s.normalized();
}

/// Random qubit with a nontrivial relative phase.
inline hifi::QubitAmplitudes random_qubit(std::mt19937_64& rng) {
    const double p0 = uniform53(rng);
    const double phase = 2.0 * M_PI * uniform53(rng);
    return hifi::QubitAmplitudes::normalize(std::sqrt(p0), std::polar(std::sqrt(1.0 - p0), phase));
}

/// Max |a_i - e^{i theta} b_i| with the phase aligned on the largest overlap.
inline double qubit_distance_up_to_phase(const hifi::QubitAmplitudes& a,
                                         const hifi::QubitAmplitudes& b) {
    const Complex ov = std::conj(b.a0()) * a.a0() + std::conj(b.a1()) * a.a1();
    const Complex ph = std::abs(ov) > 0 ? ov / std::abs(ov) : Complex(1.0);
    return std::max(std::abs(a.a0() - ph * b.a0()), std::abs(a.a1() - ph * b.a1()));
}

inline double two_qubit_distance_up_to_phase(const hifi::TwoQubitAmplitudes& a,
                                             const hifi::TwoQubitAmplitudes& b) {
    Complex ov = 0.0;
    for (std::size_t i = 0; i < 4; ++i) ov += std::conj(b[i]) * a[i];
    const Complex ph = std::abs(ov) > 0 ? ov / std::abs(ov) : Complex(1.0);
    double d = 0.0;
    for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(a[i] - ph * b[i]));
    return d;
}

}  // namespace oracle
