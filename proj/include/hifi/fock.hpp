#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hifi {

using Complex = std::complex<double>;

/// Thrown when an expansion would exceed the configured number of basis terms.
class BasisCapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Limits shared by all state-producing operations.
struct FockLimits {
    double prune_threshold = 1e-14;
    std::size_t basis_cap = 10'000'000;
};

/// Photon counts per optical mode. Ordered lexicographically so that it can
/// key a std::map and give a canonical term order.
class OccupationVector {
public:
    OccupationVector() = default;
    explicit OccupationVector(std::vector<std::uint8_t> counts);
    OccupationVector(std::initializer_list<int> counts);

    static OccupationVector vacuum(std::size_t modes);

    std::size_t size() const { return counts_.size(); }
    std::size_t total() const { return total_; }
    std::uint8_t operator[](std::size_t mode) const { return counts_[mode]; }
    std::span<const std::uint8_t> counts() const { return counts_; }

    OccupationVector with(std::size_t mode, std::uint8_t count) const;
    /// Sub-vector over the listed modes, in the listed order.
    OccupationVector select(std::span<const std::size_t> modes) const;
    /// Drops the listed modes, keeping the remaining ones in order.
    OccupationVector remove(std::span<const std::size_t> modes) const;
    OccupationVector concat(const OccupationVector& other) const;

    std::string to_string(char sep = ',') const;

    friend auto operator<=>(const OccupationVector& a, const OccupationVector& b) {
        return a.counts_ <=> b.counts_;
    }
    friend bool operator==(const OccupationVector& a, const OccupationVector& b) {
        return a.counts_ == b.counts_;
    }

private:
    std::vector<std::uint8_t> counts_;
    std::size_t total_ = 0;
};

/// Sparse superposition of Fock basis states over a fixed number of modes.
class FockState {
public:
    using Terms = std::map<OccupationVector, Complex>;

    FockState() = default;
    explicit FockState(std::size_t mode_count);
    FockState(std::size_t mode_count, Terms terms);

    static FockState basis(const OccupationVector& occupation);
    static FockState vacuum(std::size_t modes) { return basis(OccupationVector::vacuum(modes)); }

    std::size_t mode_count() const { return mode_count_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    const Terms& terms() const { return terms_; }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    /// Amplitude of a basis state; zero if absent.
    Complex amplitude(const OccupationVector& occupation) const;

    /// Adds `value` to the amplitude of `occupation`.
    void add(const OccupationVector& occupation, Complex value);

    double norm_squared() const;
    FockState normalized() const;
    FockState scaled(Complex factor) const;
    FockState pruned(double threshold) const;

    /// True when every term carries exactly `photons` photons.
    bool has_photon_number(std::size_t photons) const;

private:
    std::size_t mode_count_ = 0;
    Terms terms_;
};

/// m x m unitary acting on creation operators: a_l^dag -> sum_p U(p,l) a_p^dag.
class ModeUnitary {
public:
    explicit ModeUnitary(Eigen::MatrixXcd entries, double tolerance = 1e-12);

    std::size_t dimension() const { return static_cast<std::size_t>(entries_.rows()); }
    const Eigen::MatrixXcd& entries() const { return entries_; }
    Complex operator()(std::size_t p, std::size_t l) const { return entries_(p, l); }
    ModeUnitary adjoint() const { return ModeUnitary(entries_.adjoint()); }

private:
    Eigen::MatrixXcd entries_;
};

/// Reduced state of a subset of modes, with the occupation label of each row.
struct DensityMatrix {
    std::vector<OccupationVector> basis;
    Eigen::MatrixXcd entries;

    std::size_t dimension() const { return basis.size(); }
    double trace() const { return entries.trace().real(); }
    double purity() const;
    /// Throws std::logic_error if Hermiticity, unit trace or PSD fail.
    void check_invariants() const;
};

FockState tensor(const FockState& a, const FockState& b, const FockLimits& limits = {});

/// Entry (p,l) = exp(2 pi i p l / m) / sqrt(m).
ModeUnitary dft_unitary(std::size_t m);

/// Lifts `u` to the multi-photon space on the listed modes.
FockState apply_mode_unitary(const FockState& state, const ModeUnitary& u,
                             std::span<const std::size_t> modes,
                             const FockLimits& limits = {});

/// Multiplies each term by exp(i * phase * n_mode).
FockState phase_shift(const FockState& state, std::size_t mode, double phase);

/// Moves the occupation at modes[i] to modes[i+1]; the last wraps to the first.
FockState cyclic_shift(const FockState& state, std::span<const std::size_t> modes);

/// Reorders modes: output mode i takes input mode order[i]. `order` must be a permutation.
FockState permute_modes(const FockState& state, std::span<const std::size_t> order);

struct MeasurementOutcome {
    OccupationVector pattern;  // counts on the measured modes, in listed order
    double probability = 0.0;
    FockState post_state;      // normalized, measured modes removed
};

/// Projective photon-number measurement; outcomes in lexicographic pattern order.
std::vector<MeasurementOutcome> measure_photon_numbers(const FockState& state,
                                                       std::span<const std::size_t> modes,
                                                       double min_probability = 1e-14);

/// <a|b>, conjugate-linear in `a`.
Complex inner_product(const FockState& a, const FockState& b);

DensityMatrix reduced_density_matrix(const FockState& state,
                                     std::span<const std::size_t> keep,
                                     std::size_t basis_cap = 4096);

/// Best rank-one split of a state across `keep` and its complement. The phase
/// is fixed so that the largest amplitude of `rest` is real and positive.
struct Factorization {
    FockState kept;       // normalized, on the kept modes in listed order
    FockState rest;       // normalized, on the complement modes in order
    double deviation = 0; // max-abs difference between the state and kept (x) rest
};

Factorization factor_out(const FockState& state, std::span<const std::size_t> keep);

/// Largest |a_s - b_s| over the union of supports.
double max_abs_difference(const FockState& a, const FockState& b);

/// Largest |a_s - e^{i theta} b_s| with theta = arg <b|a>.
double max_abs_difference_up_to_phase(const FockState& a, const FockState& b);

}  // namespace hifi
