#include "hifi/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace hifi {

namespace {

void check_modes(std::span<const std::size_t> modes, std::size_t mode_count) {
    std::vector<bool> seen(mode_count, false);
    for (std::size_t m : modes) {
        if (m >= mode_count) {
            throw std::out_of_range("mode index " + std::to_string(m) + " out of range for " +
                                    std::to_string(mode_count) + " modes");
        }
        if (seen[m]) {
            throw std::invalid_argument("duplicate mode index " + std::to_string(m));
        }
        seen[m] = true;
    }
}

std::vector<std::size_t> complement(std::span<const std::size_t> modes, std::size_t mode_count) {
    std::vector<bool> in(mode_count, false);
    for (std::size_t m : modes) in[m] = true;
    std::vector<std::size_t> out;
    for (std::size_t m = 0; m < mode_count; ++m) {
        if (!in[m]) out.push_back(m);
    }
    return out;
}

double sqrt_factorial(unsigned n) {
    return std::sqrt(std::tgamma(static_cast<double>(n) + 1.0));
}

using Expansion = std::vector<std::pair<OccupationVector, Complex>>;

// Output amplitudes of prod_l (sum_p u(p,l) a_p^dag)^{s_l} / sqrt(s_l!) |0>.
Expansion expand_creation_polynomial(const OccupationVector& input, const ModeUnitary& u,
                                     const FockLimits& limits) {
    const std::size_t m = u.dimension();
    std::map<OccupationVector, Complex> poly{{OccupationVector::vacuum(m), Complex{1.0, 0.0}}};
    double input_norm = 1.0;
    for (std::size_t l = 0; l < m; ++l) {
        input_norm *= sqrt_factorial(input[l]);
        for (unsigned photon = 0; photon < input[l]; ++photon) {
            std::map<OccupationVector, Complex> next;
            for (const auto& [mono, coef] : poly) {
                for (std::size_t p = 0; p < m; ++p) {
                    const Complex upl = u(p, l);
                    if (upl == Complex{}) continue;
                    next[mono.with(p, static_cast<std::uint8_t>(mono[p] + 1))] += coef * upl;
                }
            }
            if (next.size() > limits.basis_cap) {
                throw BasisCapExceeded("mode-unitary expansion exceeds basis cap of " +
                                       std::to_string(limits.basis_cap) + " terms");
            }
            poly = std::move(next);
        }
    }
    Expansion out;
    out.reserve(poly.size());
    for (const auto& [mono, coef] : poly) {
        double creation_norm = 1.0;
        for (std::size_t p = 0; p < m; ++p) creation_norm *= sqrt_factorial(mono[p]);
        const Complex amp = coef * (creation_norm / input_norm);
        if (std::abs(amp) >= limits.prune_threshold) out.emplace_back(mono, amp);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// OccupationVector

OccupationVector::OccupationVector(std::vector<std::uint8_t> counts)
    : counts_(std::move(counts)),
      total_(std::accumulate(counts_.begin(), counts_.end(), std::size_t{0})) {}

OccupationVector::OccupationVector(std::initializer_list<int> counts) {
    counts_.reserve(counts.size());
    for (int c : counts) {
        if (c < 0 || c > 255) throw std::invalid_argument("photon count out of range");
        counts_.push_back(static_cast<std::uint8_t>(c));
        total_ += static_cast<std::size_t>(c);
    }
}

OccupationVector OccupationVector::vacuum(std::size_t modes) {
    return OccupationVector(std::vector<std::uint8_t>(modes, 0));
}

OccupationVector OccupationVector::with(std::size_t mode, std::uint8_t count) const {
    OccupationVector out = *this;
    out.total_ = out.total_ - out.counts_.at(mode) + count;
    out.counts_[mode] = count;
    return out;
}

OccupationVector OccupationVector::select(std::span<const std::size_t> modes) const {
    std::vector<std::uint8_t> sub;
    sub.reserve(modes.size());
    for (std::size_t m : modes) sub.push_back(counts_.at(m));
    return OccupationVector(std::move(sub));
}

OccupationVector OccupationVector::remove(std::span<const std::size_t> modes) const {
    std::vector<bool> drop(counts_.size(), false);
    for (std::size_t m : modes) drop.at(m) = true;
    std::vector<std::uint8_t> rest;
    rest.reserve(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (!drop[i]) rest.push_back(counts_[i]);
    }
    return OccupationVector(std::move(rest));
}

OccupationVector OccupationVector::concat(const OccupationVector& other) const {
    std::vector<std::uint8_t> joined = counts_;
    joined.insert(joined.end(), other.counts_.begin(), other.counts_.end());
    return OccupationVector(std::move(joined));
}

std::string OccupationVector::to_string(char sep) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (i) os << sep;
        os << static_cast<int>(counts_[i]);
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// FockState

FockState::FockState(std::size_t mode_count) : mode_count_(mode_count) {}

FockState::FockState(std::size_t mode_count, Terms terms)
    : mode_count_(mode_count), terms_(std::move(terms)) {
    for (const auto& [occ, amp] : terms_) {
        if (occ.size() != mode_count_) {
            throw std::invalid_argument("occupation length does not match mode count");
        }
    }
}

FockState FockState::basis(const OccupationVector& occupation) {
    FockState s(occupation.size());
    s.terms_.emplace(occupation, Complex{1.0, 0.0});
    return s;
}

Complex FockState::amplitude(const OccupationVector& occupation) const {
    auto it = terms_.find(occupation);
    return it == terms_.end() ? Complex{} : it->second;
}

void FockState::add(const OccupationVector& occupation, Complex value) {
    if (occupation.size() != mode_count_) {
        throw std::invalid_argument("occupation length does not match mode count");
    }
    terms_[occupation] += value;
}

double FockState::norm_squared() const {
    double sum = 0.0;
    for (const auto& [occ, amp] : terms_) sum += std::norm(amp);
    return sum;
}

FockState FockState::normalized() const {
    const double n2 = norm_squared();
    if (n2 <= 0.0) throw std::domain_error("cannot normalize the zero state");
    return scaled(Complex{1.0 / std::sqrt(n2), 0.0});
}

FockState FockState::scaled(Complex factor) const {
    FockState out = *this;
    for (auto& [occ, amp] : out.terms_) amp *= factor;
    return out;
}

FockState FockState::pruned(double threshold) const {
    FockState out(mode_count_);
    for (const auto& [occ, amp] : terms_) {
        if (std::abs(amp) >= threshold) out.terms_.emplace_hint(out.terms_.end(), occ, amp);
    }
    return out;
}

bool FockState::has_photon_number(std::size_t photons) const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [photons](const auto& t) { return t.first.total() == photons; });
}

// ---------------------------------------------------------------------------
// ModeUnitary / DensityMatrix

ModeUnitary::ModeUnitary(Eigen::MatrixXcd entries, double tolerance) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("mode unitary must be a non-empty square matrix");
    }
    const Eigen::MatrixXcd defect =
        entries_ * entries_.adjoint() - Eigen::MatrixXcd::Identity(entries_.rows(), entries_.cols());
    if (defect.cwiseAbs().maxCoeff() > tolerance) {
        throw std::invalid_argument("matrix is not unitary within tolerance");
    }
}

double DensityMatrix::purity() const {
    return (entries * entries).trace().real();
}

void DensityMatrix::check_invariants() const {
    if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::logic_error("density matrix is not Hermitian");
    }
    if (std::abs(trace() - 1.0) > 1e-10) {
        throw std::logic_error("density matrix trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10) {
        throw std::logic_error("density matrix has a negative eigenvalue");
    }
}

// ---------------------------------------------------------------------------
// Operations

FockState tensor(const FockState& a, const FockState& b, const FockLimits& limits) {
    if (a.size() * b.size() > limits.basis_cap) {
        throw BasisCapExceeded("tensor product exceeds basis cap of " +
                               std::to_string(limits.basis_cap) + " terms");
    }
    FockState::Terms terms;
    for (const auto& [oa, xa] : a) {
        for (const auto& [ob, xb] : b) {
            const Complex amp = xa * xb;
            if (std::abs(amp) >= limits.prune_threshold) terms.emplace(oa.concat(ob), amp);
        }
    }
    return FockState(a.mode_count() + b.mode_count(), std::move(terms));
}

ModeUnitary dft_unitary(std::size_t m) {
    if (m == 0) throw std::invalid_argument("dft_unitary requires m >= 1");
    Eigen::MatrixXcd u(m, m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t l = 0; l < m; ++l) {
            // Reduce p*l mod m first so large m does not lose phase accuracy.
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((p * l) % m) /
                                 static_cast<double>(m);
            u(p, l) = std::polar(scale, angle);
        }
    }
    return ModeUnitary(std::move(u));
}

FockState apply_mode_unitary(const FockState& state, const ModeUnitary& u,
                             std::span<const std::size_t> modes, const FockLimits& limits) {
    if (modes.size() != u.dimension()) {
        throw std::invalid_argument("mode list length does not match unitary dimension");
    }
    check_modes(modes, state.mode_count());

    std::map<OccupationVector, Expansion> cache;
    FockState::Terms out;
    for (const auto& [occ, amp] : state) {
        const OccupationVector sub = occ.select(modes);
        auto it = cache.find(sub);
        if (it == cache.end()) {
            it = cache.emplace(sub, expand_creation_polynomial(sub, u, limits)).first;
        }
        for (const auto& [out_sub, coef] : it->second) {
            std::vector<std::uint8_t> counts(occ.counts().begin(), occ.counts().end());
            for (std::size_t i = 0; i < modes.size(); ++i) counts[modes[i]] = out_sub[i];
            out[OccupationVector(std::move(counts))] += amp * coef;
        }
        if (out.size() > limits.basis_cap) {
            throw BasisCapExceeded("mode-unitary output exceeds basis cap of " +
                                   std::to_string(limits.basis_cap) + " terms");
        }
    }
    return FockState(state.mode_count(), std::move(out)).pruned(limits.prune_threshold);
}

FockState phase_shift(const FockState& state, std::size_t mode, double phase) {
    if (mode >= state.mode_count()) throw std::out_of_range("phase_shift: invalid mode index");
    FockState::Terms terms;
    for (const auto& [occ, amp] : state) {
        terms.emplace_hint(terms.end(), occ, amp * std::polar(1.0, phase * occ[mode]));
    }
    return FockState(state.mode_count(), std::move(terms));
}

FockState cyclic_shift(const FockState& state, std::span<const std::size_t> modes) {
    check_modes(modes, state.mode_count());
    if (modes.empty()) return state;
    FockState::Terms terms;
    for (const auto& [occ, amp] : state) {
        std::vector<std::uint8_t> counts(occ.counts().begin(), occ.counts().end());
        for (std::size_t i = 0; i < modes.size(); ++i) {
            counts[modes[(i + 1) % modes.size()]] = occ[modes[i]];
        }
        terms.emplace(OccupationVector(std::move(counts)), amp);
    }
    return FockState(state.mode_count(), std::move(terms));
}

FockState permute_modes(const FockState& state, std::span<const std::size_t> order) {
    if (order.size() != state.mode_count()) {
        throw std::invalid_argument("permutation length does not match mode count");
    }
    check_modes(order, state.mode_count());
    FockState::Terms terms;
    for (const auto& [occ, amp] : state) terms.emplace(occ.select(order), amp);
    return FockState(state.mode_count(), std::move(terms));
}

std::vector<MeasurementOutcome> measure_photon_numbers(const FockState& state,
                                                       std::span<const std::size_t> modes,
                                                       double min_probability) {
    check_modes(modes, state.mode_count());
    const std::size_t rest_modes = state.mode_count() - modes.size();
    std::map<OccupationVector, FockState> branches;
    for (const auto& [occ, amp] : state) {
        auto [it, inserted] = branches.try_emplace(occ.select(modes), rest_modes);
        it->second.add(occ.remove(modes), amp);
    }
    std::vector<MeasurementOutcome> out;
    for (auto& [pattern, post] : branches) {
        const double p = post.norm_squared();
        if (p <= min_probability) continue;
        out.push_back({pattern, p, post.normalized()});
    }
    return out;
}

Complex inner_product(const FockState& a, const FockState& b) {
    if (a.mode_count() != b.mode_count()) {
        throw std::invalid_argument("inner_product: mode-count mismatch");
    }
    const FockState& small = a.size() <= b.size() ? a : b;
    const FockState& large = a.size() <= b.size() ? b : a;
    Complex sum{};
    for (const auto& [occ, amp] : small) {
        const Complex other = large.amplitude(occ);
        sum += (&small == &a) ? std::conj(amp) * other : std::conj(other) * amp;
    }
    return sum;
}

DensityMatrix reduced_density_matrix(const FockState& state, std::span<const std::size_t> keep,
                                     std::size_t basis_cap) {
    check_modes(keep, state.mode_count());
    const std::vector<std::size_t> traced = complement(keep, state.mode_count());

    std::map<OccupationVector, std::size_t> kept_index;
    for (const auto& [occ, amp] : state) kept_index.try_emplace(occ.select(keep), 0);
    if (kept_index.size() > basis_cap) {
        throw BasisCapExceeded("reduced density matrix basis exceeds cap of " +
                               std::to_string(basis_cap));
    }
    DensityMatrix rho;
    for (auto& [occ, idx] : kept_index) {
        idx = rho.basis.size();
        rho.basis.push_back(occ);
    }

    // Group amplitudes by environment configuration, then accumulate outer products.
    std::map<OccupationVector, std::vector<std::pair<std::size_t, Complex>>> by_env;
    for (const auto& [occ, amp] : state) {
        by_env[occ.select(traced)].emplace_back(kept_index.at(occ.select(keep)), amp);
    }
    const auto dim = static_cast<Eigen::Index>(rho.basis.size());
    rho.entries = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [env, column] : by_env) {
        for (const auto& [i, ai] : column) {
            for (const auto& [j, aj] : column) {
                rho.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    ai * std::conj(aj);
            }
        }
    }
    const double tr = rho.trace();
    if (tr <= 0.0) throw std::domain_error("reduced_density_matrix: zero state");
    rho.entries /= tr;
    return rho;
}

Factorization factor_out(const FockState& state, std::span<const std::size_t> keep) {
    check_modes(keep, state.mode_count());
    const std::vector<std::size_t> rest_modes = complement(keep, state.mode_count());

    std::map<OccupationVector, std::size_t> kidx;
    std::map<OccupationVector, std::size_t> ridx;
    for (const auto& [occ, amp] : state) {
        kidx.try_emplace(occ.select(keep), 0);
        ridx.try_emplace(occ.select(rest_modes), 0);
    }
    std::vector<OccupationVector> klabels;
    std::vector<OccupationVector> rlabels;
    for (auto& [o, i] : kidx) { i = klabels.size(); klabels.push_back(o); }
    for (auto& [o, i] : ridx) { i = rlabels.size(); rlabels.push_back(o); }

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(klabels.size()),
                                                static_cast<Eigen::Index>(rlabels.size()));
    for (const auto& [occ, amp] : state) {
        m(static_cast<Eigen::Index>(kidx.at(occ.select(keep))),
          static_cast<Eigen::Index>(ridx.at(occ.select(rest_modes)))) = amp;
    }

    Eigen::Index best = 0;
    m.colwise().squaredNorm().maxCoeff(&best);
    Eigen::VectorXcd a = m.col(best);
    a /= a.norm();
    const Eigen::RowVectorXcd v = a.adjoint() * m;

    Factorization f{FockState(keep.size()), FockState(rest_modes.size()), 0.0};
    f.deviation = (m - a * v).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) != Complex{}) f.kept.add(klabels[static_cast<std::size_t>(i)], a(i));
    }
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (v(j) != Complex{}) f.rest.add(rlabels[static_cast<std::size_t>(j)], v(j));
    }
    // Phase convention: the largest residual amplitude is real and positive,
    // so kept amplitudes of different input states are directly comparable.
    Complex anchor{};
    for (const auto& [occ, amp] : f.rest) {
        if (std::abs(amp) > std::abs(anchor) * (1.0 + 1e-12)) anchor = amp;
    }
    if (anchor != Complex{}) {
        const Complex unwind = std::conj(anchor) / std::abs(anchor);
        f.rest = f.rest.scaled(unwind);
        f.kept = f.kept.scaled(std::conj(unwind));
    }
    f.rest = f.rest.normalized();
    return f;
}

double max_abs_difference(const FockState& a, const FockState& b) {
    if (a.mode_count() != b.mode_count()) {
        throw std::invalid_argument("max_abs_difference: mode-count mismatch");
    }
    double worst = 0.0;
    for (const auto& [occ, amp] : a) worst = std::max(worst, std::abs(amp - b.amplitude(occ)));
    for (const auto& [occ, amp] : b) {
        if (a.terms().find(occ) == a.terms().end()) worst = std::max(worst, std::abs(amp));
    }
    return worst;
}

double max_abs_difference_up_to_phase(const FockState& a, const FockState& b) {
    const Complex overlap = inner_product(b, a);
    const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex{1.0, 0.0};
    return max_abs_difference(a, b.scaled(phase));
}

}  // namespace hifi
