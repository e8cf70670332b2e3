#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hifi/fock.hpp"

namespace hifi {

enum class ProfileLabel { uniform, linear, sine, custom, optimized };

std::string_view to_string(ProfileLabel label);

/// Real coefficients f(0..n) of the entangled ancilla superposition.
/// Always unit-norm; f(j) reads as zero outside [0, n].
class CoefficientProfile {
public:
    /// Validates normalization to 1e-12.
    CoefficientProfile(std::vector<double> f, ProfileLabel label);

    /// Rescales `values` to unit norm.
    static CoefficientProfile normalize(std::vector<double> values, ProfileLabel label);

    std::size_t n() const { return f_.size() - 1; }
    ProfileLabel label() const { return label_; }
    std::span<const double> values() const { return f_; }

    /// f(j), zero unless 0 <= j <= n.
    double operator()(long j) const {
        return (j < 0 || j > static_cast<long>(n())) ? 0.0 : f_[static_cast<std::size_t>(j)];
    }

    CoefficientProfile relabeled(ProfileLabel label) const { return {f_, label}; }

private:
    std::vector<double> f_;
    ProfileLabel label_;
};

CoefficientProfile profile_uniform(std::size_t n);
/// Triangle with zero endpoints; odd n gets a two-point plateau at the apex.
CoefficientProfile profile_linear(std::size_t n);
/// f(j) proportional to sin(pi (j+1) / (n+2)).
CoefficientProfile profile_sine(std::size_t n);

/// Parses "uniform", "linear", "sine" for a given n.
CoefficientProfile profile_by_name(std::string_view name, std::size_t n);

struct LoadedProfile {
    CoefficientProfile profile;
    double input_norm;  // Euclidean norm of the values as written in the file
    bool renormalized;  // true when |input_norm - 1| > 1e-6
};

/// Reads a JSON array of n+1 reals.
LoadedProfile load_profile_json(const std::filesystem::path& path);
LoadedProfile parse_profile_json(std::string_view text);
std::string profile_to_json(const CoefficientProfile& profile);

/// Single-register ancilla on 2n modes: x register at positions 0..n-1,
/// y register at n..2n-1. Term j has x = 1^j 0^{n-j} and y = 0^j 1^{n-j}.
FockState single_ancilla_state(const CoefficientProfile& p);

/// Occupations of the x and y registers for ancilla term j.
OccupationVector ancilla_x_pattern(std::size_t n, std::size_t j);
OccupationVector ancilla_y_pattern(std::size_t n, std::size_t j);

/// Two-register ancilla on 4n modes (x, y, x', y') with amplitude
/// (-1)^{j j'} f(j) f'(j').
FockState cz_ancilla_state(const CoefficientProfile& p, const CoefficientProfile& p2);

/// Same two registers with amplitude f(j) f'(j') but no sign factor.
FockState cz_ancilla_state_unsigned(const CoefficientProfile& p, const CoefficientProfile& p2);

/// How the y register controls the y' register in the direct-CNOT ancilla.
enum class CnotPairing {
    matched,    // y position i controls y' position i only
    all_pairs,  // every y position controls every y' position
};

std::string_view to_string(CnotPairing pairing);

/// Two-register ancilla with the y' pattern of every term XORed by y under
/// the chosen pairing; amplitude f(j) f'(j').
FockState cnot_ancilla_state(const CoefficientProfile& p, const CoefficientProfile& p2,
                             CnotPairing pairing = CnotPairing::all_pairs);

}  // namespace hifi
