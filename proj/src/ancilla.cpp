#include "hifi/ancilla.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace hifi {

namespace {

void require_same_size(const CoefficientProfile& p, const CoefficientProfile& p2) {
    if (p.n() != p2.n()) {
        throw std::invalid_argument("ancilla profiles must have the same n (" +
                                    std::to_string(p.n()) + " vs " + std::to_string(p2.n()) + ")");
    }
}

using Sign = double;

template <typename TermFn>
FockState two_register_state(const CoefficientProfile& p, const CoefficientProfile& p2, TermFn term) {
    require_same_size(p, p2);
    const std::size_t n = p.n();
    FockState out(4 * n);
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t j2 = 0; j2 <= n; ++j2) {
            const double amp = p(static_cast<long>(j)) * p2(static_cast<long>(j2));
            if (amp == 0.0) continue;
            auto [occ, sign] = term(j, j2);
            out.add(occ, Complex{sign * amp, 0.0});
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(ProfileLabel label) {
    switch (label) {
        case ProfileLabel::uniform: return "uniform";
        case ProfileLabel::linear: return "linear";
        case ProfileLabel::sine: return "sine";
        case ProfileLabel::custom: return "custom";
        case ProfileLabel::optimized: return "optimized";
    }
    return "unknown";
}

std::string_view to_string(CnotPairing pairing) {
    return pairing == CnotPairing::matched ? "matched" : "all-pairs";
}

CoefficientProfile::CoefficientProfile(std::vector<double> f, ProfileLabel label)
    : f_(std::move(f)), label_(label) {
    if (f_.size() < 2) throw std::invalid_argument("profile needs n >= 1 (at least two coefficients)");
    double sum = 0.0;
    for (double v : f_) {
        if (!std::isfinite(v)) throw std::invalid_argument("profile coefficient is not finite");
        sum += v * v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("profile is not normalized (sum f^2 = " + std::to_string(sum) + ")");
    }
}

CoefficientProfile CoefficientProfile::normalize(std::vector<double> values, ProfileLabel label) {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        throw std::invalid_argument("profile has zero or non-finite norm");
    }
    const double scale = 1.0 / std::sqrt(sum);
    for (double& v : values) v *= scale;
    return CoefficientProfile(std::move(values), label);
}

CoefficientProfile profile_uniform(std::size_t n) {
    if (n < 1) throw std::invalid_argument("profile_uniform requires n >= 1");
    return CoefficientProfile::normalize(std::vector<double>(n + 1, 1.0), ProfileLabel::uniform);
}

CoefficientProfile profile_linear(std::size_t n) {
    if (n < 2) throw std::invalid_argument("profile_linear requires n >= 2");
    std::vector<double> f(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        // Distance to the nearer endpoint; for odd n the two middle entries tie.
        f[j] = static_cast<double>(std::min(j, n - j));
    }
    return CoefficientProfile::normalize(std::move(f), ProfileLabel::linear);
}

CoefficientProfile profile_sine(std::size_t n) {
    if (n < 1) throw std::invalid_argument("profile_sine requires n >= 1");
    std::vector<double> f(n + 1);
    const double step = std::numbers::pi / static_cast<double>(n + 2);
    for (std::size_t j = 0; j <= n; ++j) f[j] = std::sin(step * static_cast<double>(j + 1));
    // Enforce exact mirror symmetry against rounding in sin().
    for (std::size_t j = 0; j < (n + 1) / 2; ++j) f[n - j] = f[j];
    return CoefficientProfile::normalize(std::move(f), ProfileLabel::sine);
}

CoefficientProfile profile_by_name(std::string_view name, std::size_t n) {
    if (name == "uniform") return profile_uniform(n);
    if (name == "linear") return profile_linear(n);
    if (name == "sine") return profile_sine(n);
    throw std::invalid_argument("unknown profile '" + std::string(name) + "'");
}

LoadedProfile parse_profile_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("profile JSON: ") + e.what());
    }
    if (!j.is_array()) throw std::invalid_argument("profile JSON must be an array of reals");
    std::vector<double> values;
    for (const auto& v : j) {
        if (!v.is_number()) throw std::invalid_argument("profile JSON entries must be numbers");
        values.push_back(v.get<double>());
    }
    double sum = 0.0;
    for (double v : values) sum += v * v;
    const double norm = std::sqrt(sum);
    return {CoefficientProfile::normalize(std::move(values), ProfileLabel::custom), norm,
            std::abs(norm - 1.0) > 1e-6};
}

LoadedProfile load_profile_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_profile_json(buf.str());
}

std::string profile_to_json(const CoefficientProfile& profile) {
    nlohmann::json j = nlohmann::json::array();
    for (double v : profile.values()) j.push_back(v);
    return j.dump();
}

OccupationVector ancilla_x_pattern(std::size_t n, std::size_t j) {
    std::vector<std::uint8_t> x(n, 0);
    for (std::size_t i = 0; i < j && i < n; ++i) x[i] = 1;
    return OccupationVector(std::move(x));
}

OccupationVector ancilla_y_pattern(std::size_t n, std::size_t j) {
    std::vector<std::uint8_t> y(n, 1);
    for (std::size_t i = 0; i < j && i < n; ++i) y[i] = 0;
    return OccupationVector(std::move(y));
}

FockState single_ancilla_state(const CoefficientProfile& p) {
    const std::size_t n = p.n();
    FockState out(2 * n);
    for (std::size_t j = 0; j <= n; ++j) {
        const double f = p(static_cast<long>(j));
        if (f == 0.0) continue;
        out.add(ancilla_x_pattern(n, j).concat(ancilla_y_pattern(n, j)), Complex{f, 0.0});
    }
    return out;
}

FockState cz_ancilla_state(const CoefficientProfile& p, const CoefficientProfile& p2) {
    const std::size_t n = p.n();
    return two_register_state(p, p2, [n](std::size_t j, std::size_t j2) {
        const Sign sign = ((j * j2) % 2 == 0) ? 1.0 : -1.0;
        auto occ = ancilla_x_pattern(n, j)
                       .concat(ancilla_y_pattern(n, j))
                       .concat(ancilla_x_pattern(n, j2))
                       .concat(ancilla_y_pattern(n, j2));
        return std::pair{occ, sign};
    });
}

FockState cz_ancilla_state_unsigned(const CoefficientProfile& p, const CoefficientProfile& p2) {
    const std::size_t n = p.n();
    return two_register_state(p, p2, [n](std::size_t j, std::size_t j2) {
        auto occ = ancilla_x_pattern(n, j)
                       .concat(ancilla_y_pattern(n, j))
                       .concat(ancilla_x_pattern(n, j2))
                       .concat(ancilla_y_pattern(n, j2));
        return std::pair{occ, Sign{1.0}};
    });
}

FockState cnot_ancilla_state(const CoefficientProfile& p, const CoefficientProfile& p2,
                             CnotPairing pairing) {
    const std::size_t n = p.n();
    return two_register_state(p, p2, [n, pairing](std::size_t j, std::size_t j2) {
        const OccupationVector y = ancilla_y_pattern(n, j);
        const OccupationVector target = ancilla_y_pattern(n, j2);
        std::vector<std::uint8_t> y2(target.counts().begin(), target.counts().end());
        if (pairing == CnotPairing::matched) {
            for (std::size_t i = 0; i < n; ++i) y2[i] ^= y[i];
        } else {
            // Each target sees one CNOT per control, so it flips by the control parity.
            const std::uint8_t parity = static_cast<std::uint8_t>(y.total() % 2);
            for (std::size_t i = 0; i < n; ++i) y2[i] ^= parity;
        }
        auto occ = ancilla_x_pattern(n, j)
                       .concat(y)
                       .concat(ancilla_x_pattern(n, j2))
                       .concat(OccupationVector(std::move(y2)));
        return std::pair{occ, Sign{1.0}};
    });
}

}  // namespace hifi
