#pragma once

// Threshold detectors with efficiency eta and dark-count probability p:
//
//   P(no click | i photons) = (1 - p) [1 - eta (1 - p)]^i
//
// The (1 - p) inside the bracket is kept as written; the textbook form
// (1 - p)(1 - eta)^i differs from it by O(p * eta).

#include <array>
#include <cmath>
#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "swapqkd/errors.hpp"
#include "swapqkd/numeric.hpp"

namespace swapqkd {

struct DetectorParams {
    double eta0 = 1.0;   // intrinsic efficiency
    double eta_t = 1.0;  // channel transmission
    double dark = 0.0;   // dark-count probability per detection window

    double eta() const noexcept { return eta0 * eta_t; }

    void validate() const {
        detail::require(eta0 >= 0.0 && eta0 <= 1.0, "eta0 must lie in [0, 1]");
        detail::require(eta_t >= 0.0 && eta_t <= 1.0, "eta_t must lie in [0, 1]");
        detail::require(dark >= 0.0 && dark < 1.0, "dark-count probability must lie in [0, 1)");
    }

    static DetectorParams make(double eta0, double eta_t, double dark) {
        DetectorParams p{eta0, eta_t, dark};
        p.validate();
        return p;
    }

    /// Parameters for an already-combined efficiency eta = eta0 * eta_t.
    static DetectorParams effective(double eta, double dark) { return make(eta, 1.0, dark); }
};

/// Binary outcomes (q, r, s, t) of one quadruple of threshold detectors.
struct ClickPattern {
    int q = 0;
    int r = 0;
    int s = 0;
    int t = 0;

    constexpr auto operator<=>(const ClickPattern&) const = default;

    constexpr int operator[](int k) const { return k == 0 ? q : k == 1 ? r : k == 2 ? s : t; }

    /// Position in the 16-entry table, q most significant.
    constexpr int index() const { return q * 8 + r * 4 + s * 2 + t; }

    static ClickPattern from_index(int index) {
        detail::require(index >= 0 && index < 16, "click-pattern index must lie in [0, 16)");
        return {(index >> 3) & 1, (index >> 2) & 1, (index >> 1) & 1, index & 1};
    }

    static ClickPattern make(int q, int r, int s, int t) {
        for (int b : {q, r, s, t}) {
            detail::require(b == 0 || b == 1, "click outcomes must be 0 or 1");
        }
        return {q, r, s, t};
    }

    /// Parses "1010"-style strings.
    static ClickPattern parse(std::string_view text) {
        detail::require(text.size() == 4, "click pattern must have four digits");
        std::array<int, 4> b{};
        for (std::size_t k = 0; k < 4; ++k) {
            detail::require(text[k] == '0' || text[k] == '1', "click pattern digits must be 0 or 1");
            b[k] = text[k] - '0';
        }
        return {b[0], b[1], b[2], b[3]};
    }

    std::string str() const {
        return {static_cast<char>('0' + q), static_cast<char>('0' + r), static_cast<char>('0' + s),
                static_cast<char>('0' + t)};
    }
};

/// Ideal photon numbers (i, j, k, l) incident on a detector quadruple.
struct PhotonCountPattern {
    int i = 0;
    int j = 0;
    int k = 0;
    int l = 0;

    constexpr auto operator<=>(const PhotonCountPattern&) const = default;

    constexpr int operator[](int m) const { return m == 0 ? i : m == 1 ? j : m == 2 ? k : l; }

    constexpr int total() const { return i + j + k + l; }
};

namespace detail {

inline void check_detector_domain(int photons, double eta, double dark) {
    require(photons >= 0, "photon number must be non-negative");
    require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
    require(dark >= 0.0 && dark < 1.0, "dark-count probability must lie in [0, 1)");
}

}  // namespace detail

inline double p_no_click(int photons, double eta, double dark) {
    detail::check_detector_domain(photons, eta, dark);
    return (1.0 - dark) * std::pow(1.0 - eta * (1.0 - dark), photons);
}

inline double p_click(int photons, double eta, double dark) {
    return 1.0 - p_no_click(photons, eta, dark);
}

inline double p_outcome(int click, int photons, double eta, double dark) {
    return click == 0 ? p_no_click(photons, eta, dark) : p_click(photons, eta, dark);
}

/// P(qrst | ijkl): the four detectors click independently.
inline double p_pattern(const ClickPattern& clicks, const PhotonCountPattern& counts,
                        const DetectorParams& params) {
    const double eta = params.eta();
    double product = 1.0;
    for (int m = 0; m < 4; ++m) {
        product *= p_outcome(clicks[m], counts[m], eta, params.dark);
    }
    return product;
}

/// Per-detector outcome probabilities for counts 0..max_photons, indexed
/// [click][n]. Used by the chain evaluator to avoid repeated pow calls.
class OutcomeTable {
public:
    OutcomeTable(int max_photons, double eta, double dark) : max_photons_(max_photons) {
        detail::check_detector_domain(max_photons, eta, dark);
        table_[0].resize(static_cast<std::size_t>(max_photons) + 1);
        table_[1].resize(static_cast<std::size_t>(max_photons) + 1);
        for (int n = 0; n <= max_photons; ++n) {
            table_[0][n] = p_no_click(n, eta, dark);
            table_[1][n] = 1.0 - table_[0][n];
        }
    }

    double operator()(int click, int photons) const { return table_[click][photons]; }

    int max_photons() const noexcept { return max_photons_; }

private:
    int max_photons_;
    std::array<std::vector<double>, 2> table_;
};

struct Posterior {
    std::map<PhotonCountPattern, double> probabilities;
    double evidence = 0.0;  // P(qrst) under the supplied prior
};

/// P(ijkl | qrst) = P(qrst | ijkl) P(ijkl) / P(qrst).
///
/// The prior may sum to less than one (truncated photon-number support).
/// Throws ZeroEvidenceError when no prior pattern can produce the clicks and
/// EvidenceUnderflowError when it can but the evidence fell below 1e-300.
inline Posterior bayes_invert(const std::map<PhotonCountPattern, double>& prior,
                              const ClickPattern& clicks, const DetectorParams& params) {
    params.validate();
    CompensatedSum prior_mass;
    CompensatedSum evidence;
    bool possible = false;
    std::map<PhotonCountPattern, double> joint;
    for (const auto& [counts, probability] : prior) {
        detail::require(probability >= 0.0, "prior probabilities must be non-negative");
        prior_mass.add(probability);
        const double likelihood = p_pattern(clicks, counts, params);
        if (probability > 0.0 && likelihood > 0.0) {
            possible = true;
        }
        const double weight = likelihood * probability;
        joint[counts] = weight;
        evidence.add(weight);
    }
    detail::require(prior_mass.value() <= 1.0 + 1e-12, "prior must sum to at most one");
    if (!possible) {
        throw ZeroEvidenceError("click pattern " + clicks.str() + " is impossible under the prior");
    }
    const double total = evidence.value();
    if (!(total > 1e-300)) {
        throw EvidenceUnderflowError("evidence for click pattern " + clicks.str() + " underflowed");
    }
    Posterior posterior;
    posterior.evidence = total;
    for (auto& [counts, weight] : joint) {
        posterior.probabilities.emplace(counts, weight / total);
    }
    return posterior;
}

}  // namespace swapqkd
