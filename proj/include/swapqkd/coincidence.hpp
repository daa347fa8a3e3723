#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "swapqkd/detector_model.hpp"
#include "swapqkd/errors.hpp"

namespace swapqkd {

/// Outer detector ordering: (q', r') are A's H and V detectors, (s', t') are
/// B's V and H detectors. The correlated fringe is therefore the pair
/// (1010) and (0101); the anti-correlated one is (1001) and (0110).
inline constexpr ClickPattern kCorrelatedA{1, 0, 1, 0};
inline constexpr ClickPattern kCorrelatedB{0, 1, 0, 1};
inline constexpr ClickPattern kAntiCorrelatedA{1, 0, 0, 1};
inline constexpr ClickPattern kAntiCorrelatedB{0, 1, 1, 0};

/// Conditional outer coincidence probabilities Q(q'r's't' | heralds).
struct CoincidenceTable {
    std::array<double, 16> q_values{};
    double q_max = 0.0;  // correlated sum
    double q_min = 0.0;  // anti-correlated sum
    double evidence = 0.0;            // P(heralds), within truncation
    double truncation_deficit = 0.0;  // probability mass outside the truncation

    double q(const ClickPattern& outer) const { return q_values[static_cast<std::size_t>(outer.index())]; }

    double total() const {
        double sum = 0.0;
        for (double v : q_values) {
            sum += v;
        }
        return sum;
    }

    /// (Q_max - Q_min) / (Q_max + Q_min); throws when both vanish.
    double visibility() const {
        const double denominator = q_max + q_min;
        if (!(denominator > 0.0)) {
            throw DegenerateVisibilityError("no coincidences: Q_max + Q_min = 0");
        }
        return std::clamp((q_max - q_min) / denominator, -1.0, 1.0);
    }

    /// True when the unclamped ratio left [-1, 1] by rounding.
    bool visibility_clamped() const {
        const double denominator = q_max + q_min;
        if (!(denominator > 0.0)) {
            return false;
        }
        return std::fabs((q_max - q_min) / denominator) > 1.0;
    }

    static CoincidenceTable from_values(const std::array<double, 16>& values) {
        CoincidenceTable table;
        table.q_values = values;
        table.q_max = table.q(kCorrelatedA) + table.q(kCorrelatedB);
        table.q_min = table.q(kAntiCorrelatedA) + table.q(kAntiCorrelatedB);
        return table;
    }
};

/// Folds an ideal outer photon-number distribution through four noisy
/// threshold detectors.
inline std::array<double, 16> fold_outer_detectors(
    const std::map<PhotonCountPattern, double>& outer_counts, double eta, double dark) {
    std::array<CompensatedSum, 16> sums{};
    for (const auto& [counts, probability] : outer_counts) {
        if (probability == 0.0) {
            continue;
        }
        for (int index = 0; index < 16; ++index) {
            const auto clicks = ClickPattern::from_index(index);
            double likelihood = 1.0;
            for (int m = 0; m < 4; ++m) {
                likelihood *= p_outcome(clicks[m], counts[m], eta, dark);
            }
            sums[static_cast<std::size_t>(index)].add(likelihood * probability);
        }
    }
    std::array<double, 16> values{};
    for (std::size_t index = 0; index < 16; ++index) {
        values[index] = sums[index].value();
    }
    return values;
}

}  // namespace swapqkd
