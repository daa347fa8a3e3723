#pragma once

// QKD figures of merit on top of the chain visibility.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "swapqkd/errors.hpp"

namespace swapqkd {

enum class LossBase {
    ten,  // dB: 10^{-(alpha l + alpha0)/10}
    e,    // e^{-(alpha l + alpha0)/10}
};

struct LinkParams {
    double alpha = 0.25;  // dB/km
    double alpha0 = 4.0;  // dB, distance independent
    double length_km = 0.0;
    double kappa = 1.0;   // reconciliation efficiency
    LossBase base = LossBase::ten;

    void validate() const {
        detail::require(alpha >= 0.0 && std::isfinite(alpha), "alpha must be non-negative");
        detail::require(alpha0 >= 0.0 && std::isfinite(alpha0), "alpha0 must be non-negative");
        detail::require(length_km >= 0.0 && std::isfinite(length_km), "length must be non-negative");
        detail::require(kappa > 0.0 && kappa <= 1.0, "kappa must lie in (0, 1]");
    }
};

inline double channel_efficiency(double alpha, double length_km, double alpha0, LossBase base = LossBase::ten) {
    detail::require(alpha >= 0.0 && length_km >= 0.0 && alpha0 >= 0.0, "loss parameters must be non-negative");
    const double exponent = -(alpha * length_km + alpha0) / 10.0;
    return base == LossBase::ten ? std::pow(10.0, exponent) : std::exp(exponent);
}

/// Effective efficiency of one chain detector: each photon travels l / (4N)
/// of fibre before its detector of intrinsic efficiency eta0.
inline double chain_detector_efficiency(int n_swaps, double eta0, const LinkParams& link) {
    detail::require(n_swaps >= 1, "n_swaps must be at least 1");
    detail::require(eta0 >= 0.0 && eta0 <= 1.0, "eta0 must lie in [0, 1]");
    link.validate();
    return eta0 * channel_efficiency(link.alpha, link.length_km / (4.0 * n_swaps), link.alpha0, link.base);
}

inline double qber(double visibility) {
    detail::require(visibility >= -1.0 && visibility <= 1.0, "visibility must lie in [-1, 1]");
    return (1.0 - visibility) / 2.0;
}

inline double binary_entropy(double x) {
    detail::require(x >= 0.0 && x <= 1.0, "binary entropy takes x in [0, 1]");
    if (x == 0.0 || x == 1.0) {
        return 0.0;
    }
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// max(0, 1 - kappa H2(Q) - H2(Q)).
inline double shor_preskill_rate(double q, double kappa = 1.0) {
    detail::require(q >= 0.0 && q <= 1.0, "QBER must lie in [0, 1]");
    detail::require(kappa > 0.0 && kappa <= 1.0, "kappa must lie in (0, 1]");
    const double h = binary_entropy(q);
    return std::max(0.0, 1.0 - kappa * h - h);
}

/// log10 of 1/2 (chi^2)^{2N} 10^{(-alpha l / 40N) 4N} (eta^2/2)^{2N-1} eta^2;
/// -inf when the rate is exactly zero.
inline double log10_sifted_rate(int n_swaps, double chi, double eta, double alpha, double length_km) {
    detail::require(n_swaps >= 1, "n_swaps must be at least 1");
    detail::require(chi >= 0.0 && std::isfinite(chi), "chi must be non-negative");
    detail::require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
    detail::require(alpha >= 0.0 && length_km >= 0.0, "loss parameters must be non-negative");
    if (chi == 0.0 || eta == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    const double n = n_swaps;
    return std::log10(0.5) + 4.0 * n * std::log10(chi) + (-alpha * length_km / (40.0 * n)) * 4.0 * n +
           (2.0 * n - 1.0) * (2.0 * std::log10(eta) - std::log10(2.0)) + 2.0 * std::log10(eta);
}

inline double sifted_rate(int n_swaps, double chi, double eta, double alpha, double length_km) {
    return std::pow(10.0, log10_sifted_rate(n_swaps, chi, eta, alpha, length_km));
}

/// The distance factor 10^{(-alpha l / 40N) 4N} as printed.
inline double sifted_distance_factor(int n_swaps, double alpha, double length_km) {
    detail::require(n_swaps >= 1, "n_swaps must be at least 1");
    return std::pow(std::pow(10.0, -alpha * length_km / (40.0 * n_swaps)), 4.0 * n_swaps);
}

struct KeyRateResult {
    double visibility = 0.0;
    double qber = 0.5;
    double r_sifted = 0.0;
    double log10_r_sifted = -std::numeric_limits<double>::infinity();
    double r_shor_preskill = 0.0;
    double r_net = 0.0;
    double log10_r_net = -std::numeric_limits<double>::infinity();

    // provenance
    double chi = 0.0;
    double eta0 = 0.0;
    double dark = 0.0;
    int n_swaps = 0;
    double length_km = 0.0;
};

inline KeyRateResult net_key_rate(double visibility, double log10_sifted, double kappa = 1.0) {
    KeyRateResult result;
    result.visibility = visibility;
    result.qber = qber(visibility);
    result.log10_r_sifted = log10_sifted;
    result.r_sifted = std::pow(10.0, log10_sifted);
    result.r_shor_preskill = shor_preskill_rate(result.qber, kappa);
    if (result.r_shor_preskill > 0.0) {
        result.log10_r_net = log10_sifted + std::log10(result.r_shor_preskill);
        result.r_net = std::pow(10.0, result.log10_r_net);
    }
    return result;
}

/// log2((1 + T) / (1 - T)) with T = 10^{-alpha l / 10}.
inline double tgw_bound(double alpha, double length_km) {
    detail::require(alpha >= 0.0 && length_km >= 0.0, "loss parameters must be non-negative");
    const double loss_db = alpha * length_km;
    if (!(loss_db > 0.0)) {
        throw DomainError("TGW bound is unbounded for a lossless channel (l = 0 or alpha = 0)");
    }
    const double transmission = std::pow(10.0, -loss_db / 10.0);
    return (std::log1p(transmission) - std::log1p(-transmission)) / std::numbers::ln2;
}

struct TradeOff {
    double a = 6.1e-7;
    double b = 17.0;
};

struct DarkCount {
    double value = 0.0;
    bool physical = true;  // value < 1
};

/// p = A exp(B eta0) for InGaAs detectors.
inline DarkCount ingaas_dark_count(double eta0, TradeOff trade_off = {}) {
    detail::require(eta0 >= 0.0 && eta0 <= 1.0, "eta0 must lie in [0, 1]");
    detail::require(trade_off.a >= 0.0 && std::isfinite(trade_off.b), "trade-off constants must be finite, A >= 0");
    const double value = trade_off.a * std::exp(trade_off.b * eta0);
    return {value, value < 1.0};
}

}  // namespace swapqkd
