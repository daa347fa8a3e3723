#pragma once

// Closed-form conditional outer statistics for N concatenated swaps.
//
// Geometry: 2N PDC sources and 2N - 1 Bell-measurement stations. Swap n
// (n = 1..N, counted from B) pairs two sources at primary station n;
// connecting station N + n joins the A-side output of swap n with the
// B-side output of swap n + 1. Party A holds the A-side output of swap N and
// party B the B-side output of swap 1.
//
// Every station has detectors (i, j, k, l): i and l count H photons on the
// two beam-splitter ports, j and k count V photons. The amplitude of a full
// record of station counts factorizes into an H sector (indices i, l) and a
// V sector (indices j, k); the sectors only meet in the outer polarization
// rotators. Each sector is propagated station by station as a real
// "coherence" array over (B-side count, A-side count) for ket and bra,
// which is the nested sum over all station counts with the binomial,
// alternating-sign and Omega factors regrouped by the Kronecker deltas.
// Truncation bounds every station count by t.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "swapqkd/coincidence.hpp"
#include "swapqkd/detector_model.hpp"
#include "swapqkd/errors.hpp"
#include "swapqkd/numeric.hpp"

namespace swapqkd {

inline constexpr ClickPattern kPsiPlusHerald{1, 0, 1, 0};

/// Click patterns at all 2N - 1 stations: primary stations 1..N first,
/// then connecting stations N+1..2N-1.
struct ChainClickPattern {
    std::vector<ClickPattern> stations;

    static ChainClickPattern uniform(int n_swaps, ClickPattern herald = kPsiPlusHerald) {
        detail::require(n_swaps >= 1, "n_swaps must be at least 1");
        return {std::vector<ClickPattern>(static_cast<std::size_t>(2 * n_swaps - 1), herald)};
    }

    std::size_t size() const noexcept { return stations.size(); }
};

struct ChainConfig {
    int n_swaps = 1;
    double chi = 0.1;
    double eta = 1.0;  // effective efficiency of every detector
    double dark = 0.0;
    double delta_a = std::numbers::pi / 2.0;
    double delta_b = std::numbers::pi / 2.0;
    ChainClickPattern heralds = ChainClickPattern::uniform(1);
    int truncation = 3;

    void validate() const {
        detail::require(n_swaps >= 1, "n_swaps must be at least 1");
        detail::require(chi >= 0.0 && std::isfinite(chi), "chi must be non-negative");
        detail::require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
        detail::require(dark >= 0.0 && dark < 1.0, "dark-count probability must lie in [0, 1)");
        detail::require(std::isfinite(delta_a) && std::isfinite(delta_b), "rotator angles must be finite");
        detail::require(static_cast<int>(heralds.size()) == 2 * n_swaps - 1,
                        "a chain of N swaps needs 2N - 1 station patterns");
        detail::require(truncation >= 1, "truncation must be at least 1");
        detail::require(truncation <= 40, "truncation above 40 is not supported");
    }

    static ChainConfig uniform(int n_swaps, double chi, double eta, double dark,
                               ClickPattern herald = kPsiPlusHerald, int truncation = 3) {
        ChainConfig config;
        config.n_swaps = n_swaps;
        config.chi = chi;
        config.eta = eta;
        config.dark = dark;
        config.heralds = ChainClickPattern::uniform(n_swaps, herald);
        config.truncation = truncation;
        config.validate();
        return config;
    }
};

/// Omega(mu, lambda, i, l) = sum_g C(mu+lambda, g) C(i+l-mu-lambda, i-g) (-1)^(mu+lambda-g).
/// Couples adjacent swaps: mu + lambda photons arrive from one side of a
/// connecting station, the rest of its i + l from the other.
inline std::int64_t omega(int mu, int lambda, int i_out, int l_out) {
    detail::require(mu >= 0 && lambda >= 0 && i_out >= 0 && l_out >= 0, "omega takes non-negative integers");
    const int incoming = mu + lambda;
    const int other = i_out + l_out - incoming;
    std::int64_t sum = 0;
    for (int g = 0; g <= incoming; ++g) {
        sum += binomial(incoming, g) * binomial(other, i_out - g) * sign_power(incoming - g);
    }
    return sum;
}

/// Primary-station split: sum over mu + lambda = x of (-1)^mu C(u, mu) C(v, lambda),
/// the signed number of ways x of the u + v detected photons came from the
/// A-side source.
inline std::int64_t station_split(int u, int v, int x) {
    std::int64_t sum = 0;
    for (int mu = 0; mu <= std::min(u, x); ++mu) {
        sum += sign_power(mu) * binomial(u, mu) * binomial(v, x - mu);
    }
    return sum;
}

namespace detail {

// Dense 4-index array over (y, x, y~, x~) in [0, 2t]^4, with a running
// log10 scale so deep chains do not underflow.
class SectorDensity {
public:
    explicit SectorDensity(int t) : dim_(2 * t + 1), values_(static_cast<std::size_t>(dim_) * dim_ * dim_ * dim_) {}

    int dim() const noexcept { return dim_; }

    std::size_t offset(int y, int x, int yt, int xt) const noexcept {
        return ((static_cast<std::size_t>(y) * dim_ + x) * dim_ + yt) * dim_ + xt;
    }

    double operator()(int y, int x, int yt, int xt) const noexcept { return values_[offset(y, x, yt, xt)]; }
    double& at(int y, int x, int yt, int xt) noexcept { return values_[offset(y, x, yt, xt)]; }

    std::vector<double>& data() noexcept { return values_; }
    const std::vector<double>& data() const noexcept { return values_; }

    double log10_scale = 0.0;

    void normalize() {
        double peak = 0.0;
        for (double v : values_) {
            peak = std::max(peak, std::fabs(v));
        }
        if (peak > 0.0 && std::isfinite(peak)) {
            const int exponent = std::ilogb(peak);
            const double factor = std::ldexp(1.0, -exponent);
            for (double& v : values_) {
                v *= factor;
            }
            log10_scale += exponent * std::log10(2.0);
        }
    }

private:
    int dim_;
    std::vector<double> values_;
};

class CompensatedArray {
public:
    explicit CompensatedArray(std::size_t size) : sum_(size), compensation_(size) {}

    void add(std::size_t index, double x) noexcept {
        double& s = sum_[index];
        const double t = s + x;
        if (std::fabs(s) >= std::fabs(x)) {
            compensation_[index] += (s - t) + x;
        } else {
            compensation_[index] += (x - t) + s;
        }
        s = t;
    }

    void store(std::vector<double>& out) const {
        for (std::size_t k = 0; k < sum_.size(); ++k) {
            out[k] = sum_[k] + compensation_[k];
        }
    }

private:
    std::vector<double> sum_;
    std::vector<double> compensation_;
};

struct SectorHeralds {
    std::vector<int> first;   // clicks on the port-1 detector (i or j)
    std::vector<int> second;  // clicks on the port-2 detector (l or k)
};

// Per-station weight tables for one sector.
struct StationTables {
    int t;
    std::vector<std::int64_t> split;  // [u][v][x], x <= 2t
    std::vector<std::int64_t> link;   // [x][u][v] = Omega(x, 0, u, v)

    explicit StationTables(int truncation) : t(truncation) {
        const int n = t + 1;
        const int d = 2 * t + 1;
        split.assign(static_cast<std::size_t>(n * n * d), 0);
        link.assign(static_cast<std::size_t>(d * n * n), 0);
        for (int u = 0; u <= t; ++u) {
            for (int v = 0; v <= t; ++v) {
                for (int x = 0; x <= u + v; ++x) {
                    split[static_cast<std::size_t>((u * n + v) * d + x)] = station_split(u, v, x);
                }
            }
        }
        for (int x = 0; x < d; ++x) {
            for (int u = 0; u <= t; ++u) {
                for (int v = 0; v <= t; ++v) {
                    if (x <= u + v) {
                        link[static_cast<std::size_t>((x * n + u) * n + v)] = omega(x, 0, u, v);
                    }
                }
            }
        }
    }

    double s(int u, int v, int x) const {
        return static_cast<double>(split[static_cast<std::size_t>((u * (t + 1) + v) * (2 * t + 1) + x)]);
    }

    double omega_link(int x, int u, int v) const {
        return static_cast<double>(link[static_cast<std::size_t>((x * (t + 1) + u) * (t + 1) + v)]);
    }
};

// Detector likelihood for a station count; `agnostic` marginalizes clicks.
struct SectorWeights {
    const OutcomeTable* outcomes;
    bool agnostic;

    double operator()(int click, int n) const { return agnostic ? 1.0 : (*outcomes)(click, n); }
};

inline SectorDensity propagate_sector(int n_swaps, int t, double tau, const StationTables& tables,
                                      const SectorHeralds& heralds, const SectorWeights& weight) {
    SectorDensity rho(t);
    const int d = rho.dim();
    const double tau2 = tau * tau;

    auto primary_weight = [&](int station, int u, int v) {
        return weight(heralds.first[station], u) * weight(heralds.second[station], v) * std::pow(tau2, u + v) /
               (std::ldexp(1.0, u + v) * factorial(u) * factorial(v));
    };
    auto link_weight = [&](int station, int u, int v) {
        return weight(heralds.first[station], u) * weight(heralds.second[station], v) * factorial(u) *
               factorial(v) / std::ldexp(1.0, u + v);
    };

    {
        CompensatedArray acc(rho.data().size());
        for (int u = 0; u <= t; ++u) {
            for (int v = 0; v <= t; ++v) {
                const double w = primary_weight(0, u, v);
                if (w == 0.0) {
                    continue;
                }
                const int total = u + v;
                for (int x = 0; x <= total; ++x) {
                    const double sx = tables.s(u, v, x);
                    if (sx == 0.0) {
                        continue;
                    }
                    for (int xt = 0; xt <= total; ++xt) {
                        const double sxt = tables.s(u, v, xt);
                        if (sxt == 0.0) {
                            continue;
                        }
                        acc.add(rho.offset(total - x, x, total - xt, xt), w * sx * sxt);
                    }
                }
            }
        }
        acc.store(rho.data());
        rho.normalize();
    }

    struct Move {
        int from;
        int to;
        double kernel;
    };
    std::vector<Move> moves;
    moves.reserve(static_cast<std::size_t>(d));

    for (int swap = 1; swap < n_swaps; ++swap) {
        const int link_station = n_swaps + swap - 1;
        SectorDensity next(t);
        next.log10_scale = rho.log10_scale;
        CompensatedArray acc(next.data().size());
        for (int uc = 0; uc <= t; ++uc) {
            for (int vc = 0; vc <= t; ++vc) {
                const double wc = link_weight(link_station, uc, vc);
                if (wc == 0.0) {
                    continue;
                }
                for (int u = 0; u <= t; ++u) {
                    for (int v = 0; v <= t; ++v) {
                        const double wp = primary_weight(swap, u, v);
                        if (wp == 0.0) {
                            continue;
                        }
                        // x photons enter the link from the previous swap; the
                        // link's other uc + vc - x come from this swap's B side,
                        // leaving u + v - (uc + vc - x) on its A side.
                        moves.clear();
                        for (int x = 0; x < d; ++x) {
                            const int from_this = uc + vc - x;
                            if (from_this < 0 || from_this > u + v) {
                                continue;
                            }
                            const int to = u + v - from_this;
                            const double kernel = tables.omega_link(x, uc, vc) * tables.s(u, v, to);
                            if (kernel != 0.0) {
                                moves.push_back({x, to, kernel});
                            }
                        }
                        const double w = wc * wp;
                        for (const Move& ket : moves) {
                            for (const Move& bra : moves) {
                                const double factor = w * ket.kernel * bra.kernel;
                                for (int y = 0; y < d; ++y) {
                                    for (int yt = 0; yt < d; ++yt) {
                                        const double value = rho(y, ket.from, yt, bra.from);
                                        if (value != 0.0) {
                                            acc.add(next.offset(y, ket.to, yt, bra.to), factor * value);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        acc.store(next.data());
        next.normalize();
        rho = std::move(next);
    }
    return rho;
}

// Amplitude of |h, n - h> after rotating the monomial aH^p aV^r by delta:
//   sqrt(h! v!) sum_w C(p, h-w) C(r, w) cos^(h-w+r-w) (i sin)^(p-h+2w).
class RotationTable {
public:
    RotationTable(int max_input, double delta) : dim_(max_input + 1) {
        const double c = std::cos(delta / 2.0);
        const std::complex<double> is{0.0, std::sin(delta / 2.0)};
        values_.assign(static_cast<std::size_t>(dim_ * dim_ * (2 * dim_ - 1)), {});
        for (int p = 0; p < dim_; ++p) {
            for (int r = 0; r < dim_; ++r) {
                const int n = p + r;
                for (int h = 0; h <= n; ++h) {
                    CompensatedComplexSum sum;
                    for (int w = std::max(0, h - p); w <= std::min(r, h); ++w) {
                        sum.add(static_cast<double>(binomial(p, h - w) * binomial(r, w)) *
                                std::pow(c, h - w + r - w) * std::pow(is, p - h + 2 * w));
                    }
                    at(p, r, h) = sum.value() * std::sqrt(factorial(h) * factorial(n - h));
                }
            }
        }
    }

    std::complex<double> operator()(int p, int r, int h) const { return values_[index(p, r, h)]; }

private:
    std::size_t index(int p, int r, int h) const {
        return (static_cast<std::size_t>(p) * dim_ + r) * (2 * dim_ - 1) + h;
    }
    std::complex<double>& at(int p, int r, int h) { return values_[index(p, r, h)]; }

    int dim_;
    std::vector<std::complex<double>> values_;
};

struct SectorPair {
    SectorDensity h;
    SectorDensity v;
    double log10_prefactor;  // sech^{8N}(chi) and the sector scales
};

inline bool herald_reachable(const ChainConfig& config) {
    const bool photons = config.chi > 0.0 && config.eta > 0.0;
    for (const auto& pattern : config.heralds.stations) {
        for (int m = 0; m < 4; ++m) {
            if (pattern[m] == 1 && !(photons || config.dark > 0.0)) {
                return false;
            }
        }
    }
    return true;
}

inline SectorPair build_sectors(const ChainConfig& config, bool agnostic) {
    config.validate();
    const int t = config.truncation;
    const StationTables tables(t);
    const OutcomeTable outcomes(t, config.eta, config.dark);
    const SectorWeights weights{&outcomes, agnostic};
    SectorHeralds h_heralds;
    SectorHeralds v_heralds;
    for (const auto& pattern : config.heralds.stations) {
        h_heralds.first.push_back(pattern.q);
        h_heralds.second.push_back(pattern.t);
        v_heralds.first.push_back(pattern.r);
        v_heralds.second.push_back(pattern.s);
    }
    const double tau = std::tanh(config.chi);
    auto h = propagate_sector(config.n_swaps, t, tau, tables, h_heralds, weights);
    auto v = propagate_sector(config.n_swaps, t, tau, tables, v_heralds, weights);
    const double log10_sech = -std::log10(std::cosh(config.chi));
    const double prefactor = 8.0 * config.n_swaps * log10_sech + h.log10_scale + v.log10_scale;
    return {std::move(h), std::move(v), prefactor};
}

}  // namespace detail

/// Result of one closed-form evaluation.
struct ChainEvaluation {
    CoincidenceTable table;        // normalized Q(q'r's't' | heralds)
    double log10_evidence = 0.0;   // log10 P(heralds), within truncation
};

/// Q(q'r's't' | heralds) for all 16 outer threshold patterns.
///
/// Outer detectors are ordered (A_H, A_V, B_V, B_H). When `with_deficit` is
/// set, also reports the probability mass of station-count records outside
/// the truncation.
inline ChainEvaluation evaluate_chain(const ChainConfig& config, bool with_deficit = false) {
    const auto sectors = detail::build_sectors(config, false);
    const int t = config.truncation;
    const int d = 2 * t + 1;
    const detail::RotationTable rot_a(2 * t, config.delta_a);
    const detail::RotationTable rot_b(2 * t, config.delta_b);
    const OutcomeTable outcomes(4 * t, config.eta, config.dark);

    // Outer click-pair kernels: A pair (q', r') on (H, V); B pair (s', t') on (V, H).
    // ma[c][(x, r, xt)] with rt = x + r - xt.
    auto kernel_index = [d](int x, int r, int xt) {
        return (static_cast<std::size_t>(x) * d + r) * d + xt;
    };
    std::array<std::vector<std::complex<double>>, 4> ma;
    std::array<std::vector<std::complex<double>>, 4> mb;
    for (int c = 0; c < 4; ++c) {
        ma[c].assign(static_cast<std::size_t>(d * d * d), {});
        mb[c].assign(static_cast<std::size_t>(d * d * d), {});
    }
    for (int x = 0; x < d; ++x) {
        for (int r = 0; r < d; ++r) {
            const int n = x + r;
            for (int xt = 0; xt < d; ++xt) {
                const int rt = n - xt;
                if (rt < 0 || rt >= d) {
                    continue;
                }
                for (int c = 0; c < 4; ++c) {
                    const int first_click = c >> 1;
                    const int second_click = c & 1;
                    CompensatedComplexSum sum_a;
                    CompensatedComplexSum sum_b;
                    for (int h = 0; h <= n; ++h) {
                        const auto pa = rot_a(x, r, h) * std::conj(rot_a(xt, rt, h));
                        const auto pb = rot_b(x, r, h) * std::conj(rot_b(xt, rt, h));
                        // A: (q' on H, r' on V); B: (s' on V, t' on H).
                        sum_a.add(pa * outcomes(first_click, h) * outcomes(second_click, n - h));
                        sum_b.add(pb * outcomes(first_click, n - h) * outcomes(second_click, h));
                    }
                    ma[c][kernel_index(x, r, xt)] = sum_a.value();
                    mb[c][kernel_index(x, r, xt)] = sum_b.value();
                }
            }
        }
    }

    std::array<CompensatedComplexSum, 16> sums{};
    const auto& rho_h = sectors.h;
    const auto& rho_v = sectors.v;
    for (int y = 0; y < d; ++y) {
        for (int x = 0; x < d; ++x) {
            for (int yt = 0; yt < d; ++yt) {
                for (int xt = 0; xt < d; ++xt) {
                    const double h = rho_h(y, x, yt, xt);
                    if (h == 0.0) {
                        continue;
                    }
                    for (int r = 0; r < d; ++r) {
                        const int rt = x + r - xt;
                        if (rt < 0 || rt >= d) {
                            continue;
                        }
                        for (int s = 0; s < d; ++s) {
                            const int st = y + s - yt;
                            if (st < 0 || st >= d) {
                                continue;
                            }
                            const double v = rho_v(s, r, st, rt);
                            if (v == 0.0) {
                                continue;
                            }
                            const double hv = h * v;
                            const std::size_t ka = kernel_index(x, r, xt);
                            const std::size_t kb = kernel_index(y, s, yt);
                            for (int ca = 0; ca < 4; ++ca) {
                                const auto left = hv * ma[ca][ka];
                                for (int cb = 0; cb < 4; ++cb) {
                                    // Pattern (q', r', s', t') = (ca bits, cb bits).
                                    sums[static_cast<std::size_t>(ca * 4 + cb)].add(left * mb[cb][kb]);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    std::array<double, 16> raw{};
    CompensatedSum total;
    for (std::size_t k = 0; k < 16; ++k) {
        raw[k] = std::max(0.0, sums[k].value().real());
        total.add(raw[k]);
    }
    const double norm = total.value();
    if (!(norm > 0.0)) {
        if (detail::herald_reachable(config)) {
            throw EvidenceUnderflowError("herald evidence underflowed in the chain evaluation");
        }
        throw ZeroEvidenceError("herald pattern is impossible for these parameters");
    }
    for (double& value : raw) {
        value /= norm;
    }
    ChainEvaluation result;
    result.table = CoincidenceTable::from_values(raw);
    result.log10_evidence = std::log10(norm) + sectors.log10_prefactor;
    result.table.evidence = std::pow(10.0, result.log10_evidence);
    if (with_deficit) {
        const auto all = detail::build_sectors(config, true);
        CompensatedSum mass;
        for (int y = 0; y < d; ++y) {
            for (int x = 0; x < d; ++x) {
                const double h = all.h(y, x, y, x);
                if (h == 0.0) {
                    continue;
                }
                for (int s = 0; s < d; ++s) {
                    for (int r = 0; r < d; ++r) {
                        // Norms of the outer monomials: x! r! y! s!.
                        mass.add(h * all.v(s, r, s, r) * factorial(x) * factorial(r) * factorial(y) * factorial(s));
                    }
                }
            }
        }
        const double kept = mass.value() * std::pow(10.0, all.log10_prefactor);
        result.table.truncation_deficit = std::max(0.0, 1.0 - kept);
    }
    return result;
}

/// P(i'j'k'l' | heralds) over all outer photon numbers reachable within the
/// truncation, (i', j', k', l') = (A_H, A_V, B_V, B_H).
inline std::map<PhotonCountPattern, double> conditional_outer_counts(const ChainConfig& config) {
    const auto sectors = detail::build_sectors(config, false);
    const int t = config.truncation;
    const int d = 2 * t + 1;
    const detail::RotationTable rot_a(2 * t, config.delta_a);
    const detail::RotationTable rot_b(2 * t, config.delta_b);
    std::map<PhotonCountPattern, CompensatedComplexSum> sums;
    const auto& rho_h = sectors.h;
    const auto& rho_v = sectors.v;
    for (int y = 0; y < d; ++y) {
        for (int x = 0; x < d; ++x) {
            for (int yt = 0; yt < d; ++yt) {
                for (int xt = 0; xt < d; ++xt) {
                    const double h = rho_h(y, x, yt, xt);
                    if (h == 0.0) {
                        continue;
                    }
                    for (int r = 0; r < d; ++r) {
                        const int rt = x + r - xt;
                        if (rt < 0 || rt >= d) {
                            continue;
                        }
                        for (int s = 0; s < d; ++s) {
                            const int st = y + s - yt;
                            if (st < 0 || st >= d) {
                                continue;
                            }
                            const double v = rho_v(s, r, st, rt);
                            if (v == 0.0) {
                                continue;
                            }
                            const int na = x + r;
                            const int nb = y + s;
                            for (int ha = 0; ha <= na; ++ha) {
                                const auto a = rot_a(x, r, ha) * std::conj(rot_a(xt, rt, ha));
                                for (int hb = 0; hb <= nb; ++hb) {
                                    const auto b = rot_b(y, s, hb) * std::conj(rot_b(yt, st, hb));
                                    sums[PhotonCountPattern{ha, na - ha, nb - hb, hb}].add(h * v * a * b);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    CompensatedSum total;
    std::map<PhotonCountPattern, double> out;
    for (const auto& [counts, sum] : sums) {
        const double value = std::max(0.0, sum.value().real());
        out.emplace(counts, value);
        total.add(value);
    }
    const double norm = total.value();
    if (!(norm > 0.0)) {
        if (detail::herald_reachable(config)) {
            throw EvidenceUnderflowError("herald evidence underflowed in the chain evaluation");
        }
        throw ZeroEvidenceError("herald pattern is impossible for these parameters");
    }
    for (auto& [counts, value] : out) {
        value /= norm;
    }
    return out;
}

/// Single entry of conditional_outer_counts; outer counts beyond what the
/// truncation can produce are rejected with the offending index.
inline double conditional_outer_probability(const ChainConfig& config, const PhotonCountPattern& outer) {
    config.validate();
    const int limit = 4 * config.truncation;
    if (outer.i + outer.j > limit) {
        throw TruncationError("outer A photon number exceeds what truncation " +
                                  std::to_string(config.truncation) + " can produce",
                              "i'+j'");
    }
    if (outer.k + outer.l > limit) {
        throw TruncationError("outer B photon number exceeds what truncation " +
                                  std::to_string(config.truncation) + " can produce",
                              "k'+l'");
    }
    const auto distribution = conditional_outer_counts(config);
    const auto it = distribution.find(outer);
    return it == distribution.end() ? 0.0 : it->second;
}

inline CoincidenceTable coincidence_table(const ChainConfig& config) { return evaluate_chain(config).table; }

inline double coincidence_q(const ChainConfig& config, const ClickPattern& outer_clicks) {
    return coincidence_table(config).q(outer_clicks);
}

enum class VisibilityConvention {
    fixed_angle,        // correlated vs anti-correlated sums at the configured angles
    extremize_delta_b,  // extremes of the correlated sum over delta_b
};

namespace detail {

inline double correlated_sum(ChainConfig config, double delta_b) {
    config.delta_b = delta_b;
    return coincidence_table(config).q_max;
}

// Golden-section search for an extremum of the correlated sum in [lo, hi].
inline double refine_extremum(const ChainConfig& config, double lo, double hi, bool maximize) {
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double delta) {
        const double value = correlated_sum(config, delta);
        return maximize ? value : -value;
    };
    double a = lo;
    double b = hi;
    double c = b - ratio * (b - a);
    double e = a + ratio * (b - a);
    double fc = f(c);
    double fe = f(e);
    for (int iteration = 0; iteration < 60 && (b - a) > 1e-10; ++iteration) {
        if (fc > fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + ratio * (b - a);
            fe = f(e);
        }
    }
    return maximize ? std::max(fc, fe) : -std::max(fc, fe);
}

}  // namespace detail

inline double visibility(const ChainConfig& config,
                         VisibilityConvention convention = VisibilityConvention::fixed_angle) {
    if (convention == VisibilityConvention::fixed_angle) {
        return coincidence_table(config).visibility();
    }
    constexpr int samples = 72;
    const double step = 2.0 * std::numbers::pi / samples;
    int best_max = 0;
    int best_min = 0;
    std::vector<double> values(samples);
    for (int k = 0; k < samples; ++k) {
        values[static_cast<std::size_t>(k)] = detail::correlated_sum(config, -std::numbers::pi + k * step);
        if (values[static_cast<std::size_t>(k)] > values[static_cast<std::size_t>(best_max)]) {
            best_max = k;
        }
        if (values[static_cast<std::size_t>(k)] < values[static_cast<std::size_t>(best_min)]) {
            best_min = k;
        }
    }
    auto around = [&](int k) { return -std::numbers::pi + k * step; };
    const double q_max = detail::refine_extremum(config, around(best_max) - step, around(best_max) + step, true);
    const double q_min = detail::refine_extremum(config, around(best_min) - step, around(best_min) + step, false);
    if (!(q_max + q_min > 0.0)) {
        throw DegenerateVisibilityError("no coincidences: Q_max + Q_min = 0");
    }
    return std::clamp((q_max - q_min) / (q_max + q_min), -1.0, 1.0);
}

struct TruncationCertificate {
    double visibility = 0.0;       // at the configured truncation t
    double visibility_next = 0.0;  // at t + 1
    double change = 0.0;           // |V(t+1) - V(t)|
    bool converged = false;        // change < tolerance
};

inline TruncationCertificate certify_truncation(const ChainConfig& config, double tolerance = 1e-6) {
    auto next = config;
    next.truncation = config.truncation + 1;
    TruncationCertificate certificate;
    certificate.visibility = visibility(config);
    certificate.visibility_next = visibility(next);
    certificate.change = std::fabs(certificate.visibility_next - certificate.visibility);
    certificate.converged = certificate.change < tolerance;
    return certificate;
}

}  // namespace swapqkd
