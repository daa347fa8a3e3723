#pragma once

// Brute-force truncated Fock-space simulation of PDC-based entanglement
// swapping. Independent of the closed-form evaluator in swap_chain.hpp and
// used to validate it.
//
// Mode layout: each spatial mode carries an H and a V polarization mode.
// Occupation vectors are ordered spatial-major, polarization-minor, in the
// order of FockState::spatial_modes(): [m0_H, m0_V, m1_H, m1_V, ...].
//
// Linear-optics conventions:
//   beam splitter  a1^+ -> (b1^+ + i b2^+)/sqrt2,  a2^+ -> (i b1^+ + b2^+)/sqrt2
//   rotator(delta) aH^+ -> cos(delta/2) aH^+ + i sin(delta/2) aV^+
//                  aV^+ -> i sin(delta/2) aH^+ + cos(delta/2) aV^+
//
// A station's detectors are (i, j, k, l) = (port1 H, port1 V, port2 V,
// port2 H), where port1/port2 are the first/second beam-splitter modes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "swapqkd/coincidence.hpp"
#include "swapqkd/detector_model.hpp"
#include "swapqkd/errors.hpp"
#include "swapqkd/numeric.hpp"

namespace swapqkd::fock {

using Amplitude = std::complex<double>;
using OccupationVector = std::vector<std::uint8_t>;

enum class Polarization : int { H = 0, V = 1 };

inline constexpr double kPruneThreshold = 1e-15;

class FockState {
public:
    FockState(std::vector<int> spatial_modes, int n_max)
        : spatial_modes_(std::move(spatial_modes)), n_max_(n_max) {
        swapqkd::detail::require(n_max_ >= 1, "truncation n_max must be at least 1");
        swapqkd::detail::require(n_max_ <= 255, "truncation n_max must fit an 8-bit occupation");
        auto sorted = spatial_modes_;
        std::sort(sorted.begin(), sorted.end());
        swapqkd::detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                        "spatial mode labels must be distinct");
    }

    static FockState vacuum(std::vector<int> spatial_modes, int n_max) {
        FockState state(std::move(spatial_modes), n_max);
        state.amplitudes_.emplace(OccupationVector(state.mode_count(), 0), Amplitude{1.0, 0.0});
        return state;
    }

    const std::vector<int>& spatial_modes() const noexcept { return spatial_modes_; }
    std::size_t mode_count() const noexcept { return 2 * spatial_modes_.size(); }
    int n_max() const noexcept { return n_max_; }
    double norm_deficit() const noexcept { return norm_deficit_; }
    const std::map<OccupationVector, Amplitude>& amplitudes() const noexcept { return amplitudes_; }

    Amplitude amplitude(const OccupationVector& occupation) const {
        const auto it = amplitudes_.find(occupation);
        return it == amplitudes_.end() ? Amplitude{} : it->second;
    }

    double squared_norm() const {
        CompensatedSum sum;
        for (const auto& [occupation, amplitude] : amplitudes_) {
            sum.add(std::norm(amplitude));
        }
        return sum.value();
    }

    bool has_mode(int spatial_mode) const {
        return std::find(spatial_modes_.begin(), spatial_modes_.end(), spatial_mode) != spatial_modes_.end();
    }

    std::size_t position(int spatial_mode) const {
        const auto it = std::find(spatial_modes_.begin(), spatial_modes_.end(), spatial_mode);
        swapqkd::detail::require(it != spatial_modes_.end(), "spatial mode " + std::to_string(spatial_mode) + " is not in the state");
        return static_cast<std::size_t>(it - spatial_modes_.begin());
    }

    std::size_t index(int spatial_mode, Polarization polarization) const {
        return 2 * position(spatial_mode) + static_cast<std::size_t>(polarization);
    }

    /// Same amplitudes under a different per-mode cap. Raising the cap is
    /// exact; lowering it moves the excess into norm_deficit.
    FockState with_truncation(int n_max) const {
        FockState out(spatial_modes_, n_max);
        out.norm_deficit_ = norm_deficit_;
        for (const auto& [occupation, amplitude] : amplitudes_) {
            out.insert_or_drop(occupation, amplitude);
        }
        return out;
    }

    // Mutators used by the free functions below.
    void set_norm_deficit(double deficit) noexcept { norm_deficit_ = deficit; }
    void add_norm_deficit(double mass) noexcept { norm_deficit_ += mass; }
    std::map<OccupationVector, Amplitude>& mutable_amplitudes() noexcept { return amplitudes_; }

    /// Stores the amplitude, or books its probability as truncation loss
    /// when a count exceeds n_max or the magnitude is below the prune floor.
    void insert_or_drop(const OccupationVector& occupation, Amplitude amplitude) {
        const bool over = std::any_of(occupation.begin(), occupation.end(),
                                      [this](std::uint8_t n) { return n > n_max_; });
        if (over || std::abs(amplitude) < kPruneThreshold) {
            norm_deficit_ += std::norm(amplitude);
            return;
        }
        amplitudes_[occupation] += amplitude;
    }

private:
    std::vector<int> spatial_modes_;
    int n_max_;
    double norm_deficit_ = 0.0;
    std::map<OccupationVector, Amplitude> amplitudes_;
};

/// Two-mode polarization-entangled PDC state on spatial modes (mode_a, mode_b):
///   sech^2(chi) sum_{nH,nV} (i tanh chi)^{nH+nV} |nH nV>_a |nH nV>_b,
/// with nH, nV <= n_max. The discarded tail is recorded analytically.
inline FockState pdc_state(double chi, int n_max, int mode_a = 0, int mode_b = 1) {
    swapqkd::detail::require(chi >= 0.0, "chi must be non-negative");
    swapqkd::detail::require(n_max >= 1, "truncation n_max must be at least 1");
    FockState state({mode_a, mode_b}, n_max);
    const double tau = std::tanh(chi);
    const double sech2 = 1.0 / (std::cosh(chi) * std::cosh(chi));
    const Amplitude itau{0.0, tau};
    auto& amplitudes = state.mutable_amplitudes();
    for (int nh = 0; nh <= n_max; ++nh) {
        for (int nv = 0; nv <= n_max; ++nv) {
            const Amplitude amplitude = sech2 * std::pow(itau, nh + nv);
            if (nh + nv > 0 && std::abs(amplitude) < kPruneThreshold) {
                continue;
            }
            const auto h = static_cast<std::uint8_t>(nh);
            const auto v = static_cast<std::uint8_t>(nv);
            amplitudes.emplace(OccupationVector{h, v, h, v}, amplitude);
        }
    }
    // Kept mass per polarization is 1 - tau^{2(n_max+1)}; deficit = 2x - x^2.
    const double x = std::pow(tau, 2.0 * (n_max + 1));
    state.set_norm_deficit(2.0 * x - x * x);
    return state;
}

/// Product state on the union of the two mode sets (a's modes first).
inline FockState tensor(const FockState& a, const FockState& b) {
    for (int mode : b.spatial_modes()) {
        if (a.has_mode(mode)) {
            throw DomainError("tensor: spatial mode " + std::to_string(mode) + " appears in both factors");
        }
    }
    swapqkd::detail::require(a.n_max() == b.n_max(), "tensor: factors must share the truncation n_max");
    auto modes = a.spatial_modes();
    modes.insert(modes.end(), b.spatial_modes().begin(), b.spatial_modes().end());
    FockState out(std::move(modes), a.n_max());
    const double kept_a = a.squared_norm();
    const double kept_b = b.squared_norm();
    // 1 - (1 - da)(1 - db), written to avoid cancellation.
    out.set_norm_deficit(a.norm_deficit() * kept_b + b.norm_deficit() * kept_a +
                         a.norm_deficit() * b.norm_deficit());
    for (const auto& [occ_a, amp_a] : a.amplitudes()) {
        for (const auto& [occ_b, amp_b] : b.amplitudes()) {
            OccupationVector occupation = occ_a;
            occupation.insert(occupation.end(), occ_b.begin(), occ_b.end());
            out.insert_or_drop(occupation, amp_a * amp_b);
        }
    }
    return out;
}

namespace detail {

// Output amplitudes of |n1, n2> under
//   a1^+ -> c b1^+ + i s b2^+,  a2^+ -> i s b1^+ + c b2^+,
// indexed by the b1 count m1 (m2 = n1 + n2 - m1).
inline std::vector<Amplitude> mode_pair_expansion(int n1, int n2, double c, double s) {
    const int total = n1 + n2;
    std::vector<CompensatedComplexSum> sums(static_cast<std::size_t>(total) + 1);
    const Amplitude is{0.0, s};
    for (int u = 0; u <= n1; ++u) {
        for (int w = 0; w <= n2; ++w) {
            const Amplitude term = static_cast<double>(binomial(n1, u) * binomial(n2, w)) *
                                   std::pow(c, u + n2 - w) * std::pow(is, n1 - u + w);
            sums[static_cast<std::size_t>(u + w)].add(term);
        }
    }
    std::vector<Amplitude> out(static_cast<std::size_t>(total) + 1);
    const double inv_norm = 1.0 / std::sqrt(factorial(n1) * factorial(n2));
    for (int m1 = 0; m1 <= total; ++m1) {
        out[static_cast<std::size_t>(m1)] =
            sums[static_cast<std::size_t>(m1)].value() * inv_norm * std::sqrt(factorial(m1) * factorial(total - m1));
    }
    return out;
}

inline FockState apply_mode_pair(const FockState& state, std::size_t index1, std::size_t index2, double c,
                                 double s) {
    FockState out(state.spatial_modes(), state.n_max());
    out.set_norm_deficit(state.norm_deficit());
    std::map<std::pair<int, int>, std::vector<Amplitude>> cache;
    std::map<OccupationVector, CompensatedComplexSum> sums;
    for (const auto& [occupation, amplitude] : state.amplitudes()) {
        const int n1 = occupation[index1];
        const int n2 = occupation[index2];
        auto [it, inserted] = cache.try_emplace({n1, n2});
        if (inserted) {
            it->second = mode_pair_expansion(n1, n2, c, s);
        }
        const auto& expansion = it->second;
        OccupationVector target = occupation;
        for (int m1 = 0; m1 <= n1 + n2; ++m1) {
            const Amplitude coefficient = expansion[static_cast<std::size_t>(m1)];
            if (coefficient == Amplitude{}) {
                continue;
            }
            // Occupations above 255 cannot be stored; they are above any cap.
            if (m1 > 255 || n1 + n2 - m1 > 255) {
                out.add_norm_deficit(std::norm(coefficient * amplitude));
                continue;
            }
            target[index1] = static_cast<std::uint8_t>(m1);
            target[index2] = static_cast<std::uint8_t>(n1 + n2 - m1);
            sums[target].add(coefficient * amplitude);
        }
    }
    for (const auto& [occupation, sum] : sums) {
        out.insert_or_drop(occupation, sum.value());
    }
    return out;
}

}  // namespace detail

/// 50:50 beam splitter between two spatial modes, applied identically to
/// the H and V submodes. Mode `first` becomes port 1, `second` port 2.
inline FockState apply_beam_splitter(const FockState& state, int first, int second) {
    swapqkd::detail::require(first != second, "beam splitter needs two distinct spatial modes");
    const std::size_t p1 = state.position(first);
    const std::size_t p2 = state.position(second);
    const double c = std::numbers::sqrt2 / 2.0;
    auto out = detail::apply_mode_pair(state, 2 * p1, 2 * p2, c, c);
    return detail::apply_mode_pair(out, 2 * p1 + 1, 2 * p2 + 1, c, c);
}

/// Polarization rotator at angle delta (radians) on one spatial mode.
inline FockState apply_polarization_rotator(const FockState& state, int spatial_mode, double delta) {
    const std::size_t p = state.position(spatial_mode);
    return detail::apply_mode_pair(state, 2 * p, 2 * p + 1, std::cos(delta / 2.0), std::sin(delta / 2.0));
}

struct Projection {
    FockState outer;           // normalized conditional state on the remaining modes
    double probability = 0.0;  // <Xi| Pi_ijkl |Xi>; zero flags an impossible outcome
};

/// Ideal photon counting on the station (port1, port2), with detector counts
/// (i, j, k, l) = (port1 H, port1 V, port2 V, port2 H).
inline Projection project_inner(const FockState& state, int port1, int port2, const PhotonCountPattern& counts) {
    for (int m = 0; m < 4; ++m) {
        swapqkd::detail::require(counts[m] >= 0, "photon counts must be non-negative");
        if (counts[m] > state.n_max()) {
            throw TruncationError("projection count exceeds the state's truncation n_max",
                                  std::string(1, "ijkl"[m]));
        }
    }
    const std::size_t p1 = state.position(port1);
    const std::size_t p2 = state.position(port2);
    const std::size_t i_index = 2 * p1;
    const std::size_t j_index = 2 * p1 + 1;
    const std::size_t k_index = 2 * p2 + 1;
    const std::size_t l_index = 2 * p2;

    std::vector<int> remaining;
    std::vector<std::size_t> keep;
    for (std::size_t m = 0; m < state.spatial_modes().size(); ++m) {
        if (m == p1 || m == p2) {
            continue;
        }
        remaining.push_back(state.spatial_modes()[m]);
        keep.push_back(2 * m);
        keep.push_back(2 * m + 1);
    }

    FockState outer(remaining, state.n_max());
    CompensatedSum probability;
    auto& amplitudes = outer.mutable_amplitudes();
    for (const auto& [occupation, amplitude] : state.amplitudes()) {
        if (occupation[i_index] != counts.i || occupation[j_index] != counts.j ||
            occupation[k_index] != counts.k || occupation[l_index] != counts.l) {
            continue;
        }
        OccupationVector reduced;
        reduced.reserve(keep.size());
        for (std::size_t index : keep) {
            reduced.push_back(occupation[index]);
        }
        amplitudes[reduced] += amplitude;
        probability.add(std::norm(amplitude));
    }
    Projection result{std::move(outer), probability.value()};
    if (result.probability > 0.0) {
        const double scale = 1.0 / std::sqrt(result.probability);
        for (auto& [occupation, amplitude] : result.outer.mutable_amplitudes()) {
            amplitude *= scale;
        }
    } else {
        result.outer.mutable_amplitudes().clear();
    }
    return result;
}

struct CircuitParams {
    double chi = 0.1;
    double delta_a = std::numbers::pi / 2.0;
    double delta_b = std::numbers::pi / 2.0;
    int n_max = 3;  // truncation t on every inner detector count

    void validate() const {
        swapqkd::detail::require(chi >= 0.0, "chi must be non-negative");
        swapqkd::detail::require(n_max >= 1, "truncation must be at least 1");
    }
};

struct OracleResult {
    CoincidenceTable table;
    std::map<PhotonCountPattern, double> outer_counts;  // P(i'j'k'l' | heralds)
    double evidence = 0.0;                              // P(heralds), within truncation
    double norm_deficit = 0.0;                          // mass lost to the source cap
};

namespace detail {

// Outer mixture -> rotated ideal counts (i', j', k', l') =
// (A_H, A_V, B_V, B_H), accumulated with the posterior weights.
inline void accumulate_outer(const FockState& outer, int mode_a, int mode_b, double delta_a, double delta_b,
                             double weight, std::map<PhotonCountPattern, CompensatedSum>& sums) {
    // Rotations can concentrate both polarizations in one submode.
    const auto widened = outer.with_truncation(std::min(255, 2 * outer.n_max()));
    const auto rotated =
        apply_polarization_rotator(apply_polarization_rotator(widened, mode_a, delta_a), mode_b, delta_b);
    const std::size_t a_h = rotated.index(mode_a, Polarization::H);
    const std::size_t a_v = rotated.index(mode_a, Polarization::V);
    const std::size_t b_h = rotated.index(mode_b, Polarization::H);
    const std::size_t b_v = rotated.index(mode_b, Polarization::V);
    for (const auto& [occupation, amplitude] : rotated.amplitudes()) {
        const PhotonCountPattern counts{occupation[a_h], occupation[a_v], occupation[b_v], occupation[b_h]};
        sums[counts].add(weight * std::norm(amplitude));
    }
}

inline OracleResult finish(std::map<PhotonCountPattern, CompensatedSum>& sums, double eta, double dark,
                           double evidence, double deficit) {
    OracleResult result;
    for (const auto& [counts, sum] : sums) {
        result.outer_counts.emplace(counts, sum.value());
    }
    result.table = CoincidenceTable::from_values(fold_outer_detectors(result.outer_counts, eta, dark));
    result.evidence = evidence;
    result.norm_deficit = deficit;
    result.table.evidence = evidence;
    result.table.truncation_deficit = deficit;
    return result;
}

}  // namespace detail

/// Single swap: sources (a, b) and (c, d), beam splitter on (b, c), ideal
/// inner counts up to n_max, Bayes mixing with the noisy inner clicks, then
/// rotators on the outer modes a (delta_a) and d (delta_b) and noisy outer
/// detection.
///
/// Sources are built with a per-mode cap of 2 n_max so every term with inner
/// counts <= n_max is represented exactly.
inline OracleResult oracle_single_swap(const CircuitParams& params, const DetectorParams& detector,
                                       const ClickPattern& inner) {
    params.validate();
    detector.validate();
    constexpr int a = 0, b = 1, c = 2, d = 3;
    const int cap = 2 * params.n_max;
    auto state = tensor(pdc_state(params.chi, cap, a, b), pdc_state(params.chi, cap, c, d));
    state = apply_beam_splitter(state, b, c);

    std::map<PhotonCountPattern, double> prior;
    std::map<PhotonCountPattern, FockState> conditional;
    const int t = params.n_max;
    for (int i = 0; i <= t; ++i) {
        for (int j = 0; j <= t; ++j) {
            for (int k = 0; k <= t; ++k) {
                for (int l = 0; l <= t; ++l) {
                    const PhotonCountPattern counts{i, j, k, l};
                    auto projection = project_inner(state, b, c, counts);
                    prior.emplace(counts, projection.probability);
                    if (projection.probability > 0.0) {
                        conditional.emplace(counts, std::move(projection.outer));
                    }
                }
            }
        }
    }
    const auto posterior = bayes_invert(prior, inner, detector);

    std::map<PhotonCountPattern, CompensatedSum> sums;
    for (const auto& [counts, weight] : posterior.probabilities) {
        if (weight == 0.0) {
            continue;
        }
        detail::accumulate_outer(conditional.at(counts), a, d, params.delta_a, params.delta_b, weight, sums);
    }
    return detail::finish(sums, detector.eta(), detector.dark, posterior.evidence, state.norm_deficit());
}

/// N concatenated swaps (2N sources, 2N - 1 stations), brute force.
///
/// Swap n (1-based, counted from B) owns sources (L_n, c_n) and (b_n, R_n)
/// and primary station n on (b_n, c_n). Connecting station N + n joins R_n
/// and L_{n+1}. B is L_1 and A is R_N. `heralds` lists the click patterns
/// of stations 1..2N-1 in that order. Exponential in N; intended for
/// N <= 2 at small truncation.
inline OracleResult oracle_chain(int n_swaps, const CircuitParams& params, const DetectorParams& detector,
                                 const std::vector<ClickPattern>& heralds) {
    params.validate();
    detector.validate();
    swapqkd::detail::require(n_swaps >= 1, "n_swaps must be at least 1");
    swapqkd::detail::require(static_cast<int>(heralds.size()) == 2 * n_swaps - 1,
                             "one herald pattern per station is required");
    const int t = params.n_max;
    const int cap = 2 * t;
    auto L = [](int n) { return 4 * (n - 1) + 0; };
    auto C = [](int n) { return 4 * (n - 1) + 1; };
    auto B = [](int n) { return 4 * (n - 1) + 2; };
    auto R = [](int n) { return 4 * (n - 1) + 3; };

    // Station port pairs in herald order.
    std::vector<std::pair<int, int>> stations;
    for (int n = 1; n <= n_swaps; ++n) {
        stations.emplace_back(B(n), C(n));
    }
    for (int n = 1; n < n_swaps; ++n) {
        stations.emplace_back(R(n), L(n + 1));
    }

    auto prune_station = [t](FockState& state, int port1, int port2) {
        const std::size_t p1 = state.position(port1);
        const std::size_t p2 = state.position(port2);
        auto& amplitudes = state.mutable_amplitudes();
        for (auto it = amplitudes.begin(); it != amplitudes.end();) {
            const auto& occ = it->first;
            if (occ[2 * p1] > t || occ[2 * p1 + 1] > t || occ[2 * p2] > t || occ[2 * p2 + 1] > t) {
                state.add_norm_deficit(std::norm(it->second));
                it = amplitudes.erase(it);
            } else {
                ++it;
            }
        }
    };

    FockState state = FockState::vacuum({}, cap);
    for (int n = 1; n <= n_swaps; ++n) {
        auto swap = tensor(pdc_state(params.chi, cap, L(n), C(n)), pdc_state(params.chi, cap, B(n), R(n)));
        swap = apply_beam_splitter(swap, B(n), C(n));
        prune_station(swap, B(n), C(n));
        state = tensor(state, swap);
        if (n > 1) {
            state = apply_beam_splitter(state, R(n - 1), L(n));
            prune_station(state, R(n - 1), L(n));
        }
    }

    // Group amplitudes by the full inner count record.
    std::vector<std::array<std::size_t, 4>> detector_index;
    for (const auto& [port1, port2] : stations) {
        const std::size_t p1 = state.position(port1);
        const std::size_t p2 = state.position(port2);
        detector_index.push_back({2 * p1, 2 * p1 + 1, 2 * p2 + 1, 2 * p2});
    }
    const int mode_a = R(n_swaps);
    const int mode_b = L(1);
    const std::size_t pa = state.position(mode_a);
    const std::size_t pb = state.position(mode_b);

    std::map<std::vector<std::uint8_t>, FockState> buckets;
    for (const auto& [occupation, amplitude] : state.amplitudes()) {
        std::vector<std::uint8_t> record;
        record.reserve(4 * detector_index.size());
        for (const auto& indices : detector_index) {
            for (std::size_t index : indices) {
                record.push_back(occupation[index]);
            }
        }
        auto it = buckets.find(record);
        if (it == buckets.end()) {
            it = buckets.emplace(record, FockState({mode_a, mode_b}, cap)).first;
        }
        const OccupationVector outer{occupation[2 * pa], occupation[2 * pa + 1], occupation[2 * pb],
                                     occupation[2 * pb + 1]};
        it->second.mutable_amplitudes()[outer] += amplitude;
    }

    CompensatedSum evidence;
    std::vector<std::pair<double, const FockState*>> weighted;
    bool possible = false;
    for (const auto& [record, outer] : buckets) {
        const double probability = outer.squared_norm();
        double likelihood = 1.0;
        for (std::size_t s = 0; s < heralds.size(); ++s) {
            const PhotonCountPattern counts{record[4 * s], record[4 * s + 1], record[4 * s + 2], record[4 * s + 3]};
            likelihood *= p_pattern(heralds[s], counts, detector);
        }
        if (probability > 0.0 && likelihood > 0.0) {
            possible = true;
        }
        evidence.add(likelihood * probability);
        weighted.emplace_back(likelihood, &outer);
    }
    if (!possible) {
        throw ZeroEvidenceError("herald record is impossible under the model");
    }
    const double total = evidence.value();
    if (!(total > 1e-300)) {
        throw EvidenceUnderflowError("herald evidence underflowed");
    }
    std::map<PhotonCountPattern, CompensatedSum> sums;
    for (const auto& [likelihood, outer] : weighted) {
        if (likelihood == 0.0) {
            continue;
        }
        // Unnormalized bucket state: weight by likelihood / evidence only.
        detail::accumulate_outer(*outer, mode_a, mode_b, params.delta_a, params.delta_b, likelihood / total, sums);
    }
    return detail::finish(sums, detector.eta(), detector.dark, total, state.norm_deficit());
}

}  // namespace swapqkd::fock
