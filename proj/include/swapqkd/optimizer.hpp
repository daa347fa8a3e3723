#pragma once

// Key-rate maximization over (chi, eta0) at fixed N and distance.
//
// Coarse grid, then repeated finer grids centred on the incumbent, all at a
// reduced truncation; the incumbent is then hill-climbed on the finest grid
// at full truncation and the reported rate is the full-truncation value.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "swapqkd/errors.hpp"
#include "swapqkd/parallel.hpp"
#include "swapqkd/rate_metrics.hpp"
#include "swapqkd/swap_chain.hpp"

namespace swapqkd {

/// One operating point: everything needed to evaluate V and the key rate.
struct ResourceParams {
    double chi = 0.1;
    double eta0 = 0.1;
    double dark = 1e-5;
    LinkParams link;
    double delta_a = std::numbers::pi / 2.0;
    double delta_b = std::numbers::pi / 2.0;
    int n_swaps = 1;
    int truncation = 3;
    ClickPattern herald = kPsiPlusHerald;
    std::optional<double> eta;  // effective detector efficiency; overrides eta0 and the link

    double detector_efficiency() const { return eta ? *eta : chain_detector_efficiency(n_swaps, eta0, link); }

    ChainConfig chain() const {
        ChainConfig config = ChainConfig::uniform(n_swaps, chi, detector_efficiency(), dark, herald, truncation);
        config.delta_a = delta_a;
        config.delta_b = delta_b;
        return config;
    }

    /// eta entering the sifted rate: intrinsic efficiency with the fixed loss.
    double sifted_eta() const { return eta0 * channel_efficiency(0.0, 0.0, link.alpha0, link.base); }
};

inline KeyRateResult evaluate_key_rate(const ResourceParams& params) {
    params.link.validate();
    const double v = visibility(params.chain());
    auto result = net_key_rate(v,
                               log10_sifted_rate(params.n_swaps, params.chi, params.sifted_eta(), params.link.alpha,
                                                 params.link.length_km),
                               params.link.kappa);
    result.chi = params.chi;
    result.eta0 = params.eta0;
    result.dark = params.dark;
    result.n_swaps = params.n_swaps;
    result.length_km = params.link.length_km;
    return result;
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct OptimizationSpec {
    int n_swaps = 1;
    LinkParams link;
    Interval chi_range{0.01, 0.5};
    Interval eta0_range{0.05, 0.95};
    int coarse_points = 32;  // per axis
    int refine_points = 9;   // per axis, each refinement level
    int refinement_levels = 3;
    TradeOff trade_off;
    std::optional<double> fixed_dark;  // independent dark count instead of the trade-off
    int search_truncation = 2;
    int final_truncation = 3;
    int max_climb_steps = 200;
    int workers = 1;

    void validate() const {
        detail::require(n_swaps >= 1, "n_swaps must be at least 1");
        link.validate();
        detail::require(chi_range.lo > 0.0 && chi_range.lo <= chi_range.hi, "chi range must be a non-empty interval in (0, inf)");
        detail::require(eta0_range.lo > 0.0 && eta0_range.lo <= eta0_range.hi && eta0_range.hi <= 1.0,
                        "eta0 range must be a non-empty interval in (0, 1]");
        detail::require(coarse_points >= 1 && refine_points >= 3, "grid sizes too small");
        detail::require(refinement_levels >= 1, "refinement_levels must be at least 1");
        detail::require(search_truncation >= 1 && final_truncation >= 1, "truncations must be at least 1");
        if (fixed_dark) {
            detail::require(*fixed_dark >= 0.0 && *fixed_dark < 1.0, "dark-count probability must lie in [0, 1)");
        }
    }
};

struct OptimizationResult {
    double r_max = 0.0;
    double log10_r_max = -std::numeric_limits<double>::infinity();
    double chi_opt = 0.0;
    double eta_opt = 0.0;
    double dark_at_opt = 0.0;
    KeyRateResult at_opt;
    double chi_step = 0.0;  // finest grid steps
    double eta_step = 0.0;
    long evaluations = 0;
    bool converged = false;       // hill climb stopped at a local maximum
    bool boundary_bound = false;  // optimum on the edge of the search box
    bool no_key = false;          // zero rate everywhere searched
};

namespace detail {

struct Candidate {
    double chi = 0.0;
    double eta0 = 0.0;
    double log10_rate = -std::numeric_limits<double>::infinity();
    KeyRateResult result;
};

// Larger rate wins; ties go to smaller chi, then smaller eta0.
inline bool better(const Candidate& a, const Candidate& b) {
    if (a.log10_rate != b.log10_rate) {
        return a.log10_rate > b.log10_rate;
    }
    if (a.chi != b.chi) {
        return a.chi < b.chi;
    }
    return a.eta0 < b.eta0;
}

inline std::vector<double> grid_axis(double lo, double hi, int points) {
    if (points == 1 || lo == hi) {
        return {lo};
    }
    std::vector<double> axis(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        axis[static_cast<std::size_t>(k)] = k == points - 1 ? hi : lo + (hi - lo) * k / (points - 1);
    }
    return axis;
}

inline double axis_step(double lo, double hi, int points) {
    return (points <= 1 || lo == hi) ? 0.0 : (hi - lo) / (points - 1);
}

inline Candidate evaluate_candidate(const OptimizationSpec& spec, double chi, double eta0, int truncation) {
    Candidate candidate{chi, eta0};
    ResourceParams params;
    params.chi = chi;
    params.eta0 = eta0;
    params.link = spec.link;
    params.n_swaps = spec.n_swaps;
    params.truncation = truncation;
    if (spec.fixed_dark) {
        params.dark = *spec.fixed_dark;
    } else {
        const auto dark = ingaas_dark_count(eta0, spec.trade_off);
        if (!dark.physical) {
            return candidate;
        }
        params.dark = dark.value;
    }
    candidate.result = evaluate_key_rate(params);
    candidate.log10_rate = candidate.result.log10_r_net;
    return candidate;
}

inline Candidate scan(const OptimizationSpec& spec, const std::vector<double>& chis, const std::vector<double>& etas,
                      int truncation, long& evaluations) {
    std::vector<Candidate> results(chis.size() * etas.size());
    parallel_for(results.size(), spec.workers, [&](std::size_t k) {
        results[k] = evaluate_candidate(spec, chis[k / etas.size()], etas[k % etas.size()], truncation);
    });
    evaluations += static_cast<long>(results.size());
    Candidate best = results.front();
    for (const auto& candidate : results) {
        if (better(candidate, best)) {
            best = candidate;
        }
    }
    return best;
}

}  // namespace detail

inline OptimizationResult maximize_key_rate(const OptimizationSpec& spec) {
    spec.validate();
    OptimizationResult out;
    const Interval box_chi = spec.chi_range;
    const Interval box_eta = spec.eta0_range;

    double chi_step = detail::axis_step(box_chi.lo, box_chi.hi, spec.coarse_points);
    double eta_step = detail::axis_step(box_eta.lo, box_eta.hi, spec.coarse_points);
    auto best = detail::scan(spec, detail::grid_axis(box_chi.lo, box_chi.hi, spec.coarse_points),
                             detail::grid_axis(box_eta.lo, box_eta.hi, spec.coarse_points), spec.search_truncation,
                             out.evaluations);

    for (int level = 1; level <= spec.refinement_levels; ++level) {
        const double chi_lo = std::max(box_chi.lo, best.chi - chi_step);
        const double chi_hi = std::min(box_chi.hi, best.chi + chi_step);
        const double eta_lo = std::max(box_eta.lo, best.eta0 - eta_step);
        const double eta_hi = std::min(box_eta.hi, best.eta0 + eta_step);
        const double next_chi_step = 2.0 * chi_step / (spec.refine_points - 1);
        const double next_eta_step = 2.0 * eta_step / (spec.refine_points - 1);
        const int chi_points = chi_step == 0.0 ? 1 : static_cast<int>(std::lround((chi_hi - chi_lo) / next_chi_step)) + 1;
        const int eta_points = eta_step == 0.0 ? 1 : static_cast<int>(std::lround((eta_hi - eta_lo) / next_eta_step)) + 1;
        chi_step = next_chi_step;
        eta_step = next_eta_step;
        const auto refined = detail::scan(spec, detail::grid_axis(chi_lo, chi_hi, chi_points),
                                          detail::grid_axis(eta_lo, eta_hi, eta_points), spec.search_truncation,
                                          out.evaluations);
        if (detail::better(refined, best)) {
            best = refined;
        }
    }

    // Hill climb on the finest lattice at full truncation.
    auto current = detail::evaluate_candidate(spec, best.chi, best.eta0, spec.final_truncation);
    ++out.evaluations;
    out.converged = false;
    for (int step = 0; step < spec.max_climb_steps; ++step) {
        std::vector<std::pair<double, double>> moves;
        auto push = [&](double chi, double eta0) {
            if (chi >= box_chi.lo && chi <= box_chi.hi && eta0 >= box_eta.lo && eta0 <= box_eta.hi) {
                moves.emplace_back(chi, eta0);
            }
        };
        if (chi_step > 0.0) {
            push(current.chi - chi_step, current.eta0);
            push(current.chi + chi_step, current.eta0);
        }
        if (eta_step > 0.0) {
            push(current.chi, current.eta0 - eta_step);
            push(current.chi, current.eta0 + eta_step);
        }
        std::vector<detail::Candidate> neighbours(moves.size());
        parallel_for(moves.size(), spec.workers, [&](std::size_t k) {
            neighbours[k] = detail::evaluate_candidate(spec, moves[k].first, moves[k].second, spec.final_truncation);
        });
        out.evaluations += static_cast<long>(moves.size());
        const detail::Candidate* winner = nullptr;
        for (const auto& neighbour : neighbours) {
            if (neighbour.log10_rate > current.log10_rate && (!winner || detail::better(neighbour, *winner))) {
                winner = &neighbour;
            }
        }
        if (!winner) {
            out.converged = true;
            break;
        }
        current = *winner;
    }

    out.chi_opt = current.chi;
    out.eta_opt = current.eta0;
    out.at_opt = current.result;
    out.dark_at_opt = spec.fixed_dark ? *spec.fixed_dark : ingaas_dark_count(current.eta0, spec.trade_off).value;
    out.log10_r_max = current.log10_rate;
    out.r_max = std::isfinite(current.log10_rate) ? std::pow(10.0, current.log10_rate) : 0.0;
    out.no_key = !(out.r_max > 0.0) && !std::isfinite(best.log10_rate);
    out.chi_step = chi_step;
    out.eta_step = eta_step;
    auto on_edge = [](double value, const Interval& box, double step) {
        return step > 0.0 && (value - box.lo < 0.5 * step || box.hi - value < 0.5 * step);
    };
    out.boundary_bound = on_edge(out.chi_opt, box_chi, chi_step) || on_edge(out.eta_opt, box_eta, eta_step);
    return out;
}

struct UpperBoundResult {
    double r_upper = 0.0;
    double log10_r_upper = -std::numeric_limits<double>::infinity();
    double chi = 0.0;
    double eta0 = 0.0;
};

/// max of R_sifted over the coarse grid of the same search box.
inline UpperBoundResult upper_bound_rate(const OptimizationSpec& spec) {
    spec.validate();
    UpperBoundResult out;
    const auto chis = detail::grid_axis(spec.chi_range.lo, spec.chi_range.hi, spec.coarse_points);
    const auto etas = detail::grid_axis(spec.eta0_range.lo, spec.eta0_range.hi, spec.coarse_points);
    const double fixed_loss = channel_efficiency(0.0, 0.0, spec.link.alpha0, spec.link.base);
    bool first = true;
    for (double chi : chis) {
        for (double eta0 : etas) {
            if (!spec.fixed_dark && !ingaas_dark_count(eta0, spec.trade_off).physical) {
                continue;
            }
            const double value =
                log10_sifted_rate(spec.n_swaps, chi, eta0 * fixed_loss, spec.link.alpha, spec.link.length_km);
            if (first || value > out.log10_r_upper) {
                out = {std::pow(10.0, value), value, chi, eta0};
                first = false;
            }
        }
    }
    return out;
}

struct SweepPoint {
    double length_km = 0.0;
    std::optional<OptimizationResult> result;
    std::string error;  // set when the point failed
};

/// Independent optimizations per distance, in input order. Failures are
/// recorded per point.
inline std::vector<SweepPoint> sweep_distance(const OptimizationSpec& spec_template,
                                              const std::vector<double>& lengths_km) {
    std::vector<SweepPoint> points(lengths_km.size());
    for (std::size_t k = 0; k < lengths_km.size(); ++k) {
        points[k].length_km = lengths_km[k];
        auto spec = spec_template;
        spec.link.length_km = lengths_km[k];
        try {
            points[k].result = maximize_key_rate(spec);
        } catch (const std::exception& error) {
            points[k].error = error.what();
        }
    }
    return points;
}

}  // namespace swapqkd
