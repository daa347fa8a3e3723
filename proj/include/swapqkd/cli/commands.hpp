#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "swapqkd/cli/config.hpp"
#include "swapqkd/cli/format.hpp"
#include "swapqkd/fock_oracle.hpp"
#include "swapqkd/optimizer.hpp"
#include "swapqkd/parallel.hpp"
#include "swapqkd/rate_metrics.hpp"
#include "swapqkd/swap_chain.hpp"

namespace swapqkd::cli {

enum ExitCode : int {
    kOk = 0,
    kDomainError = 1,
    kParseError = 2,
    kPointFailure = 3,
    kOracleMismatch = 4,
};

struct CommandOutput {
    Table table;
    int exit_code = kOk;
    nlohmann::json summary = nlohmann::json::object();
};

inline const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids{"coincidence-vs-delta-b",      "visibility-vs-chi",
                                              "visibility-vs-distance",      "perfect-detector-visibility",
                                              "keyrate-vs-distance",         "tgw-comparison"};
    return ids;
}

namespace detail {

inline LinkParams link_of(const RunConfig& c) {
    LinkParams link;
    link.alpha = c.alpha;
    link.alpha0 = c.alpha0;
    link.length_km = c.length_km;
    link.kappa = c.kappa;
    link.base = c.loss_base == "e" ? LossBase::e : LossBase::ten;
    link.validate();
    return link;
}

inline double dark_of(const RunConfig& c, double eta0) {
    if (c.dark) {
        return *c.dark;
    }
    const auto dark = ingaas_dark_count(eta0, {c.trade_off->a, c.trade_off->b});
    swapqkd::detail::require(dark.physical, "trade-off dark count is >= 1 at this eta0: unphysical operating point");
    return dark.value;
}

inline ResourceParams resource_of(const RunConfig& c, int n_swaps) {
    c.validate();
    ResourceParams p;
    p.chi = c.chi;
    p.eta0 = c.eta0;
    p.eta = c.eta;
    p.dark = dark_of(c, c.eta0);
    p.link = link_of(c);
    p.delta_a = c.delta_a * std::numbers::pi;
    p.delta_b = c.delta_b * std::numbers::pi;
    p.n_swaps = n_swaps;
    p.truncation = c.truncation;
    p.herald = ClickPattern::parse(c.herald);
    return p;
}

inline OptimizationSpec optimization_of(const RunConfig& c, int n_swaps) {
    c.validate();
    OptimizationSpec spec;
    spec.n_swaps = n_swaps;
    spec.link = link_of(c);
    spec.chi_range = {c.optimizer.chi_min, c.optimizer.chi_max};
    spec.eta0_range = {c.optimizer.eta0_min, c.optimizer.eta0_max};
    spec.coarse_points = c.optimizer.coarse_points;
    spec.refine_points = c.optimizer.refine_points;
    spec.refinement_levels = c.optimizer.refinement_levels;
    spec.search_truncation = c.optimizer.search_truncation;
    spec.final_truncation = c.optimizer.final_truncation;
    if (c.trade_off) {
        spec.trade_off = {c.trade_off->a, c.trade_off->b};
    } else {
        spec.fixed_dark = *c.dark;
    }
    spec.workers = c.workers;
    return spec;
}

inline std::optional<double> tgw_or_none(double alpha, double length_km) {
    if (!(alpha * length_km > 0.0)) {
        return std::nullopt;
    }
    return tgw_bound(alpha, length_km);
}

inline std::string opt_number(const std::optional<double>& x) { return x ? format_number(*x) : "NA"; }

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline const std::vector<std::string>& key_rate_columns() {
    static const std::vector<std::string> columns{
        "n_swaps",   "chi",     "eta0",           "eta",   "dark",        "alpha",     "alpha0",
        "length_km", "delta_a", "delta_b",        "truncation", "kappa",  "visibility", "qber",
        "r_sifted",  "log10_r_sifted", "r_shor_preskill", "r_net", "log10_r_net", "r_tgw",
        "truncation_deficit", "wall_time_s", "status"};
    return columns;
}

inline std::vector<std::string> key_rate_row(const RunConfig& c, int n_swaps) {
    Stopwatch clock;
    const auto p = resource_of(c, n_swaps);
    const auto evaluation = evaluate_chain(p.chain(), true);
    const double v = evaluation.table.visibility();
    auto rate = net_key_rate(v,
                             log10_sifted_rate(n_swaps, p.chi, p.sifted_eta(), p.link.alpha, p.link.length_km),
                             p.link.kappa);
    const double elapsed = clock.seconds();
    return {format_number(n_swaps),
            format_number(p.chi),
            format_number(p.eta0),
            format_number(p.detector_efficiency()),
            format_number(p.dark),
            format_number(p.link.alpha),
            format_number(p.link.alpha0),
            format_number(p.link.length_km),
            format_number(c.delta_a),
            format_number(c.delta_b),
            format_number(p.truncation),
            format_number(p.link.kappa),
            format_number(rate.visibility),
            format_number(rate.qber),
            format_number(rate.r_sifted),
            format_number(rate.log10_r_sifted),
            format_number(rate.r_shor_preskill),
            format_number(rate.r_net),
            format_number(rate.log10_r_net),
            opt_number(tgw_or_none(p.link.alpha, p.link.length_km)),
            format_number(evaluation.table.truncation_deficit),
            c.timing ? format_number(elapsed) : "NA",
            "ok"};
}

inline std::vector<std::string> failed_row(const RunConfig& c, int n_swaps, const std::string& message) {
    std::vector<std::string> row(key_rate_columns().size(), "NA");
    row[0] = format_number(n_swaps);
    row[1] = format_number(c.chi);
    row[2] = format_number(c.eta0);
    row[7] = format_number(c.length_km);
    row.back() = "error: " + message;
    return row;
}

inline void set_parameter(RunConfig& c, const std::string& name, double value) {
    if (name == "chi") c.chi = value;
    else if (name == "eta0") c.eta0 = value;
    else if (name == "eta") c.eta = value;
    else if (name == "dark") c.dark = value;
    else if (name == "alpha") c.alpha = value;
    else if (name == "alpha0") c.alpha0 = value;
    else if (name == "length_km") c.length_km = value;
    else if (name == "delta_a") c.delta_a = value;
    else if (name == "delta_b") c.delta_b = value;
    else if (name == "kappa") c.kappa = value;
    else throw DomainError("unknown sweep parameter '" + name + "'");
}

}  // namespace detail

inline CommandOutput cmd_visibility(const RunConfig& c) {
    CommandOutput out;
    out.table.columns = {"n_swaps",    "chi",   "eta",   "dark",     "delta_a",           "delta_b",
                         "truncation", "visibility", "q_max", "q_min", "log10_evidence", "truncation_deficit",
                         "visibility_next_truncation", "truncation_converged", "wall_time_s"};
    for (int n : c.n_swaps) {
        detail::Stopwatch clock;
        const auto p = detail::resource_of(c, n);
        const auto config = p.chain();
        const auto evaluation = evaluate_chain(config, true);
        const double v = evaluation.table.visibility();
        auto next = config;
        next.truncation += 1;
        const double v_next = visibility(next);
        out.table.add({format_number(n), format_number(config.chi), format_number(config.eta),
                       format_number(config.dark), format_number(c.delta_a), format_number(c.delta_b),
                       format_number(config.truncation), format_number(v), format_number(evaluation.table.q_max),
                       format_number(evaluation.table.q_min), format_number(evaluation.log10_evidence),
                       format_number(evaluation.table.truncation_deficit), format_number(v_next),
                       format_bool(std::fabs(v_next - v) < 1e-6), c.timing ? format_number(clock.seconds()) : "NA"});
    }
    return out;
}

inline CommandOutput cmd_coincidence(const RunConfig& c) {
    CommandOutput out;
    out.table.columns = {"n_swaps", "delta_a", "delta_b", "outer_pattern", "probability"};
    for (int n : c.n_swaps) {
        const auto table = coincidence_table(detail::resource_of(c, n).chain());
        for (int k = 0; k < 16; ++k) {
            const auto pattern = ClickPattern::from_index(k);
            out.table.add({format_number(n), format_number(c.delta_a), format_number(c.delta_b), pattern.str(),
                           format_number(table.q(pattern))});
        }
    }
    return out;
}

inline CommandOutput cmd_keyrate(const RunConfig& c) {
    CommandOutput out;
    out.table.columns = detail::key_rate_columns();
    for (int n : c.n_swaps) {
        out.table.add(detail::key_rate_row(c, n));
    }
    return out;
}

inline CommandOutput cmd_sweep(const RunConfig& c) {
    swapqkd::detail::require(c.sweep.has_value() && !c.sweep->parameter.empty(),
                             "sweep needs --sweep-param, --from, --to and --steps");
    {
        RunConfig probe = c;
        detail::set_parameter(probe, c.sweep->parameter, c.sweep->from);
    }
    CommandOutput out;
    out.table.columns = detail::key_rate_columns();
    out.table.columns.insert(out.table.columns.begin(), "sweep_value");
    const auto values = c.sweep->values();
    const std::size_t per_value = c.n_swaps.size();
    std::vector<std::vector<std::string>> rows(values.size() * per_value);
    std::vector<char> failed(rows.size(), 0);
    parallel_for(rows.size(), c.workers, [&](std::size_t k) {
        RunConfig point = c;
        const double value = values[k / per_value];
        const int n = c.n_swaps[k % per_value];
        std::vector<std::string> row;
        try {
            detail::set_parameter(point, c.sweep->parameter, value);
            row = detail::key_rate_row(point, n);
        } catch (const std::exception& error) {
            row = detail::failed_row(point, n, error.what());
            failed[k] = 1;
        }
        row.insert(row.begin(), format_number(value));
        rows[k] = std::move(row);
    });
    int failures = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.table.add(std::move(rows[k]));
        failures += failed[k];
    }
    out.summary["failed_points"] = failures;
    if (failures > 0) {
        out.exit_code = kPointFailure;
    }
    return out;
}

namespace detail {

inline const std::vector<std::string>& optimize_columns() {
    static const std::vector<std::string> columns{
        "n_swaps", "length_km", "alpha", "alpha0", "r_max", "log10_r_max", "chi_opt", "eta_opt", "dark_opt",
        "visibility", "qber", "r_upper", "log10_r_upper", "r_tgw", "evaluations", "converged", "boundary_bound",
        "no_key", "wall_time_s", "status"};
    return columns;
}

inline std::vector<std::string> optimize_row(const RunConfig& c, int n) {
    Stopwatch clock;
    const auto spec = optimization_of(c, n);
    const auto result = maximize_key_rate(spec);
    const auto upper = upper_bound_rate(spec);
    return {format_number(n),
            format_number(spec.link.length_km),
            format_number(spec.link.alpha),
            format_number(spec.link.alpha0),
            format_number(result.r_max),
            format_number(result.log10_r_max),
            format_number(result.chi_opt),
            format_number(result.eta_opt),
            format_number(result.dark_at_opt),
            format_number(result.at_opt.visibility),
            format_number(result.at_opt.qber),
            format_number(upper.r_upper),
            format_number(upper.log10_r_upper),
            opt_number(tgw_or_none(spec.link.alpha, spec.link.length_km)),
            format_number(result.evaluations),
            format_bool(result.converged),
            format_bool(result.boundary_bound),
            format_bool(result.no_key),
            c.timing ? format_number(clock.seconds()) : "NA",
            "ok"};
}

}  // namespace detail

inline CommandOutput cmd_optimize(const RunConfig& c) {
    CommandOutput out;
    out.table.columns = detail::optimize_columns();
    for (int n : c.n_swaps) {
        out.table.add(detail::optimize_row(c, n));
    }
    return out;
}

inline CommandOutput cmd_tgw(const RunConfig& c) {
    CommandOutput out;
    out.table.columns = {"alpha", "length_km", "r_tgw"};
    std::vector<double> lengths{c.length_km};
    if (c.sweep && c.sweep->parameter == "length_km") {
        lengths = c.sweep->values();
    }
    for (double l : lengths) {
        out.table.add({format_number(c.alpha), format_number(l), format_number(tgw_bound(c.alpha, l))});
    }
    return out;
}

inline CommandOutput cmd_oracle_check(const RunConfig& c) {
    swapqkd::detail::require(c.n_swaps.size() == 1 && c.n_swaps.front() == 1, "oracle-check compares N = 1 only");
    const int oracle_t = c.oracle_truncation.value_or(c.truncation);
    if (oracle_t != c.truncation) {
        throw DomainError("truncation mismatch: closed form uses " + std::to_string(c.truncation) +
                          ", oracle uses " + std::to_string(oracle_t));
    }
    const auto p = detail::resource_of(c, 1);
    const auto config = p.chain();
    const auto closed = coincidence_table(config);
    fock::CircuitParams circuit{config.chi, config.delta_a, config.delta_b, oracle_t};
    const auto oracle = fock::oracle_single_swap(circuit, DetectorParams::effective(config.eta, config.dark),
                                                 config.heralds.stations.front());
    CommandOutput out;
    out.table.columns = {"outer_pattern", "closed_form", "oracle", "abs_diff"};
    double max_abs = 0.0;
    double sum_sq = 0.0;
    for (int k = 0; k < 16; ++k) {
        const auto pattern = ClickPattern::from_index(k);
        const double a = closed.q(pattern);
        const double b = oracle.table.q(pattern);
        const double diff = std::fabs(a - b);
        max_abs = std::max(max_abs, diff);
        sum_sq += diff * diff;
        out.table.add({pattern.str(), format_number(a), format_number(b), format_number(diff)});
    }
    const double rms = std::sqrt(sum_sq / 16.0);
    out.summary["max_abs"] = max_abs;
    out.summary["rms"] = rms;
    out.summary["tolerance"] = 1e-9;
    out.summary["passed"] = max_abs <= 1e-9;
    if (!(max_abs <= 1e-9)) {
        out.exit_code = kOracleMismatch;
    }
    return out;
}

/// Caption parameters of each figure, applied before user overrides.
inline void apply_figure_defaults(RunConfig& c, const std::string& figure) {
    if (figure == "coincidence-vs-delta-b") {
        c.chi = 0.24;
        c.eta = 0.04;
        c.dark = 1e-5;
        c.delta_a = 0.5;
        c.n_swaps = {3};
        c.sweep = SweepAxis{"delta_b", -1.0, 1.0, 49};
    } else if (figure == "visibility-vs-chi") {
        c.eta = 0.04;
        c.dark = 1e-5;
        c.n_swaps = {1, 2, 3};
        c.sweep = SweepAxis{"chi", 0.05, 0.4, 8};
    } else if (figure == "visibility-vs-distance") {
        c.chi = 0.1;
        c.eta0 = 0.7;
        c.dark = 1e-5;
        c.alpha = 0.25;
        c.alpha0 = 4.0;
        c.n_swaps = {1, 2, 3};
        c.sweep = SweepAxis{"length_km", 0.0, 1200.0, 25};
    } else if (figure == "perfect-detector-visibility") {
        c.chi = 0.1;
        c.eta0 = 1.0;
        c.dark = 0.0;
        c.alpha = 0.25;
        c.alpha0 = 0.0;
        c.n_swaps = {2};
        c.sweep = SweepAxis{"length_km", 0.0, 1000.0, 21};
    } else if (figure == "keyrate-vs-distance") {
        c.dark.reset();
        c.trade_off = TradeOffConfig{};
        c.alpha = 0.25;
        c.alpha0 = 4.0;
        c.n_swaps = {1, 2, 3};
        c.sweep = SweepAxis{"length_km", 50.0, 1000.0, 20};
    } else if (figure == "tgw-comparison") {
        c.dark.reset();
        c.trade_off = TradeOffConfig{};
        c.alpha = 0.25;
        c.alpha0 = 4.0;
        c.n_swaps = {1, 2, 3};
        c.sweep = SweepAxis{"length_km", 10.0, 1000.0, 100};
    } else {
        throw DomainError("unknown figure id '" + figure + "'");
    }
}

namespace detail {

inline std::string suffix(int n) { return "_n" + std::to_string(n); }

// One row per sweep value, one visibility column per chain length.
inline CommandOutput visibility_figure(const RunConfig& c, const std::string& axis_column) {
    CommandOutput out;
    out.table.columns = {axis_column};
    for (int n : c.n_swaps) {
        out.table.columns.push_back("visibility" + suffix(n));
    }
    const auto values = c.sweep->values();
    const std::size_t width = c.n_swaps.size();
    std::vector<std::string> cells(values.size() * width);
    std::vector<char> failed(cells.size(), 0);
    parallel_for(cells.size(), c.workers, [&](std::size_t k) {
        RunConfig point = c;
        set_parameter(point, c.sweep->parameter, values[k / width]);
        try {
            cells[k] = format_number(visibility(resource_of(point, c.n_swaps[k % width]).chain()));
        } catch (const DegenerateInputError&) {
            cells[k] = "NA";
            failed[k] = 1;
        }
    });
    int failures = 0;
    for (std::size_t v = 0; v < values.size(); ++v) {
        std::vector<std::string> row{format_number(values[v])};
        for (std::size_t w = 0; w < width; ++w) {
            row.push_back(cells[v * width + w]);
            failures += failed[v * width + w];
        }
        out.table.add(std::move(row));
    }
    out.summary["failed_points"] = failures;
    if (failures > 0) {
        out.exit_code = kPointFailure;
    }
    return out;
}

}  // namespace detail

inline CommandOutput cmd_reproduce(const RunConfig& c) {
    swapqkd::detail::require(c.sweep.has_value(), "reproduce needs a sweep axis");
    const std::string& figure = c.figure;
    if (figure == "coincidence-vs-delta-b") {
        CommandOutput out;
        out.table.columns = {"n_swaps", "delta_b", "q_correlated", "q_anticorrelated"};
        const auto values = c.sweep->values();
        const std::size_t width = c.n_swaps.size();
        std::vector<CoincidenceTable> tables(values.size() * width);
        parallel_for(tables.size(), c.workers, [&](std::size_t k) {
            RunConfig point = c;
            point.delta_b = values[k % values.size()];
            tables[k] = coincidence_table(detail::resource_of(point, c.n_swaps[k / values.size()]).chain());
        });
        for (std::size_t k = 0; k < tables.size(); ++k) {
            out.table.add({format_number(c.n_swaps[k / values.size()]), format_number(values[k % values.size()]),
                           format_number(tables[k].q_max), format_number(tables[k].q_min)});
        }
        return out;
    }
    if (figure == "visibility-vs-chi") {
        return detail::visibility_figure(c, "chi");
    }
    if (figure == "visibility-vs-distance" || figure == "perfect-detector-visibility") {
        return detail::visibility_figure(c, "length_km");
    }
    if (figure == "keyrate-vs-distance") {
        CommandOutput out;
        out.table.columns = detail::optimize_columns();
        const auto lengths = c.sweep->values();
        int failures = 0;
        for (int n : c.n_swaps) {
            for (double l : lengths) {
                RunConfig point = c;
                point.length_km = l;
                try {
                    out.table.add(detail::optimize_row(point, n));
                } catch (const std::exception& error) {
                    std::vector<std::string> row(out.table.columns.size(), "NA");
                    row[0] = format_number(n);
                    row[1] = format_number(l);
                    row.back() = std::string("error: ") + error.what();
                    out.table.add(std::move(row));
                    ++failures;
                }
            }
        }
        out.summary["failed_points"] = failures;
        if (failures > 0) {
            out.exit_code = kPointFailure;
        }
        return out;
    }
    if (figure == "tgw-comparison") {
        CommandOutput out;
        out.table.columns = {"length_km", "r_tgw", "log10_r_tgw"};
        for (int n : c.n_swaps) {
            out.table.columns.push_back("r_upper" + detail::suffix(n));
            out.table.columns.push_back("log10_r_upper" + detail::suffix(n));
        }
        for (double l : c.sweep->values()) {
            RunConfig point = c;
            point.length_km = l;
            const double tgw = tgw_bound(c.alpha, l);
            std::vector<std::string> row{format_number(l), format_number(tgw), format_number(std::log10(tgw))};
            for (int n : c.n_swaps) {
                const auto upper = upper_bound_rate(detail::optimization_of(point, n));
                row.push_back(format_number(upper.r_upper));
                row.push_back(format_number(upper.log10_r_upper));
            }
            out.table.add(std::move(row));
        }
        return out;
    }
    throw DomainError("unknown figure id '" + figure + "'");
}

}  // namespace swapqkd::cli
