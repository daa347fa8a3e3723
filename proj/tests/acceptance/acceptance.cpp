// One PASS/FAIL line per acceptance criterion; extra "info" lines carry the
// measured values. Exit status is non-zero when any criterion fails.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "swapqkd/cli/app.hpp"
#include "swapqkd/fock_oracle.hpp"
#include "swapqkd/optimizer.hpp"
#include "swapqkd/rate_metrics.hpp"
#include "swapqkd/swap_chain.hpp"

using namespace swapqkd;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

void info(const char* format, auto... args) {
    std::printf("    info: ");
    std::printf(format, args...);
    std::printf("\n");
}

bool criterion_1() {
    double max_abs = 0.0;
    for (double chi : {0.05, 0.1, 0.24})
        for (double eta : {1.0, 0.5, 0.04})
            for (double dark : {0.0, 1e-5}) {
                const auto config = ChainConfig::uniform(1, chi, eta, dark, kPsiPlusHerald, 3);
                const auto closed = coincidence_table(config);
                fock::CircuitParams p{chi, kHalfPi, kHalfPi, 3};
                const auto oracle = fock::oracle_single_swap(p, DetectorParams::effective(eta, dark), kPsiPlusHerald);
                for (int k = 0; k < 16; ++k) {
                    max_abs = std::max(max_abs, std::fabs(closed.q_values[k] - oracle.table.q_values[k]));
                }
            }
    info("oracle grid 18 points, truncation 3, max_abs=%.3e (tol 1e-9)", max_abs);
    return max_abs <= 1e-9;
}

bool criterion_2() {
    bool matched = false;
    for (int n = 1; n <= 3; ++n) {
        const auto config = ChainConfig::uniform(n, 0.24, 0.04, 1e-5, kPsiPlusHerald, 3);
        const double v = visibility(config);
        const bool in_band = std::fabs(v - 0.16) <= 0.03;
        info("N=%d truncation 3: V=%.6f%s", n, v, in_band ? "  (within 0.16 +/- 0.03)" : "");
        if (in_band) {
            matched = true;
            auto deeper = config;
            deeper.truncation = 5;
            info("N=%d truncation 5: V=%.6f (truncation sensitivity of the matched depth)", n, visibility(deeper));
        }
    }
    return matched;
}

bool criterion_3() {
    auto config = ChainConfig::uniform(3, 0.24, 0.04, 1e-5, kPsiPlusHerald, 3);
    std::vector<double> correlated;
    std::vector<double> anti;
    std::vector<double> deltas;
    bool periodic = true;
    for (int k = 0; k < 25; ++k) {
        const double delta = -std::numbers::pi + 2 * std::numbers::pi * k / 24.0;
        config.delta_b = delta;
        const auto t = coincidence_table(config);
        deltas.push_back(delta);
        correlated.push_back(t.q(kCorrelatedA) + t.q(kCorrelatedB));
        anti.push_back(t.q(kAntiCorrelatedA) + t.q(kAntiCorrelatedB));
        config.delta_b = delta + 2 * std::numbers::pi;
        const auto shifted = coincidence_table(config);
        periodic = periodic && std::fabs(shifted.q(kCorrelatedA) + shifted.q(kCorrelatedB) - correlated.back()) < 1e-12;
    }
    const auto c_max = std::max_element(correlated.begin(), correlated.end()) - correlated.begin();
    const auto c_min = std::min_element(correlated.begin(), correlated.end()) - correlated.begin();
    const auto a_max = std::max_element(anti.begin(), anti.end()) - anti.begin();
    const auto a_min = std::min_element(anti.begin(), anti.end()) - anti.begin();
    const bool antiphase = c_max == a_min && c_min == a_max;
    int slope_agreement = 0;
    int crossings = 0;
    for (std::size_t k = 1; k < deltas.size(); ++k) {
        const double dc = correlated[k] - correlated[k - 1];
        const double da = anti[k] - anti[k - 1];
        if (dc * da < 0.0) ++slope_agreement;
        const double before = correlated[k - 1] - anti[k - 1];
        const double after = correlated[k] - anti[k];
        if (before * after < 0.0) ++crossings;
    }
    const bool crossing_between = crossings == 2 && antiphase;
    info("correlated extrema at delta_B/pi=%.3f (max), %.3f (min); anti-correlated max %.3f, min %.3f",
         deltas[c_max] / std::numbers::pi, deltas[c_min] / std::numbers::pi, deltas[a_max] / std::numbers::pi,
         deltas[a_min] / std::numbers::pi);
    info("opposite-slope steps %d/24, crossings %d, 2pi-periodic %s", slope_agreement, crossings,
         periodic ? "yes" : "no");
    return periodic && antiphase && crossing_between && slope_agreement >= 22;
}

bool criterion_4() {
    bool ok = true;
    std::vector<std::vector<double>> v(4);
    for (int n = 1; n <= 3; ++n) {
        for (int k = 1; k <= 8; ++k) {
            v[n].push_back(visibility(ChainConfig::uniform(n, 0.05 * k, 0.04, 1e-5)));
            if (k > 1 && !(v[n][k - 1] < v[n][k - 2])) ok = false;
        }
    }
    for (int k = 0; k < 8; ++k) {
        if (!(v[1][k] > v[2][k] && v[2][k] > v[3][k])) ok = false;
    }
    info("V at chi=0.05: %.4f %.4f %.4f; at chi=0.4: %.4f %.4f %.4f", v[1][0], v[2][0], v[3][0], v[1][7], v[2][7],
         v[3][7]);
    return ok;
}

bool criterion_5() {
    ResourceParams p;
    p.chi = 0.1;
    p.eta0 = 1.0;
    p.dark = 0.0;
    p.link.alpha0 = 0.0;
    p.n_swaps = 2;
    bool ok = true;
    double v0 = 0.0;
    for (double l : {0.0, 250.0, 500.0, 1000.0}) {
        p.link.length_km = l;
        const double v = visibility(p.chain());
        if (l == 0.0) v0 = v;
        info("l=%6.0f km: eta=%.3e V=%.6f ratio=%.4f (need >= 0.95)", l, p.detector_efficiency(), v, v / v0);
        ok = ok && v >= 0.95 * v0;
    }
    return ok;
}

bool criterion_6() {
    const double tgw = tgw_bound(0.25, 40.0);
    const bool tgw_ok = std::fabs(tgw - 0.289537) <= 1e-5;
    info("tgw_bound(0.25, 40)=%.7f, expected 0.289537 +/- 1e-5: %s (log2(1.1/0.9)=%.7f)", tgw,
         tgw_ok ? "ok" : "mismatch", std::log2(1.1 / 0.9));
    const bool h_ok = binary_entropy(0.5) == 1.0;
    const double sp = shor_preskill_rate(0.11, 1.0);
    const bool sp_ok = sp > 0.0 && sp < 5e-4;
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
        for (double l : {0.0, 1.0, 50.0, 200.0, 777.0}) {
            const double expected = std::pow(10.0, -0.25 * l / 10.0);
            worst = std::max(worst, std::fabs(sifted_distance_factor(n, 0.25, l) - expected) / expected);
        }
    }
    const bool exponent_ok = worst <= 1e-14;
    const bool dark_ok = ingaas_dark_count(0.0).value == 6.1e-7;
    info("H2(0.5)=1 %s; shor_preskill(0.11)=%.4e %s; exponent identity worst rel=%.1e %s; dark(0)=6.1e-7 %s",
         h_ok ? "ok" : "mismatch", sp, sp_ok ? "ok" : "mismatch", worst, exponent_ok ? "ok" : "mismatch",
         dark_ok ? "ok" : "mismatch");
    return tgw_ok && h_ok && sp_ok && exponent_ok && dark_ok;
}

double rate_at(const OptimizationSpec& spec, double chi, double eta0) {
    ResourceParams p;
    p.chi = chi;
    p.eta0 = eta0;
    p.dark = ingaas_dark_count(eta0, spec.trade_off).value;
    p.link = spec.link;
    p.n_swaps = spec.n_swaps;
    p.truncation = spec.final_truncation;
    return evaluate_key_rate(p).r_net;
}

bool criterion_7() {
    OptimizationSpec spec;
    spec.n_swaps = 1;
    spec.link.length_km = 100.0;
    spec.workers = default_workers();
    const auto a = maximize_key_rate(spec);
    const auto b = maximize_key_rate(spec);
    const bool deterministic = a.r_max == b.r_max && a.chi_opt == b.chi_opt && a.eta_opt == b.eta_opt;
    bool local = a.r_max > 0.0;
    for (int dc = -1; dc <= 1; ++dc) {
        for (int de = -1; de <= 1; ++de) {
            const double chi = a.chi_opt + dc * a.chi_step;
            const double eta0 = a.eta_opt + de * a.eta_step;
            if ((dc == 0 && de == 0) || chi < spec.chi_range.lo || chi > spec.chi_range.hi ||
                eta0 < spec.eta0_range.lo || eta0 > spec.eta0_range.hi) {
                continue;
            }
            local = local && rate_at(spec, chi, eta0) <= a.r_max;
        }
    }
    const auto upper = upper_bound_rate(spec);
    const bool bounded = a.r_max <= upper.r_upper;
    info("r_max=%.6e at chi=%.5f eta0=%.5f (V=%.4f), r_upper=%.6e, %ld evaluations", a.r_max, a.chi_opt, a.eta_opt,
         a.at_opt.visibility, upper.r_upper, a.evaluations);
    info("grid-local maximum %s, bounded %s, bit-identical rerun %s", local ? "yes" : "no", bounded ? "yes" : "no",
         deterministic ? "yes" : "no");
    return local && bounded && deterministic;
}

bool criterion_8() {
    OptimizationSpec spec;
    spec.n_swaps = 3;
    spec.link.base = LossBase::e;
    spec.workers = default_workers();
    const auto points = sweep_distance(spec, {800.0, 950.0});
    for (const auto& p : points) {
        if (!p.result) {
            info("l=%.0f km failed: %s", p.length_km, p.error.c_str());
            return false;
        }
        info("natural-log loss, l=%.0f km: r_max=%.3e (log10 %.2f) at chi=%.4f eta0=%.4f V=%.4f", p.length_km,
             p.result->r_max, p.result->log10_r_max, p.result->chi_opt, p.result->eta_opt,
             p.result->at_opt.visibility);
    }
    auto decibel = spec;
    decibel.link.base = LossBase::ten;
    decibel.link.length_km = 800.0;
    const auto db = maximize_key_rate(decibel);
    info("decibel loss, l=800 km (not scored): r_max=%.3e, no_key=%s", db.r_max, db.no_key ? "true" : "false");
    return points[0].result->r_max > 0.0 && points[1].result->r_max < 1e-20;
}

bool criterion_9() {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run({"swapqkd", "reproduce", "tgw-comparison", "--no-timing"}, out, err);
    if (code != 0) {
        info("reproduce tgw-comparison exited %d: %s", code, err.str().c_str());
        return false;
    }
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> columns;
    {
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) columns.push_back(cell);
    }
    auto column = [&](const std::string& name) {
        return static_cast<int>(std::find(columns.begin(), columns.end(), name) - columns.begin());
    };
    const int length = column("length_km");
    const int tgw = column("r_tgw");
    const int upper[4] = {0, column("log10_r_upper_n1"), column("log10_r_upper_n2"), column("log10_r_upper_n3")};
    if (length >= static_cast<int>(columns.size()) || tgw >= static_cast<int>(columns.size())) {
        info("missing columns in: %s", line.c_str());
        return false;
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream cells(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    bool monotone = true;
    bool below = true;
    double worst_gap = -1e300;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (int n = 1; n <= 3; ++n) {
            if (k > 0 && !(rows[k][upper[n]] < rows[k - 1][upper[n]])) monotone = false;
        }
        const double gap = rows[k][upper[1]] - std::log10(rows[k][tgw]);
        worst_gap = std::max(worst_gap, gap);
        if (gap > 0.0) below = false;
    }
    info("%zu distances; N=1 max log10(upper/TGW)=%.3f; monotone %s", rows.size(), worst_gap, monotone ? "yes" : "no");
    return rows.size() >= 2 && monotone && below;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool()> check;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "oracle equivalence, N=1 grid, max_abs <= 1e-9", criterion_1},
        {2, "visibility 0.16 +/- 0.03 at chi=0.24 eta=0.04 dark=1e-5", criterion_2},
        {3, "coincidence sums antiphase, 2pi periodic, crossing between extrema", criterion_3},
        {4, "V decreasing in chi and in N", criterion_4},
        {5, "perfect detectors, N=2: V(l) >= 0.95 V(0) up to 1000 km", criterion_5},
        {6, "scalar formulas", criterion_6},
        {7, "optimizer local maximum, bounded, deterministic at 100 km", criterion_7},
        {8, "N=3 r_max > 0 at 800 km and < 1e-20 at 950 km", criterion_8},
        {9, "tgw-comparison upper bounds monotone and below TGW for N=1", criterion_9},
    };
    std::set<int> selected;
    for (int k = 1; k < argc; ++k) selected.insert(std::stoi(argv[k]));
    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.contains(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        bool passed = false;
        try {
            passed = c.check();
        } catch (const std::exception& e) {
            info("exception: %s", e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %d %s: %s [%.1f s]\n", c.id, passed ? "PASS" : "FAIL", c.name, seconds);
        std::fflush(stdout);
        failures += passed ? 0 : 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
