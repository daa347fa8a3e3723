#include <gtest/gtest.h>

#include <cmath>

#include "swapqkd/optimizer.hpp"

using namespace swapqkd;

namespace {

OptimizationSpec small_spec(int n, double length_km) {
    OptimizationSpec spec;
    spec.n_swaps = n;
    spec.link.length_km = length_km;
    spec.coarse_points = 8;
    spec.refine_points = 5;
    spec.refinement_levels = 1;
    return spec;
}

double rate_at(const OptimizationSpec& spec, double chi, double eta0) {
    ResourceParams p;
    p.chi = chi;
    p.eta0 = eta0;
    p.dark = spec.fixed_dark ? *spec.fixed_dark : ingaas_dark_count(eta0, spec.trade_off).value;
    p.link = spec.link;
    p.n_swaps = spec.n_swaps;
    p.truncation = spec.final_truncation;
    return evaluate_key_rate(p).r_net;
}

}  // namespace

TEST(KeyRate, FixedPointComposition) {
    ResourceParams p;
    p.chi = 0.1;
    p.eta0 = 0.7;
    p.dark = 1e-5;
    p.link.length_km = 100.0;
    p.n_swaps = 1;
    const auto r = evaluate_key_rate(p);
    EXPECT_NEAR(r.qber, (1.0 - r.visibility) / 2.0, 1e-15);
    EXPECT_NEAR(r.r_net, r.r_sifted * shor_preskill_rate(r.qber, 1.0), 1e-12 * r.r_sifted);
    EXPECT_NEAR(r.log10_r_sifted, log10_sifted_rate(1, 0.1, 0.7 * std::pow(10.0, -0.4), 0.25, 100.0), 1e-12);
}

TEST(Optimizer, SinglePointGrid) {
    auto spec = small_spec(1, 50.0);
    spec.chi_range = {0.1, 0.1};
    spec.eta0_range = {0.3, 0.3};
    spec.coarse_points = 1;
    const auto result = maximize_key_rate(spec);
    EXPECT_EQ(result.chi_opt, 0.1);
    EXPECT_EQ(result.eta_opt, 0.3);
    EXPECT_NEAR(result.r_max, rate_at(spec, 0.1, 0.3), 1e-12 * result.r_max);
}

TEST(Optimizer, DeterministicAcrossWorkers) {
    auto one = small_spec(1, 100.0);
    auto many = one;
    many.workers = 4;
    const auto a = maximize_key_rate(one);
    const auto b = maximize_key_rate(many);
    EXPECT_EQ(a.r_max, b.r_max);
    EXPECT_EQ(a.chi_opt, b.chi_opt);
    EXPECT_EQ(a.eta_opt, b.eta_opt);
    EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Optimizer, LocalOptimality) {
    const auto spec = small_spec(1, 100.0);
    const auto result = maximize_key_rate(spec);
    ASSERT_GT(result.r_max, 0.0);
    EXPECT_TRUE(result.converged);
    for (int dc = -1; dc <= 1; ++dc) {
        for (int de = -1; de <= 1; ++de) {
            const double chi = result.chi_opt + dc * result.chi_step;
            const double eta0 = result.eta_opt + de * result.eta_step;
            if (chi < spec.chi_range.lo || chi > spec.chi_range.hi || eta0 < spec.eta0_range.lo ||
                eta0 > spec.eta0_range.hi) {
                continue;
            }
            EXPECT_LE(rate_at(spec, chi, eta0), result.r_max * (1.0 + 1e-12));
        }
    }
}

TEST(Optimizer, BelowSiftedUpperBound) {
    for (int n = 1; n <= 2; ++n) {
        const auto spec = small_spec(n, 200.0);
        const auto result = maximize_key_rate(spec);
        const auto upper = upper_bound_rate(spec);
        EXPECT_LE(result.r_max, upper.r_upper) << n;
    }
}

TEST(Optimizer, NoKeyFlag) {
    auto spec = small_spec(1, 100.0);
    spec.fixed_dark = 0.3;
    const auto result = maximize_key_rate(spec);
    EXPECT_TRUE(result.no_key);
    EXPECT_EQ(result.r_max, 0.0);
}

TEST(Optimizer, RejectsBadBox) {
    auto spec = small_spec(1, 100.0);
    spec.chi_range = {0.5, 0.1};
    EXPECT_THROW(maximize_key_rate(spec), DomainError);
}

TEST(Sweep, EmptyAndDuplicateLengths) {
    const auto spec = small_spec(1, 0.0);
    EXPECT_TRUE(sweep_distance(spec, {}).empty());
    const auto points = sweep_distance(spec, {80.0, 80.0});
    ASSERT_EQ(points.size(), 2u);
    ASSERT_TRUE(points[0].result && points[1].result);
    EXPECT_EQ(points[0].result->r_max, points[1].result->r_max);
}

TEST(Sweep, RecordsFailuresPerPoint) {
    const auto spec = small_spec(1, 0.0);
    const auto points = sweep_distance(spec, {50.0, -10.0});
    EXPECT_TRUE(points[0].result.has_value());
    EXPECT_FALSE(points[1].result.has_value());
    EXPECT_FALSE(points[1].error.empty());
}

TEST(Sweep, RateFallsWithDistance) {
    const auto spec = small_spec(1, 0.0);
    const auto points = sweep_distance(spec, {50.0, 150.0, 300.0});
    EXPECT_GT(points[0].result->r_max, points[1].result->r_max);
    EXPECT_GT(points[1].result->r_max, points[2].result->r_max);
}
