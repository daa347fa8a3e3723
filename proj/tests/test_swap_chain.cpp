#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "swapqkd/fock_oracle.hpp"
#include "swapqkd/swap_chain.hpp"

using namespace swapqkd;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

ChainConfig single(double chi, double eta, double dark, double delta_b, ClickPattern herald, int t) {
    auto c = ChainConfig::uniform(1, chi, eta, dark, herald, t);
    c.delta_b = delta_b;
    return c;
}

}  // namespace

TEST(Omega, HandValues) {
    EXPECT_EQ(omega(0, 0, 0, 0), 1);
    EXPECT_EQ(omega(0, 0, 1, 1), 2);
    EXPECT_EQ(omega(1, 0, 1, 0), 1);
}

TEST(Omega, DependsOnSumOnly) {
    for (int a = 0; a <= 6; ++a)
        for (int b = 0; b <= 6; ++b)
            for (int i = 0; i <= 6; ++i)
                for (int l = 0; l <= 6; ++l) EXPECT_EQ(omega(a, b, i, l), omega(a + b, 0, i, l));
}

TEST(Omega, ImpossibleSplitsVanish) { EXPECT_EQ(omega(3, 0, 1, 1), 0); }

TEST(StationSplit, CountsSignedPartitions) {
    EXPECT_EQ(station_split(1, 1, 1), 0);
    EXPECT_EQ(station_split(2, 0, 1), -2);
    EXPECT_EQ(station_split(0, 2, 1), 2);
}

TEST(ChainConfig, Validation) {
    auto c = ChainConfig::uniform(2, 0.1, 0.5, 0.0);
    EXPECT_EQ(c.heralds.size(), 3u);
    c.heralds.stations.pop_back();
    EXPECT_THROW(c.validate(), DomainError);
    EXPECT_THROW(ChainConfig::uniform(0, 0.1, 0.5, 0.0), DomainError);
    EXPECT_THROW(ChainConfig::uniform(1, 0.1, 0.5, 0.0, kPsiPlusHerald, 0), DomainError);
}

// Oracle equivalence: every Q entry agrees with the brute-force simulation.
TEST(OracleEquivalence, SingleSwapGrid) {
    for (double chi : {0.05, 0.1, 0.3})
        for (double eta : {1.0, 0.5, 0.04})
            for (double dark : {0.0, 1e-5})
                for (double delta_b : {-kHalfPi, 0.4, kHalfPi, 2.9})
                    for (auto herald : {ClickPattern{1, 0, 1, 0}, ClickPattern{0, 1, 1, 0}, ClickPattern{1, 1, 0, 0}}) {
                        const auto closed = coincidence_table(single(chi, eta, dark, delta_b, herald, 2));
                        fock::CircuitParams p{chi, kHalfPi, delta_b, 2};
                        const auto oracle = fock::oracle_single_swap(p, DetectorParams::effective(eta, dark), herald);
                        for (int k = 0; k < 16; ++k) {
                            ASSERT_NEAR(closed.q_values[k], oracle.table.q_values[k], 1e-9)
                                << "chi=" << chi << " eta=" << eta << " dark=" << dark << " herald=" << herald.str();
                        }
                        ASSERT_NEAR(closed.evidence, oracle.evidence, 1e-12 + 1e-9 * oracle.evidence);
                    }
}

TEST(OracleEquivalence, OuterCountsSingleSwap) {
    const auto config = single(0.2, 0.5, 1e-5, 0.7, kPsiPlusHerald, 2);
    const auto closed = conditional_outer_counts(config);
    fock::CircuitParams p{0.2, kHalfPi, 0.7, 2};
    const auto oracle = fock::oracle_single_swap(p, DetectorParams::effective(0.5, 1e-5), kPsiPlusHerald);
    for (const auto& [counts, probability] : oracle.outer_counts) {
        const auto it = closed.find(counts);
        const double value = it == closed.end() ? 0.0 : it->second;
        EXPECT_NEAR(value, probability, 1e-12);
    }
}

TEST(OracleEquivalence, TwoSwapsAtTruncationOne) {
    for (double eta : {1.0, 0.3}) {
        const auto config = ChainConfig::uniform(2, 0.3, eta, 1e-3, kPsiPlusHerald, 1);
        const auto closed = evaluate_chain(config);
        fock::CircuitParams p{0.3, kHalfPi, kHalfPi, 1};
        const auto oracle =
            fock::oracle_chain(2, p, DetectorParams::effective(eta, 1e-3), config.heralds.stations);
        for (int k = 0; k < 16; ++k) {
            EXPECT_NEAR(closed.table.q_values[k], oracle.table.q_values[k], 1e-12);
        }
        EXPECT_NEAR(closed.table.evidence, oracle.evidence, 1e-9 * oracle.evidence);
    }
}

TEST(OuterCounts, VacuumInVacuumOut) {
    const auto config = ChainConfig::uniform(1, 0.0, 1.0, 0.0, {0, 0, 0, 0});
    const auto counts = conditional_outer_counts(config);
    EXPECT_DOUBLE_EQ(counts.at({0, 0, 0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(coincidence_q(config, {0, 0, 0, 0}), 1.0);
}

TEST(OuterCounts, PsiPlusSignatureAtLowChi) {
    for (int n = 1; n <= 3; ++n) {
        const auto table = coincidence_table(ChainConfig::uniform(n, 1e-3, 1.0, 0.0));
        EXPECT_NEAR(table.q(kCorrelatedA), table.q(kCorrelatedB), 1e-12) << n;
        EXPECT_LT(table.q_min, 1e-4) << n;
        EXPECT_NEAR(table.visibility(), 1.0, 1e-3) << n;
    }
}

TEST(OuterCounts, RequestBeyondTruncationNamesIndex) {
    const auto config = ChainConfig::uniform(1, 0.1, 1.0, 0.0, kPsiPlusHerald, 1);
    try {
        conditional_outer_probability(config, {3, 2, 0, 0});
        FAIL() << "expected TruncationError";
    } catch (const TruncationError& e) {
        EXPECT_EQ(e.index(), "i'+j'");
    }
    EXPECT_GE(conditional_outer_probability(config, {1, 0, 1, 0}), 0.0);
}

TEST(Coincidence, CompletenessAndBounds) {
    for (int n = 1; n <= 3; ++n) {
        const auto table = evaluate_chain(ChainConfig::uniform(n, 0.24, 0.04, 1e-5), true).table;
        EXPECT_NEAR(table.total(), 1.0, 1e-12);
        for (double q : table.q_values) {
            EXPECT_GE(q, 0.0);
            EXPECT_LE(q, 1.0);
        }
        EXPECT_GT(table.truncation_deficit, 0.0);
        EXPECT_LT(table.truncation_deficit, 1e-3);
    }
}

TEST(Coincidence, DeltaPeriodicity) {
    auto c = ChainConfig::uniform(2, 0.2, 0.3, 1e-5);
    c.delta_b = 0.8;
    const auto a = coincidence_table(c);
    c.delta_b += 2 * std::numbers::pi;
    const auto b = coincidence_table(c);
    for (int k = 0; k < 16; ++k) EXPECT_NEAR(a.q_values[k], b.q_values[k], 1e-13);
}

TEST(Visibility, NegativeAngleEquivalence) {
    auto c = ChainConfig::uniform(2, 0.24, 0.04, 1e-5);
    const auto plus = coincidence_table(c);
    c.delta_b = -kHalfPi;
    const auto minus = coincidence_table(c);
    EXPECT_NEAR(plus.q_min, minus.q_max, 1e-15);
}

TEST(Visibility, ExtremizedConventionAtLeastFixed) {
    const auto c = ChainConfig::uniform(1, 0.24, 0.04, 1e-5);
    EXPECT_GE(visibility(c, VisibilityConvention::extremize_delta_b) + 1e-9, visibility(c));
}

TEST(Visibility, ZeroChiWithoutNoiseIsDegenerate) {
    EXPECT_THROW(visibility(ChainConfig::uniform(1, 0.0, 1.0, 0.0)), ZeroEvidenceError);
}

TEST(Visibility, DecreasingInChiAndChainLength) {
    for (int n = 1; n <= 3; ++n) {
        double previous = 2.0;
        for (int k = 1; k <= 8; ++k) {
            const double v = visibility(ChainConfig::uniform(n, 0.05 * k, 0.04, 1e-5));
            EXPECT_LT(v, previous) << "N=" << n << " chi=" << 0.05 * k;
            previous = v;
        }
    }
    for (int k = 1; k <= 8; ++k) {
        const double chi = 0.05 * k;
        const double v1 = visibility(ChainConfig::uniform(1, chi, 0.04, 1e-5));
        const double v2 = visibility(ChainConfig::uniform(2, chi, 0.04, 1e-5));
        const double v3 = visibility(ChainConfig::uniform(3, chi, 0.04, 1e-5));
        EXPECT_GT(v1, v2);
        EXPECT_GT(v2, v3);
    }
}

TEST(Truncation, CertificateConvergesAtSmallChi) {
    const auto cert = certify_truncation(ChainConfig::uniform(1, 0.1, 1.0, 0.0));
    EXPECT_TRUE(cert.converged);
    EXPECT_LT(cert.change, 1e-6);
    const auto loose = certify_truncation(ChainConfig::uniform(3, 0.24, 0.04, 1e-5));
    EXPECT_FALSE(loose.converged);
}

TEST(Evidence, DeepChainStaysRepresentable) {
    const auto result = evaluate_chain(ChainConfig::uniform(6, 0.05, 0.01, 1e-7, kPsiPlusHerald, 2));
    EXPECT_TRUE(std::isfinite(result.log10_evidence));
    EXPECT_LT(result.log10_evidence, -60.0);
    EXPECT_NEAR(result.table.total(), 1.0, 1e-12);
}

TEST(Evidence, ImpossibleHeraldIsZeroEvidence) {
    EXPECT_THROW(evaluate_chain(ChainConfig::uniform(2, 0.1, 0.0, 0.0)), ZeroEvidenceError);
}
