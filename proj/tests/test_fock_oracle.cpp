#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "swapqkd/fock_oracle.hpp"

using namespace swapqkd;
using namespace swapqkd::fock;

namespace {

double total_mass(const FockState& s) { return s.squared_norm() + s.norm_deficit(); }

FockState one_photon(int mode, Polarization pol, std::vector<int> modes, int n_max = 3) {
    FockState s(std::move(modes), n_max);
    OccupationVector occ(s.mode_count(), 0);
    occ[s.index(mode, pol)] = 1;
    s.mutable_amplitudes()[occ] = 1.0;
    return s;
}

}  // namespace

TEST(Pdc, ZeroChiIsVacuum) {
    const auto s = pdc_state(0.0, 3);
    ASSERT_EQ(s.amplitudes().size(), 1u);
    EXPECT_EQ(s.amplitude({0, 0, 0, 0}), Amplitude(1.0));
    EXPECT_EQ(s.norm_deficit(), 0.0);
}

TEST(Pdc, VacuumAmplitudeIsSechSquared) {
    EXPECT_NEAR(pdc_state(0.1, 3).amplitude({0, 0, 0, 0}).real(), 0.990066, 1e-6);
}

TEST(Pdc, AnalyticTailDeficit) {
    const auto s = pdc_state(0.1, 3);
    const double x = std::pow(std::tanh(0.1), 8);
    EXPECT_NEAR(s.norm_deficit(), 2 * x - x * x, 1e-22);
    EXPECT_LT(s.norm_deficit(), 2e-8);
    EXPECT_NEAR(total_mass(s), 1.0, 1e-12);
}

TEST(Pdc, Errors) {
    EXPECT_THROW(pdc_state(-0.1, 3), DomainError);
    EXPECT_THROW(pdc_state(0.1, 0), DomainError);
}

TEST(Tensor, VacuumProductAndReindex) {
    const auto v = tensor(FockState::vacuum({0, 1}, 3), FockState::vacuum({2, 3}, 3));
    EXPECT_EQ(v.amplitudes().size(), 1u);
    EXPECT_EQ(v.spatial_modes(), (std::vector<int>{0, 1, 2, 3}));
    const auto p = pdc_state(0.1, 3);
    const auto pv = tensor(p, FockState::vacuum({2, 3}, 3));
    EXPECT_EQ(pv.amplitudes().size(), p.amplitudes().size());
    EXPECT_EQ(pv.amplitude({1, 0, 1, 0, 0, 0, 0, 0}), p.amplitude({1, 0, 1, 0}));
}

TEST(Tensor, VacuumAmplitudeOfTwoSources) {
    const auto s = tensor(pdc_state(0.1, 3, 0, 1), pdc_state(0.1, 3, 2, 3));
    EXPECT_NEAR(s.amplitude(OccupationVector(8, 0)).real(), std::pow(1.0 / std::cosh(0.1), 4), 1e-15);
    EXPECT_NEAR(total_mass(s), 1.0, 1e-12);
}

TEST(Tensor, OverlappingModesRejected) {
    EXPECT_THROW(tensor(pdc_state(0.1, 3, 0, 1), pdc_state(0.1, 3, 1, 2)), DomainError);
}

TEST(BeamSplitter, VacuumAndSingleSplit) {
    const auto v = apply_beam_splitter(FockState::vacuum({0, 1}, 3), 0, 1);
    EXPECT_EQ(v.amplitudes().size(), 1u);
    const auto s = apply_beam_splitter(one_photon(0, Polarization::H, {0, 1}), 0, 1);
    EXPECT_NEAR(std::norm(s.amplitude({1, 0, 0, 0})), 0.5, 1e-15);
    EXPECT_NEAR(std::norm(s.amplitude({0, 0, 1, 0})), 0.5, 1e-15);
}

TEST(BeamSplitter, HongOuMandel) {
    FockState s({0, 1}, 3);
    s.mutable_amplitudes()[{1, 0, 1, 0}] = 1.0;
    const auto out = apply_beam_splitter(s, 0, 1);
    EXPECT_EQ(std::abs(out.amplitude({1, 0, 1, 0})), 0.0);
    EXPECT_NEAR(std::norm(out.amplitude({2, 0, 0, 0})), 0.5, 1e-15);
    EXPECT_NEAR(std::norm(out.amplitude({0, 0, 2, 0})), 0.5, 1e-15);
}

TEST(BeamSplitter, Unitarity) {
    auto s = tensor(pdc_state(0.3, 3, 0, 1), pdc_state(0.3, 3, 2, 3));
    s = apply_beam_splitter(s, 1, 2);
    EXPECT_NEAR(total_mass(s), 1.0, 1e-12);
    EXPECT_THROW(apply_beam_splitter(s, 1, 9), DomainError);
}

TEST(Rotator, IdentityAndSwap) {
    const auto h = one_photon(0, Polarization::H, {0});
    const auto same = apply_polarization_rotator(h, 0, 0.0);
    EXPECT_EQ(same.amplitude({1, 0}), Amplitude(1.0));
    const auto flipped = apply_polarization_rotator(h, 0, std::numbers::pi);
    EXPECT_NEAR(std::norm(flipped.amplitude({0, 1})), 1.0, 1e-15);
    const auto half = apply_polarization_rotator(h, 0, std::numbers::pi / 2);
    EXPECT_NEAR(std::norm(half.amplitude({1, 0})), 0.5, 1e-15);
    EXPECT_NEAR(std::norm(half.amplitude({0, 1})), 0.5, 1e-15);
    EXPECT_THROW(apply_polarization_rotator(h, 3, 0.1), DomainError);
}

TEST(Rotator, UnitarityAndPeriodicity) {
    auto s = tensor(pdc_state(0.3, 6, 0, 1), FockState::vacuum({2}, 6));
    for (double delta : {0.3, 1.1, 2.5}) {
        const auto a = apply_polarization_rotator(s, 0, delta);
        const auto b = apply_polarization_rotator(s, 0, delta + 2 * std::numbers::pi);
        EXPECT_NEAR(total_mass(a), 1.0, 1e-12);
        for (const auto& [occ, amp] : a.amplitudes()) {
            EXPECT_NEAR(std::norm(amp), std::norm(b.amplitude(occ)), 1e-14);
        }
    }
}

TEST(Projection, VacuumCases) {
    auto s = tensor(pdc_state(0.0, 3, 0, 1), pdc_state(0.0, 3, 2, 3));
    s = apply_beam_splitter(s, 1, 2);
    const auto vac = project_inner(s, 1, 2, {0, 0, 0, 0});
    EXPECT_DOUBLE_EQ(vac.probability, 1.0);
    EXPECT_EQ(vac.outer.amplitude({0, 0, 0, 0}), Amplitude(1.0));
    EXPECT_EQ(project_inner(s, 1, 2, {1, 0, 1, 0}).probability, 0.0);
}

TEST(Projection, Completeness) {
    const int cap = 6;
    auto s = tensor(pdc_state(0.1, cap, 0, 1), pdc_state(0.1, cap, 2, 3));
    s = apply_beam_splitter(s, 1, 2);
    double sum = 0.0;
    for (int i = 0; i <= cap; ++i)
        for (int j = 0; j <= cap; ++j)
            for (int k = 0; k <= cap; ++k)
                for (int l = 0; l <= cap; ++l) sum += project_inner(s, 1, 2, {i, j, k, l}).probability;
    EXPECT_NEAR(sum + s.norm_deficit(), 1.0, 1e-10);
}

TEST(Projection, OverflowReportsIndex) {
    const auto s = tensor(pdc_state(0.1, 2, 0, 1), pdc_state(0.1, 2, 2, 3));
    try {
        project_inner(s, 1, 2, {0, 0, 3, 0});
        FAIL() << "expected TruncationError";
    } catch (const TruncationError& e) {
        EXPECT_EQ(e.index(), "k");
    }
}

TEST(SingleSwap, PsiPlusSignatureAtLowChi) {
    CircuitParams params{1e-3, std::numbers::pi / 2, std::numbers::pi / 2, 2};
    const auto result = oracle_single_swap(params, DetectorParams::effective(1.0, 0.0), {1, 0, 1, 0});
    const double q1 = result.table.q({1, 0, 1, 0});
    const double q2 = result.table.q({0, 1, 0, 1});
    // double pairs from one source herald at the same order, so only the
    // normalized fringe is ideal
    EXPECT_NEAR(q1, q2, 1e-12);
    EXPECT_NEAR(q1, 0.25, 1e-5);
    EXPECT_LT(result.table.q_min, 1e-5);
    EXPECT_NEAR(result.table.visibility(), 1.0, 1e-4);
}

TEST(SingleSwap, NoPhotonsNoClicks) {
    CircuitParams params{0.0, 0.3, 0.7, 2};
    const auto result = oracle_single_swap(params, DetectorParams::effective(1.0, 0.0), {0, 0, 0, 0});
    EXPECT_DOUBLE_EQ(result.table.q({0, 0, 0, 0}), 1.0);
}

TEST(SingleSwap, ImpossibleHeraldIsZeroEvidence) {
    CircuitParams params{0.0, 0.3, 0.7, 2};
    EXPECT_THROW(oracle_single_swap(params, DetectorParams::effective(1.0, 0.0), {1, 0, 1, 0}), ZeroEvidenceError);
}

TEST(SingleSwap, CoincidenceFringeAgainstDeltaB) {
    // correlated sum peaks at delta_b = pi/2 and the anticorrelated sum at -pi/2
    auto at = [](double delta_b) {
        CircuitParams params{0.24, std::numbers::pi / 2, delta_b, 2};
        return oracle_single_swap(params, DetectorParams::effective(0.04, 1e-5), {1, 0, 1, 0}).table;
    };
    const auto plus = at(std::numbers::pi / 2);
    const auto minus = at(-std::numbers::pi / 2);
    EXPECT_GT(plus.q_max, plus.q_min);
    EXPECT_GT(minus.q_min, minus.q_max);
    EXPECT_NEAR(plus.q_max, minus.q_min, 1e-15);
}
