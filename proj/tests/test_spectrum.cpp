#include <gtest/gtest.h>

#include <cmath>

#include "dicke/spectrum.hpp"

using namespace dicke;

namespace {

ModelParams plain(double g2n, double kappa, double gz, double gm) {
    ModelParams p;
    p.n_molecules = 1.0;
    p.coupling = std::sqrt(g2n);
    p.cavity_decay = kappa;
    p.dephasing_base = gz;
    p.dephasing_scales_with_n = false;
    p.relaxation = gm;
    return p;
}

ModelParams best_fit(double n) {
    ModelParams p;
    p.n_molecules = n;
    return p;
}

}  // namespace

TEST(EffectiveRabi, Values) {
    const auto r = effective_rabi(plain(25.0, 2.0, 0.5, 0.0));
    EXPECT_FALSE(r.overdamped);
    EXPECT_NEAR(r.value, 5.0, 1e-12);
    const auto o = effective_rabi(plain(0.0, 2.0, 0.2, 0.1));
    EXPECT_TRUE(o.overdamped);
    EXPECT_NEAR(o.value, std::abs(2.0 - 2 * (0.4 + 0.05)) / 2, 1e-12);
}

TEST(Absorption, EvenSymmetry) {
    for (const auto& p : {plain(25, 2, 0.5, 0.1), plain(0.01, 3, 1, 0.2), best_fit(8.08e10), best_fit(0.81e10)}) {
        std::vector<double> grid;
        for (int k = -500; k <= 500; ++k) grid.push_back(0.0731 * k);
        const auto s = absorption_spectrum(p, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            EXPECT_NEAR(s.absorption[i], s.absorption[grid.size() - 1 - i], 1e-12);
    }
}

TEST(Absorption, ResolvedPeaksSitAtRabiSplitting) {
    const auto p = plain(400.0, 1.0, 0.2, 0.05);
    const auto grid = symmetric_grid(60.0, 6000);
    const double step = grid[1] - grid[0];
    const auto s = absorption_spectrum(p, grid);
    const auto peaks = find_peaks(s);
    ASSERT_EQ(peaks.size(), 2u);
    EXPECT_NEAR(peaks[0], -s.rabi.value, step);
    EXPECT_NEAR(peaks[1], s.rabi.value, step);
}

TEST(Absorption, ConcentrationSeries) {
    const auto grid = symmetric_grid(40.0, 4000);
    EXPECT_EQ(find_peaks(absorption_spectrum(best_fit(0.81e10), grid)).size(), 1u);
    EXPECT_EQ(find_peaks(absorption_spectrum(best_fit(1.62e10), grid)).size(), 1u);
    EXPECT_EQ(find_peaks(absorption_spectrum(best_fit(8.08e10), grid)).size(), 2u);
    EXPECT_EQ(find_peaks(absorption_spectrum(best_fit(16.20e10), grid)).size(), 2u);
}

TEST(Absorption, PeakCountIsMonotoneInCoupling) {
    const auto grid = symmetric_grid(30.0, 3000);
    std::size_t prev = 1;
    for (double g2n = 0.01; g2n < 200.0; g2n *= 1.2) {
        const std::size_t n = find_peaks(absorption_spectrum(plain(g2n, 2.0, 0.5, 0.1), grid)).size();
        EXPECT_GE(n, prev) << "g2N = " << g2n;
        EXPECT_LE(n, 2u);
        prev = n;
    }
    EXPECT_EQ(prev, 2u);
}

TEST(Absorption, ContinuousAcrossOverdampedBoundary) {
    const double kappa = 3.0, gz = 0.2, gm = 0.1;
    const double edge = std::pow(kappa - 2 * (2 * gz + 0.5 * gm), 2) / 4;
    const std::vector<double> grid{-2.0, -0.5, 0.0, 0.3, 1.7};
    const auto lo = absorption_spectrum(plain(edge * (1 - 1e-9), kappa, gz, gm), grid);
    const auto hi = absorption_spectrum(plain(edge * (1 + 1e-9), kappa, gz, gm), grid);
    EXPECT_TRUE(lo.rabi.overdamped);
    EXPECT_FALSE(hi.rabi.overdamped);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(lo.absorption[i], hi.absorption[i], 1e-6);
}

TEST(Absorption, PoleWithoutDamping) {
    const auto p = plain(4.0, 0.0, 0.0, 0.0);
    const std::vector<double> grid{-2.0};
    EXPECT_THROW(absorption_spectrum(p, grid), NumericError);
}

TEST(Absorption, TenPercentSplittingDiagnostic) {
    const auto r = effective_rabi(best_fit(16.20e10));
    ASSERT_FALSE(r.overdamped);
    // Reported for comparison with the ~100 meV measured splitting; not an equality.
    RecordProperty("two_omega_over_100meV", std::to_string(2 * r.value / 100.0));
    EXPECT_GT(r.value, 0.0);
}

TEST(Absorption, PoleConsistentSplittingKeepsSpectrumNonNegative) {
    const auto grid = symmetric_grid(40.0, 400);
    for (double n : {0.81e10, 1.62e10, 8.08e10, 16.20e10}) {
        const auto s = absorption_spectrum(best_fit(n), grid);
        for (double a : s.absorption) EXPECT_GT(a, 0.0) << "N = " << n;
    }
    const auto printed = absorption_spectrum(best_fit(0.81e10), grid, SplittingConvention::as_printed);
    EXPECT_LT(printed.absorption[400], 0.0);
    const auto p = best_fit(8.08e10);
    const double d = p.cavity_decay - 2 * total_transverse_decay(p);
    EXPECT_NEAR(pole_splitting(p).value, std::sqrt(p.coupling * p.coupling * p.n_molecules - d * d / 16), 1e-12);
}
