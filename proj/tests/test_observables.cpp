#include <gtest/gtest.h>

#include <cmath>

#include "dicke/fit.hpp"
#include "dicke/observables.hpp"

using namespace dicke;

namespace {

EnergyTrace make_trace(double t0, double t1, double dt, const std::function<double(double)>& f) {
    EnergyTrace tr;
    tr.times = ode::uniform_grid(t0, t1, dt);
    for (double t : tr.times) tr.energy.push_back(f(t));
    return tr;
}

}  // namespace

TEST(Convolve, ZeroAndIdentity) {
    const auto zero = make_trace(-1, 1, 0.01, [](double) { return 0.0; });
    for (double v : convolve_response(zero, 0.12).energy) EXPECT_EQ(v, 0.0);
    const auto bump = make_trace(-1, 1, 0.01, [](double t) { return std::exp(-t * t * 30); });
    EXPECT_EQ(convolve_response(bump, 0.0).energy, bump.energy);
    EXPECT_THROW(convolve_response(bump, -1.0), DomainError);
}

TEST(Convolve, UnitStepMatchesErrorFunction) {
    const double s = 0.12;
    const auto step = make_trace(-2, 2, 0.001, [](double t) { return t > 0 ? 1.0 : (t == 0 ? 0.5 : 0.0); });
    const auto out = convolve_response(step, s);
    const std::size_t mid = 2000;
    EXPECT_NEAR(out.times[mid], 0.0, 1e-12);
    EXPECT_NEAR(out.energy[mid], 0.5, 1e-3);
    auto crossing = [&](double level) {
        for (std::size_t i = 1; i < out.energy.size(); ++i)
            if (out.energy[i] >= level)
                return out.times[i - 1] + (level - out.energy[i - 1]) / (out.energy[i] - out.energy[i - 1]) * 0.001;
        return std::nan("");
    };
    EXPECT_NEAR((crossing(0.9) - crossing(0.1)) / s, 2.563, 0.01);
}

TEST(Convolve, PreservesIntegralAndNeverIncreasesPeak) {
    const auto bump = make_trace(-3, 3, 0.002, [](double t) { return std::exp(-t * t * 20) + 0.3 * std::exp(-(t - 0.4) * (t - 0.4) * 200); });
    const auto out = convolve_response(bump, 0.12);
    double a = 0, b = 0, ma = 0, mb = 0;
    for (std::size_t i = 0; i < bump.energy.size(); ++i) {
        a += bump.energy[i];
        b += out.energy[i];
        ma = std::max(ma, std::abs(bump.energy[i]));
        mb = std::max(mb, std::abs(out.energy[i]));
    }
    EXPECT_NEAR(b / a, 1.0, 1e-6);
    EXPECT_LE(mb, ma);
}

TEST(Convolve, ConvolvesOptionalSeriesAndRejectsNonUniformGrid) {
    auto tr = make_trace(0, 1, 0.01, [](double t) { return t; });
    tr.photon_number = tr.energy;
    const auto out = convolve_response(tr, 0.05);
    EXPECT_EQ(out.photon_number, out.energy);
    tr.times[10] += 0.003;
    EXPECT_THROW(convolve_response(tr, 0.05), DomainError);
}

TEST(ChargingMetrics, SaturatingExponential) {
    const double e0 = 3.0, tc = 0.2;
    const auto tr = make_trace(-0.5, 8.0, 0.0005, [&](double t) { return t > 0 ? e0 * (1 - std::exp(-t / tc)) : 0.0; });
    const auto m = charging_metrics(tr, 0.0);
    EXPECT_NEAR(m.rise_time, tc * std::log(2.0), 1e-5);
    EXPECT_NEAR(m.peak_energy, e0, 1e-9);
    EXPECT_NEAR(m.peak_power, e0 / tc, 0.01 * e0 / tc);
    EXPECT_NEAR(m.t_half, m.rise_time, 1e-12);
}

TEST(ChargingMetrics, ConstantTraceAndErrors) {
    const auto c = make_trace(0, 1, 0.1, [](double) { return 2.0; });
    EXPECT_EQ(charging_metrics(c, -0.5).rise_time, 0.0);
    const auto zero = make_trace(0, 1, 0.1, [](double) { return 0.0; });
    EXPECT_THROW(charging_metrics(zero, 0.0), NumericError);
    EXPECT_THROW(charging_metrics(c, 2.0), DomainError);
}

TEST(ChargingMetrics, NegativeRiseTimeIsReported) {
    const auto tr = make_trace(-1, 2, 0.001, [](double t) { return 1.0 / (1.0 + std::exp(-(t + 0.2) / 0.02)); });
    EXPECT_NEAR(charging_metrics(tr, 0.0).rise_time, -0.2, 1e-3);
}

TEST(ChargingMetrics, TranslationInvariant) {
    auto f = [](double t) { return t > 0 ? t * std::exp(-t) : 0.0; };
    const auto a = charging_metrics(make_trace(-1, 6, 0.001, f), 0.0);
    const auto b = charging_metrics(make_trace(2, 9, 0.001, [&](double t) { return f(t - 3); }), 3.0);
    EXPECT_NEAR(a.rise_time, b.rise_time, 1e-9);
    EXPECT_NEAR(a.peak_energy, b.peak_energy, 1e-9);
    EXPECT_NEAR(a.peak_power, b.peak_power, 1e-6);
}

TEST(ChargingMetrics, BestFitA1Trace) {
    ModelParams p;
    p.n_molecules = 16.20e10;
    PulseParams pu;
    pu.amplitude = std::sqrt(1.90e10);
    const auto m = charging_metrics(simulate_energy(p, pu, SolverConfig{}), pu.center);
    EXPECT_NEAR(m.rise_time, 0.094, 0.05 * 0.094);
    EXPECT_NEAR(m.peak_energy, 108.0, 0.05 * 108.0);
    EXPECT_NEAR(m.peak_power, 791.0, 0.05 * 791.0);
}

TEST(Regime, NoCoupling) {
    ModelParams p;
    p.coupling = 0.0;
    const auto r = classify_regime(p, 0.1, 0.02);
    EXPECT_EQ(r.regime, Regime::decay_dominated);
    EXPECT_TRUE(std::isinf(r.n_kappa));
    EXPECT_TRUE(std::isinf(r.n_gammaz));
    EXPECT_TRUE(std::isinf(r.n_sigma));
}

TEST(Regime, EqualRatesGiveSingleBoundary) {
    ModelParams p;
    p.cavity_decay = p.relaxation = p.dephasing_base = 2.0;
    p.dephasing_scales_with_n = false;
    const auto r = classify_regime(p, 0.5, 0.02);
    EXPECT_NEAR(r.n_kappa / 3.56e10, 1.0, 0.01);
    EXPECT_NEAR(r.n_gammaz, r.n_kappa, 1e-6 * r.n_kappa);
    p.n_molecules = r.n_kappa * 0.99;
    EXPECT_EQ(classify_regime(p, 0.5, 0.02).regime, Regime::decay_dominated);
    p.n_molecules = r.n_kappa * 1.01;
    EXPECT_EQ(classify_regime(p, 0.5, 0.02).regime, Regime::coupling_dominated);
}

TEST(Regime, NonResonantBoundary) {
    ModelParams p;
    const auto r = classify_regime(p, 0.1, 0.02);
    EXPECT_NEAR(r.n_sigma / 6.1e12, 1.0, 0.01);
    EXPECT_GT(r.n_sigma, r.n_gammaz);
    p.n_molecules = 1.01 * r.n_sigma;
    EXPECT_EQ(classify_regime(p, 0.1, 0.02).regime, Regime::non_resonant);
}

TEST(Regime, KappaBoundaryFlipsDecayToCrossover) {
    ModelParams p;
    p.cavity_decay = 0.1;
    const auto r = classify_regime(p, 0.14, 0.02);
    ASSERT_LT(r.n_kappa, r.n_gammaz);
    p.n_molecules = r.n_kappa;
    EXPECT_LE(p.cavity_decay, effective_dephasing(p));
    p.n_molecules = r.n_kappa * (1 - 1e-6);
    EXPECT_EQ(classify_regime(p, 0.14, 0.02).regime, Regime::decay_dominated);
    p.n_molecules = r.n_kappa * (1 + 1e-6);
    EXPECT_EQ(classify_regime(p, 0.14, 0.02).regime, Regime::crossover);
}

TEST(Regime, StrongDriveUsesRPrime) {
    ModelParams p;
    const auto a = classify_regime(p, 0.5, 0.02);
    const auto b = classify_regime(p, 4.0, 0.02);
    EXPECT_NEAR(a.n_kappa / b.n_kappa, 4.0, 1e-12);
    EXPECT_NEAR(b.effective_coupling, p.coupling * std::sqrt(4.0 * p.n_molecules), 1e-15);
    EXPECT_THROW(classify_regime(p, -1, 0.02), DomainError);
    EXPECT_THROW(classify_regime(p, 1, 0.0), DomainError);
}

TEST(ScalingExponent, Values) {
    EXPECT_EQ(scaling_exponent(2.0, 2.0, 1e10, 2e10), 0.0);
    EXPECT_NEAR(scaling_exponent(0.094, 0.120, 16.20e10, 8.08e10), -0.35, 0.01);
    EXPECT_NEAR(scaling_exponent(0.184, 0.037, 1.62e10, 0.81e10), 2.31, 0.01);
    EXPECT_NEAR(scaling_exponent(3.0, 5.0, 7.0, 2.0), scaling_exponent(5.0, 3.0, 2.0, 7.0), 1e-15);
    EXPECT_THROW(scaling_exponent(-1.0, 1.0, 2.0, 1.0), DomainError);
    EXPECT_THROW(scaling_exponent(1.0, 1.0, 2.0, 2.0), DomainError);
    EXPECT_THROW(scaling_exponent(1.0, 1.0, -2.0, 2.0), DomainError);
}

TEST(Sweep, SinglePointMatchesDirectSimulation) {
    ModelParams p;
    PulseParams pu;
    SolverConfig c;
    SweepOptions o;
    o.photon_ratio = 0.14;
    const std::vector<double> grid{1.62e10};
    const auto pts = sweep(p, grid, pu, c, o);
    ASSERT_EQ(pts.size(), 1u);
    ASSERT_TRUE(pts[0].ok) << pts[0].error;
    p.n_molecules = 1.62e10;
    pu.amplitude = drive_amplitude_from_photon_ratio(0.14, 1.62e10);
    const auto m = charging_metrics(simulate_energy(p, pu, c), pu.center);
    EXPECT_EQ(pts[0].metrics.rise_time, m.rise_time);
    EXPECT_EQ(pts[0].metrics.peak_energy, m.peak_energy);
    EXPECT_EQ(pts[0].metrics.peak_power, m.peak_power);
}

TEST(Sweep, FailedPointIsRecordedAndOrderIsDeterministic) {
    SweepOptions o;
    o.axis = SweepAxis::photon_ratio;
    o.molecules = 1e10;
    o.threads = 3;
    const std::vector<double> grid{0.0, 0.05, 0.1};
    SolverConfig c;
    c.t_end = 1.0;
    const auto pts = sweep(ModelParams{}, grid, PulseParams{}, c, o);
    EXPECT_FALSE(pts[0].ok);
    EXPECT_NE(pts[0].error.find("half max"), std::string::npos);
    EXPECT_TRUE(pts[1].ok);
    EXPECT_TRUE(pts[2].ok);
    EXPECT_EQ(pts[1].axis_value, 0.05);
    EXPECT_LT(pts[1].metrics.peak_energy, pts[2].metrics.peak_energy);
    const std::vector<double> bad{1.0, 0.5};
    EXPECT_THROW(sweep(ModelParams{}, bad, PulseParams{}, c, o), DomainError);
    EXPECT_THROW(sweep(ModelParams{}, std::vector<double>{}, PulseParams{}, c, o), DomainError);
}

TEST(Sweep, LowerPolaritonDriveChangesDynamics) {
    SweepOptions o;
    o.photon_ratio = 0.05;
    SolverConfig c;
    c.t_end = 1.5;
    const std::vector<double> grid{1e12};
    const auto res = sweep(ModelParams{}, grid, PulseParams{}, c, o);
    o.lower_polariton = true;
    const auto lp = sweep(ModelParams{}, grid, PulseParams{}, c, o);
    ASSERT_TRUE(res[0].ok && lp[0].ok);
    EXPECT_NE(res[0].metrics.peak_energy, lp[0].metrics.peak_energy);
}

TEST(LogLogSlope, RecoversPowerLaw) {
    const std::vector<double> x{1, 10, 100}, y{3, 300, 30000};
    EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
}
