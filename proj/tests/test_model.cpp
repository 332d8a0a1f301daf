#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dicke/model.hpp"
#include "dicke/units.hpp"

using namespace dicke;

TEST(Units, HbarValue) { EXPECT_DOUBLE_EQ(units::hbar, 0.6582119569); }

TEST(Units, RoundTrips) {
    for (double v : {1e-3, 0.12, 1.0, 47.4, 1e6}) {
        EXPECT_NEAR(units::ps_to_fs(units::fs_to_ps(v)), v, 1e-12 * v);
        EXPECT_NEAR(units::mev_to_nev(units::nev_to_mev(v)), v, 1e-12 * v);
        EXPECT_NEAR(units::mev_to_ev(units::ev_to_mev(v)), v, 1e-12 * v);
        EXPECT_NEAR(units::mev_to_nm(units::nm_to_mev(v)), v, 1e-12 * v);
        EXPECT_NEAR(units::rate_to_mev(units::mev_to_rate(v)), v, 1e-12 * v);
    }
}

TEST(Units, WavelengthToEnergy) { EXPECT_NEAR(units::nm_to_mev(526.0), 2357.1, 0.1); }

TEST(Units, LifetimeToKappa) { EXPECT_NEAR(units::lifetime_fs_to_kappa_mev(120.0), 0.6582119569 / 0.12, 1e-12); }

TEST(ModelParams, DefaultsAreBestFit) {
    const ModelParams p;
    EXPECT_NEAR(p.coupling, 10.6e-6, 1e-18);
    EXPECT_DOUBLE_EQ(p.dephasing_base, 1.68);
    EXPECT_DOUBLE_EQ(p.relaxation, 0.0141);
    EXPECT_DOUBLE_EQ(p.detuning_cavity, 0.0);
    EXPECT_DOUBLE_EQ(p.detuning_molecule, 0.0);
    EXPECT_NO_THROW(validate(p));
}

TEST(ModelParams, ValidationRejectsBadValues) {
    ModelParams p;
    p.n_molecules = 0;
    EXPECT_THROW(validate(p), DomainError);
    p = {};
    p.coupling = -1;
    EXPECT_THROW(validate(p), DomainError);
    p = {};
    p.cavity_decay = -1;
    EXPECT_THROW(validate(p), DomainError);
    p = {};
    p.transition_energy = 0;
    EXPECT_THROW(validate(p), DomainError);
    PulseParams pu;
    pu.width = 0;
    EXPECT_THROW(validate(pu), DomainError);
    pu = {};
    pu.amplitude = -1;
    EXPECT_THROW(validate(pu), DomainError);
}

TEST(PulseEnvelope, Values) {
    PulseParams pu;
    EXPECT_EQ(pulse_envelope(pu, 0.0), 0.0);
    pu.amplitude = 1.0;
    pu.width = 0.02;
    pu.center = 0.3;
    const double peak = 1.0 / (0.02 * std::sqrt(2.0 * std::numbers::pi));
    EXPECT_NEAR(pulse_envelope(pu, 0.3), 19.947, 1e-3);
    EXPECT_NEAR(pulse_envelope(pu, 0.3), peak, 1e-12);
    EXPECT_NEAR(pulse_envelope(pu, 0.32), 12.099, 1e-3);
    EXPECT_NEAR(pulse_envelope(pu, 0.28), pulse_envelope(pu, 0.32), 1e-12);
}

TEST(PulseEnvelope, IntegratesToAmplitude) {
    PulseParams pu;
    pu.amplitude = 3.7;
    pu.center = -0.1;
    const int n = 4000;
    const double a = pu.center - 8 * pu.width, b = pu.center + 8 * pu.width, h = (b - a) / n;
    double s = 0.5 * (pulse_envelope(pu, a) + pulse_envelope(pu, b));
    for (int i = 1; i < n; ++i) s += pulse_envelope(pu, a + i * h);
    EXPECT_NEAR(s * h / pu.amplitude, 1.0, 1e-6);
}

TEST(EffectiveDephasing, Scaling) {
    ModelParams p;
    p.n_molecules = p.dephasing_ref_count;
    EXPECT_DOUBLE_EQ(effective_dephasing(p), 1.68);
    p.n_molecules = 2 * p.dephasing_ref_count;
    EXPECT_DOUBLE_EQ(effective_dephasing(p), 0.84);
    p.dephasing_base = 0;
    EXPECT_EQ(effective_dephasing(p), 0.0);
    p.dephasing_base = 1.68;
    for (double n : {1e8, 3.3e9, 1e12}) {
        p.n_molecules = n;
        EXPECT_NEAR(effective_dephasing(p) * n, 1.68 * p.dephasing_ref_count, 1e-12 * 1.68 * p.dephasing_ref_count);
    }
    p.dephasing_scales_with_n = false;
    EXPECT_DOUBLE_EQ(effective_dephasing(p), 1.68);
}

TEST(TotalTransverseDecay, Formula) {
    ModelParams p;
    p.n_molecules = p.dephasing_ref_count;
    EXPECT_NEAR(total_transverse_decay(p), 2 * 1.68 + 0.5 * 0.0141, 1e-14);
}

TEST(DriveAmplitude, Values) {
    EXPECT_EQ(drive_amplitude_from_photon_ratio(0.0, 1e10), 0.0);
    EXPECT_NEAR(drive_amplitude_from_photon_ratio(0.14, 1.62e10), 4.76235e4, 1.0);
    EXPECT_NEAR(drive_amplitude_from_photon_ratio(2.4, 0.81e10), 1.394e5, 50.0);
    const double eta = drive_amplitude_from_photon_ratio(0.37, 2.5e9);
    EXPECT_NEAR(eta * eta, 0.37 * 2.5e9, 1e-6);
    EXPECT_THROW(drive_amplitude_from_photon_ratio(-1, 1), DomainError);
}

TEST(EnergyDensity, Values) {
    EXPECT_EQ(energy_density_from_inversion(-1.0, 2357.0), 0.0);
    EXPECT_DOUBLE_EQ(energy_density_from_inversion(1.0, 2357.0), 2357.0);
    EXPECT_NEAR(energy_density_from_inversion(-0.90836, 2357.0), 108.0, 0.01);
    const double a = -0.7, b = 0.3;
    EXPECT_NEAR(energy_density_from_inversion(a, 2357) + energy_density_from_inversion(b, 2357),
                2 * energy_density_from_inversion(0.5 * (a + b), 2357), 1e-12 * 2357);
}

TEST(MoleculeCount, BeerLambert) {
    const double sigma = 3.3e-16, area = 3.3e-16 * 1e10;
    EXPECT_EQ(estimate_molecule_count(1.0, 1e-4, sigma, area), 0.0);
    EXPECT_NEAR(estimate_molecule_count(std::exp(-1.0), 1e-4, sigma, area), 1e10, 1e-2);
    EXPECT_NEAR(estimate_molecule_count(std::exp(-2.0), 1e-4, sigma, area), 2e10, 1e-2);
    EXPECT_THROW(estimate_molecule_count(0.0, 1e-4, sigma, area), DomainError);
    EXPECT_THROW(estimate_molecule_count(1.1, 1e-4, sigma, area), DomainError);
}

TEST(PhotonsInCavity, Values) {
    EXPECT_EQ(photons_in_cavity(1e10, 1.0), 0.0);
    EXPECT_EQ(photons_in_cavity(1e10, 0.0), 1e10);
    EXPECT_NEAR(photons_in_cavity(100, 0.93), 7.0, 1e-12);
    EXPECT_THROW(photons_in_cavity(100, 1.5), DomainError);
    EXPECT_THROW(photons_in_cavity(100, -0.1), DomainError);
}
