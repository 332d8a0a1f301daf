#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"
#include "units.hpp"

namespace dicke {

/// Physical parameters of N identical two-level molecules in a lossy cavity.
/// Energies and rates are in meV. Defaults are the best-fit values for a
/// 120 fs cavity lifetime with N set to the 5% cavity.
struct ModelParams {
    double n_molecules = 8.08e10;                              ///< N, real-valued
    double coupling = units::nev_to_mev(10.6);                 ///< g
    double cavity_decay = units::lifetime_fs_to_kappa_mev(120.0);  ///< κ = ħ/T
    double dephasing_base = 1.68;                              ///< γ0^z at N = N_ref
    double dephasing_ref_count = 8.08e10;                      ///< N_ref (5% cavity)
    bool dephasing_scales_with_n = true;                       ///< γ^z = γ0^z·N_ref/N when set
    double relaxation = 0.0141;                                ///< γ^-
    double detuning_cavity = 0.0;                              ///< Δ_c
    double detuning_molecule = 0.0;                            ///< Δ_a
    double transition_energy = units::nm_to_mev(526.0);        ///< ω_a, lab frame
};

/// Gaussian pump envelope and instrument response. Times in ps.
struct PulseParams {
    double amplitude = 0.0;          ///< η0, time-integrated pulse area
    double center = 0.0;             ///< t0
    double width = 0.020;            ///< σ
    double response_width = 0.120;   ///< σ_R
};

inline void validate(const ModelParams& p) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw DomainError(std::string("invalid model parameters: ") + what);
    };
    require(std::isfinite(p.n_molecules) && p.n_molecules > 0.0, "N must be > 0");
    require(std::isfinite(p.dephasing_ref_count) && p.dephasing_ref_count > 0.0, "N_ref must be > 0");
    require(p.coupling >= 0.0, "g must be >= 0");
    require(p.cavity_decay >= 0.0, "kappa must be >= 0");
    require(p.dephasing_base >= 0.0, "gamma0z must be >= 0");
    require(p.relaxation >= 0.0, "gamma- must be >= 0");
    require(std::isfinite(p.detuning_cavity) && std::isfinite(p.detuning_molecule), "detunings must be finite");
    require(p.transition_energy > 0.0, "transition energy must be > 0");
}

inline void validate(const PulseParams& p) {
    if (!(p.width > 0.0)) throw DomainError("invalid pulse: sigma must be > 0");
    if (!(p.response_width >= 0.0)) throw DomainError("invalid pulse: response width must be >= 0");
    if (!(p.amplitude >= 0.0)) throw DomainError("invalid pulse: amplitude must be >= 0");
    if (!std::isfinite(p.center)) throw DomainError("invalid pulse: center must be finite");
}

/// η(t) = η0/(σ√2π)·exp(−½((t−t0)/σ)²), in 1/ps.
inline double pulse_envelope(const PulseParams& pulse, double t) {
    const double x = (t - pulse.center) / pulse.width;
    return pulse.amplitude / (pulse.width * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * x * x);
}

/// Dephasing rate after the collective-delocalisation scaling, γ0^z·N_ref/N.
inline double effective_dephasing(const ModelParams& p) {
    if (!p.dephasing_scales_with_n) return p.dephasing_base;
    return p.dephasing_base * p.dephasing_ref_count / p.n_molecules;
}

/// Total transverse decay of a molecular coherence, 2γ^z + γ^-/2.
inline double total_transverse_decay(const ModelParams& p) {
    return 2.0 * effective_dephasing(p) + 0.5 * p.relaxation;
}

/// Pulse area injecting rN photons into an empty cavity: η0 = √(rN).
inline double drive_amplitude_from_photon_ratio(double r, double n_molecules) {
    if (!(r >= 0.0) || !(n_molecules > 0.0)) throw DomainError("photon ratio must be >= 0 and N > 0");
    return std::sqrt(r * n_molecules);
}

/// Stored energy per molecule, (ω_a/2)(⟨σ^z⟩ + 1).
inline double energy_density_from_inversion(double cz, double transition_energy) {
    return 0.5 * transition_energy * (cz + 1.0);
}

/// Molecule count from Beer–Lambert absorption: N = −ln(T/T0)·A/σ_abs.
/// The film thickness cancels between n = α/σ_abs and N = n·A·d; it is
/// still validated because it is part of the measurement.
inline double estimate_molecule_count(double fractional_transmission, double thickness_cm,
                                      double cross_section_cm2, double beam_area_cm2) {
    if (!(fractional_transmission > 0.0 && fractional_transmission <= 1.0))
        throw DomainError("fractional transmission must lie in (0, 1]");
    if (!(thickness_cm > 0.0 && cross_section_cm2 > 0.0 && beam_area_cm2 > 0.0))
        throw DomainError("thickness, cross section and beam area must be > 0");
    const double alpha = -std::log(fractional_transmission) / thickness_cm;
    const double density = alpha / cross_section_cm2;
    return density * beam_area_cm2 * thickness_cm;
}

/// Photons entering a cavity of reflectivity R: N_p(1 − R).
inline double photons_in_cavity(double pump_photons, double reflectivity) {
    if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) throw DomainError("reflectivity must lie in [0, 1]");
    if (!(pump_photons >= 0.0)) throw DomainError("pump photon count must be >= 0");
    return pump_photons * (1.0 - reflectivity);
}

}  // namespace dicke
