#pragma once

// Internal unit system: time in ps, energies and rates in meV.

namespace dicke::units {

/// Reduced Planck constant in meV·ps. The only definition site.
inline constexpr double hbar = 0.6582119569;

/// Photon energy times wavelength, hc, in meV·nm.
inline constexpr double hc_meV_nm = 1239841.98419;

constexpr double fs_to_ps(double fs) { return fs * 1e-3; }
constexpr double ps_to_fs(double ps) { return ps * 1e3; }

constexpr double nev_to_mev(double nev) { return nev * 1e-6; }
constexpr double mev_to_nev(double mev) { return mev * 1e6; }

constexpr double ev_to_mev(double ev) { return ev * 1e3; }
constexpr double mev_to_ev(double mev) { return mev * 1e-3; }

/// Transition energy of a photon of the given vacuum wavelength.
constexpr double nm_to_mev(double nm) { return hc_meV_nm / nm; }
constexpr double mev_to_nm(double mev) { return hc_meV_nm / mev; }

/// Energy (meV) to angular rate (1/ps).
constexpr double mev_to_rate(double mev) { return mev / hbar; }
constexpr double rate_to_mev(double per_ps) { return per_ps * hbar; }

/// Cavity decay rate κ = ħ/T for a photon lifetime T.
constexpr double lifetime_fs_to_kappa_mev(double lifetime_fs) { return hbar / fs_to_ps(lifetime_fs); }

}  // namespace dicke::units
