#pragma once

// Closed-form polariton absorption spectrum.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "error.hpp"
#include "model.hpp"

namespace dicke {

/// Ω_eff = √(g²N − (κ − 2γ^tot)²/4). When the radicand is negative the
/// splitting is imaginary: `overdamped` is set and `value` holds |Ω_eff|.
struct RabiResult {
    double value = 0.0;
    bool overdamped = false;

    std::complex<double> complex_value() const {
        return overdamped ? std::complex<double>(0.0, value) : std::complex<double>(value, 0.0);
    }
};

namespace detail {
inline RabiResult splitting(const ModelParams& params, double divisor) {
    validate(params);
    const double gtot = total_transverse_decay(params);
    const double d = params.cavity_decay - 2.0 * gtot;
    const double radicand = params.coupling * params.coupling * params.n_molecules - d * d / divisor;
    if (radicand >= 0.0) return {std::sqrt(radicand), false};
    return {std::sqrt(-radicand), true};
}
}  // namespace detail

inline RabiResult effective_rabi(const ModelParams& params) { return detail::splitting(params, 4.0); }

/// Half the separation of the two poles of the cavity correlation spectrum,
/// √(g²N − (κ − 2γ^tot)²/16). Matches the damping L = (2γ^tot + κ)/4 used in
/// the spectrum, so both poles stay damped and the spectrum is non-negative.
inline RabiResult pole_splitting(const ModelParams& params) { return detail::splitting(params, 16.0); }

/// Which splitting enters the spectrum. `as_printed` uses Ω_eff directly; the
/// poles then become undamped (negative absorption) once |κ − 2γ^tot| is large.
enum class SplittingConvention { pole_consistent, as_printed };

struct SpectrumResult {
    std::vector<double> detunings;   ///< Δν, meV
    std::vector<double> absorption;  ///< raw formula value, arbitrary units
    RabiResult rabi;                 ///< Ω_eff, reported
    RabiResult splitting;            ///< value used in the formula
    double gamma_tot = 0.0;          ///< meV
    double linewidth = 0.0;          ///< (2γ^tot + κ)/4, meV
};

/// Abs(Δν) = −Re[(iΔν − γ^tot) / ((i[Δν+Ω] − L)(i[Δν−Ω] − L))], L = (2γ^tot + κ)/4.
inline SpectrumResult absorption_spectrum(const ModelParams& params, std::span<const double> detunings,
                                          SplittingConvention conv = SplittingConvention::pole_consistent) {
    using cd = std::complex<double>;
    SpectrumResult out;
    out.rabi = effective_rabi(params);
    out.splitting = conv == SplittingConvention::pole_consistent ? pole_splitting(params) : out.rabi;
    out.gamma_tot = total_transverse_decay(params);
    out.linewidth = (2.0 * out.gamma_tot + params.cavity_decay) / 4.0;
    const cd omega = out.splitting.complex_value();
    const cd i(0.0, 1.0);
    out.detunings.assign(detunings.begin(), detunings.end());
    out.absorption.reserve(detunings.size());
    for (double dv : detunings) {
        if (!std::isfinite(dv)) throw DomainError("absorption_spectrum: non-finite detuning");
        const cd den = (i * (dv + omega) - out.linewidth) * (i * (dv - omega) - out.linewidth);
        if (den == cd(0.0, 0.0)) throw NumericError("absorption_spectrum: pole at detuning " + std::to_string(dv));
        out.absorption.push_back(-((i * dv - out.gamma_tot) / den).real());
    }
    return out;
}

/// Detunings of the interior local maxima of the spectrum, refined by a
/// three-point parabola through each maximum.
inline std::vector<double> find_peaks(const SpectrumResult& s) {
    std::vector<double> peaks;
    const auto& a = s.absorption;
    const auto& x = s.detunings;
    for (std::size_t k = 1; k + 1 < a.size(); ++k) {
        if (!(a[k] > a[k - 1] && a[k] >= a[k + 1])) continue;
        const double h0 = x[k] - x[k - 1], h1 = x[k + 1] - x[k];
        const double s0 = (a[k] - a[k - 1]) / h0, s1 = (a[k + 1] - a[k]) / h1;
        const double curv = (s1 - s0) / (0.5 * (h0 + h1));
        double v = x[k];
        if (curv < 0.0) v = 0.5 * (x[k - 1] + x[k]) - s0 / curv;  // where the secant slope reaches zero
        peaks.push_back(std::clamp(v, x[k - 1], x[k + 1]));
    }
    return peaks;
}

/// Uniform symmetric grid of 2·half_points+1 detunings spanning ±extent.
inline std::vector<double> symmetric_grid(double extent, std::size_t half_points) {
    if (!(extent > 0.0) || half_points == 0) throw DomainError("symmetric_grid: extent and size must be positive");
    std::vector<double> g(2 * half_points + 1);
    const double step = extent / static_cast<double>(half_points);
    for (std::size_t k = 0; k <= half_points; ++k) {
        const double v = step * static_cast<double>(k);
        g[half_points + k] = v;
        g[half_points - k] = -v;
    }
    return g;
}

}  // namespace dicke
