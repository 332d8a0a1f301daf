#pragma once

// Post-processing of energy traces: instrument response, charging metrics,
// regime classification, scaling exponents and parameter sweeps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cumulant.hpp"
#include "energy_trace.hpp"
#include "error.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "units.hpp"

namespace dicke {

/// Grid step of a uniform time grid; throws DomainError otherwise.
inline double uniform_step(std::span<const double> times) {
    if (times.size() < 2) throw DomainError("time grid needs at least two samples");
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw DomainError("time grid must be increasing");
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double expected = times.front() + static_cast<double>(i) * dt;
        if (std::abs(times[i] - expected) > 1e-6 * dt) throw DomainError("time grid is not uniform");
    }
    return dt;
}

namespace detail {

inline std::vector<double> gaussian_smooth(std::span<const double> v, std::span<const double> kernel, long half) {
    const long n = static_cast<long>(v.size());
    std::vector<double> out(v.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long k = -half; k <= half; ++k) {
            const long j = std::clamp(i - k, 0L, n - 1);
            acc += kernel[static_cast<std::size_t>(k + half)] * v[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

}  // namespace detail

/// Convolution with a normalized Gaussian of standard deviation sigma_r (ps),
/// truncated at ±5σ; values beyond the trace ends are the edge values.
/// Every non-empty series of the trace is convolved.
inline EnergyTrace convolve_response(const EnergyTrace& trace, double sigma_r) {
    if (!(sigma_r >= 0.0) || !std::isfinite(sigma_r)) throw DomainError("response width must be >= 0");
    if (sigma_r == 0.0 || trace.times.size() < 2) return trace;
    const double dt = uniform_step(trace.times);
    const long half = static_cast<long>(std::floor(5.0 * sigma_r / dt));
    if (half == 0) return trace;
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    double sum = 0.0;
    for (long k = -half; k <= half; ++k) {
        const double x = static_cast<double>(k) * dt / sigma_r;
        sum += kernel[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * x * x);
    }
    for (double& w : kernel) w /= sum;

    EnergyTrace out;
    out.times = trace.times;
    auto conv = [&](const std::vector<double>& v) {
        return v.empty() ? v : detail::gaussian_smooth(v, kernel, half);
    };
    out.energy = conv(trace.energy);
    out.inversion = conv(trace.inversion);
    out.photon_number = conv(trace.photon_number);
    out.photon_ratio = conv(trace.photon_ratio);
    return out;
}

struct ChargingMetrics {
    double rise_time = 0.0;   ///< τ, ps
    double peak_energy = 0.0; ///< E_max, meV
    double peak_power = 0.0;  ///< P_max, meV/ps
    double t_peak = 0.0;      ///< ps
    double t_half = 0.0;      ///< ps
};

/// Rise time to E_max/2, peak energy and peak power (centered differences).
/// The rise time is measured from max(t_p, first sample), so a trace that is
/// already above half maximum at its first sample gives τ = 0 and a crossing
/// before the pump gives τ < 0.
inline ChargingMetrics charging_metrics(const EnergyTrace& trace, double pump_arrival) {
    const auto& t = trace.times;
    const auto& e = trace.energy;
    if (t.empty() || e.size() != t.size()) throw DomainError("charging_metrics: empty or inconsistent trace");
    if (pump_arrival > t.back()) throw DomainError("charging_metrics: pump arrival after end of trace");
    for (double v : e)
        if (!std::isfinite(v)) throw NumericError("charging_metrics: non-finite energy");

    ChargingMetrics m;
    const auto peak = std::max_element(e.begin(), e.end());
    m.peak_energy = *peak;
    m.t_peak = t[static_cast<std::size_t>(peak - e.begin())];
    if (!(m.peak_energy > 0.0)) throw NumericError("charging_metrics: undefined half max (trace never rises above zero)");

    const double half = 0.5 * m.peak_energy;
    std::size_t i = 0;
    while (e[i] < half) ++i;
    if (i == 0) {
        m.t_half = t[0];
    } else {
        const double w = (half - e[i - 1]) / (e[i] - e[i - 1]);
        m.t_half = t[i - 1] + w * (t[i] - t[i - 1]);
    }
    m.rise_time = m.t_half - std::max(pump_arrival, t.front());

    const std::size_t n = t.size();
    if (n >= 2) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t lo = k == 0 ? 0 : k - 1;
            const std::size_t hi = k + 1 == n ? k : k + 1;
            best = std::max(best, (e[hi] - e[lo]) / (t[hi] - t[lo]));
        }
        m.peak_power = best;
    }
    return m;
}

enum class Regime { decay_dominated, crossover, coupling_dominated, non_resonant };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::decay_dominated: return "decay-dominated";
        case Regime::crossover: return "crossover";
        case Regime::coupling_dominated: return "coupling-dominated";
        case Regime::non_resonant: return "non-resonant";
    }
    return "unknown";
}

struct RegimeReport {
    Regime regime = Regime::decay_dominated;
    double effective_coupling = 0.0;  ///< g√(N r′), meV
    double kappa = 0.0;               ///< meV
    double gamma_z = 0.0;             ///< γ^z(N), meV
    double gamma_minus = 0.0;         ///< meV
    double sigma_threshold = 0.0;     ///< (2/5)^{1/4} ħ/σ, meV
    double n_kappa = 0.0;             ///< N where g√(N r′) = κ
    double n_gammaz = 0.0;            ///< N where g√(N r′) = γ^z(N)
    double n_sigma = 0.0;             ///< N where g√N = (2/5)^{1/4} ħ/σ
};

/// Compares the collective coupling g√(N r′), r′ = max(1, r), with the decay
/// rates. Decay-dominated: below κ and γ^z(N). Coupling-dominated: above κ,
/// γ^z(N) and γ^−. Non-resonant when N exceeds N_σ. Boundaries are +∞ for g = 0.
inline RegimeReport classify_regime(const ModelParams& params, double r, double sigma) {
    validate(params);
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("classify_regime: r must be >= 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("classify_regime: sigma must be > 0");
    const double inf = std::numeric_limits<double>::infinity();
    const double rp = std::max(1.0, r);
    const double g = params.coupling;

    RegimeReport rep;
    rep.kappa = params.cavity_decay;
    rep.gamma_z = effective_dephasing(params);
    rep.gamma_minus = params.relaxation;
    rep.sigma_threshold = std::pow(0.4, 0.25) * units::hbar / sigma;
    rep.effective_coupling = g * std::sqrt(params.n_molecules * rp);

    if (g == 0.0) {
        rep.n_kappa = rep.n_gammaz = rep.n_sigma = inf;
        rep.regime = Regime::decay_dominated;
        return rep;
    }
    const double g2r = g * g * rp;
    rep.n_kappa = rep.kappa * rep.kappa / g2r;
    if (params.dephasing_scales_with_n) {
        const double c = params.dephasing_base * params.dephasing_ref_count;
        rep.n_gammaz = std::cbrt(c * c / g2r);
    } else {
        rep.n_gammaz = params.dephasing_base * params.dephasing_base / g2r;
    }
    rep.n_sigma = std::pow(rep.sigma_threshold / g, 2);

    const double x = rep.effective_coupling;
    if (params.n_molecules > rep.n_sigma)
        rep.regime = Regime::non_resonant;
    else if (x < rep.kappa && x < rep.gamma_z)
        rep.regime = Regime::decay_dominated;
    else if (x > rep.kappa && x > rep.gamma_z && x > rep.gamma_minus)
        rep.regime = Regime::coupling_dominated;
    else
        rep.regime = Regime::crossover;
    return rep;
}

/// f with q_i/q_j = (N_i/N_j)^f.
inline double scaling_exponent(double q_i, double q_j, double n_i, double n_j) {
    const double qr = q_i / q_j;
    const double nr = n_i / n_j;
    if (!(qr > 0.0) || !std::isfinite(qr)) throw DomainError("scaling_exponent: q_i/q_j must be positive");
    if (!(nr > 0.0) || !std::isfinite(nr)) throw DomainError("scaling_exponent: N_i/N_j must be positive");
    if (n_i == n_j) throw DomainError("scaling_exponent: N_i must differ from N_j");
    return std::log(qr) / std::log(nr);
}

enum class SweepAxis { molecules, photon_ratio };

struct SweepOptions {
    SweepAxis axis = SweepAxis::molecules;
    double photon_ratio = 0.14;   ///< r when sweeping N
    double molecules = 8.08e10;   ///< N when sweeping r
    bool lower_polariton = false; ///< drive at the lower polariton: Δ_a = Δ_c = g√N
    unsigned threads = 0;
};

struct SweepPoint {
    double axis_value = 0.0;
    bool ok = false;
    std::string error;
    ChargingMetrics metrics;
    RegimeReport regime;
};

/// One simulation per grid point; the pulse amplitude is √(rN) and metrics
/// are taken on the unconvolved trace with the pump arriving at the pulse
/// centre. A failing point is recorded and the sweep continues.
inline std::vector<SweepPoint> sweep(const ModelParams& base, std::span<const double> grid, const PulseParams& pulse,
                                     const SolverConfig& config, const SweepOptions& opt) {
    if (grid.empty()) throw DomainError("sweep: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("sweep: grid must be strictly ascending");

    std::vector<SweepPoint> out(grid.size());
    parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
        SweepPoint& pt = out[i];
        pt.axis_value = grid[i];
        try {
            ModelParams p = base;
            double r = opt.photon_ratio;
            if (opt.axis == SweepAxis::molecules) {
                p.n_molecules = grid[i];
            } else {
                p.n_molecules = opt.molecules;
                r = grid[i];
            }
            if (opt.lower_polariton) p.detuning_cavity = p.detuning_molecule = p.coupling * std::sqrt(p.n_molecules);
            PulseParams pu = pulse;
            pu.amplitude = drive_amplitude_from_photon_ratio(r, p.n_molecules);
            pt.regime = classify_regime(p, r, pu.width);
            pt.metrics = charging_metrics(simulate_energy(p, pu, config), pu.center);
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.ok = false;
            pt.error = e.what();
        }
    });
    return out;
}

/// Least-squares slope of log|y| against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need >= 2 matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || y[i] == 0.0) throw DomainError("loglog_slope: non-positive value");
        const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw DomainError("loglog_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

}  // namespace dicke
