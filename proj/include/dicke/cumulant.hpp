#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "energy_trace.hpp"
#include "error.hpp"
#include "log.hpp"
#include "model.hpp"
#include "ode.hpp"
#include "units.hpp"

namespace dicke {

using cplx = std::complex<double>;

/// First and second moments of the driven Dicke model. Spin moments refer to
/// one molecule (first order) or two distinct molecules (second order).
struct CumulantState {
    cplx a{};    ///< ⟨a⟩
    cplx aa{};   ///< ⟨aa⟩
    cplx ax{};   ///< ⟨aσ^x⟩
    cplx ay{};   ///< ⟨aσ^y⟩
    cplx az{};   ///< ⟨aσ^z⟩
    double x = 0.0, y = 0.0, z = 0.0;  ///< ⟨σ^{x,y,z}⟩
    double n = 0.0;                    ///< ⟨a†a⟩
    double xx = 0.0, yy = 0.0, zz = 0.0, xy = 0.0, xz = 0.0, yz = 0.0;  ///< ⟨σ^α_i σ^β_j⟩, i≠j

    static constexpr std::size_t real_size = 20;
    using Packed = std::array<double, real_size>;

    /// Vacuum cavity and every molecule in |↓⟩.
    static CumulantState ground() {
        CumulantState s;
        s.z = -1.0;
        s.zz = 1.0;
        return s;
    }

    Packed pack() const {
        return {a.real(), a.imag(), aa.real(), aa.imag(), ax.real(), ax.imag(), ay.real(), ay.imag(),
                az.real(), az.imag(), x, y, z, n, xx, yy, zz, xy, xz, yz};
    }

    static CumulantState unpack(const Packed& v) {
        CumulantState s;
        s.a = {v[0], v[1]};
        s.aa = {v[2], v[3]};
        s.ax = {v[4], v[5]};
        s.ay = {v[6], v[7]};
        s.az = {v[8], v[9]};
        s.x = v[10];
        s.y = v[11];
        s.z = v[12];
        s.n = v[13];
        s.xx = v[14];
        s.yy = v[15];
        s.zz = v[16];
        s.xy = v[17];
        s.xz = v[18];
        s.yz = v[19];
        return s;
    }

    bool finite() const {
        for (double v : pack())
            if (!std::isfinite(v)) return false;
        return true;
    }
};

enum class Closure { cumulant, mean_field };

/// Reading of the constant term in the ⟨aσ^x⟩ equation. `analogy_consistent`
/// is −i(g/2)[1 + (N−1)C_xx] (agrees with the exact master equation);
/// `as_printed` is −i(g/2)[1 + (N−1)]C_xx, kept for A/B comparison only.
enum class AxBracket { analogy_consistent, as_printed };

struct SolverConfig {
    Closure closure = Closure::cumulant;
    double t_start = -0.2;    ///< ps
    double t_end = 4.0;       ///< ps
    double output_dt = 0.001; ///< ps
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 0.05;   ///< ps, outside the pulse window
    AxBracket ax_bracket = AxBracket::analogy_consistent;
};

inline void validate(const SolverConfig& c) {
    if (!(c.t_end > c.t_start)) throw DomainError("solver: t_end must exceed t_start");
    if (!(c.output_dt > 0.0)) throw DomainError("solver: output_dt must be > 0");
    if (!(c.rel_tol > 0.0) || !(c.abs_tol > 0.0)) throw DomainError("solver: tolerances must be > 0");
    if (!(c.max_step > 0.0)) throw DomainError("solver: max_step must be > 0");
}

struct MomentTrace {
    std::vector<double> times;  ///< ps
    std::vector<CumulantState> states;
};

/// Model rates converted once to angular units (1/ps).
struct Rates {
    double n = 1.0;
    double g = 0.0;
    double kappa = 0.0;
    double gamma_z = 0.0;
    double gamma_minus = 0.0;
    double gamma_tot = 0.0;
    double delta_c = 0.0;
    double delta_a = 0.0;
};

inline Rates to_rates(const ModelParams& p) {
    Rates r;
    r.n = p.n_molecules;
    r.g = units::mev_to_rate(p.coupling);
    r.kappa = units::mev_to_rate(p.cavity_decay);
    r.gamma_z = units::mev_to_rate(effective_dephasing(p));
    r.gamma_minus = units::mev_to_rate(p.relaxation);
    r.gamma_tot = 2.0 * r.gamma_z + 0.5 * r.gamma_minus;
    r.delta_c = units::mev_to_rate(p.detuning_cavity);
    r.delta_a = units::mev_to_rate(p.detuning_molecule);
    return r;
}

namespace closure {

// Third moments with vanishing third cumulants:
// ⟨ABC⟩ = ⟨AB⟩⟨C⟩ + ⟨A⟩⟨BC⟩ + ⟨AC⟩⟨B⟩ − 2⟨A⟩⟨B⟩⟨C⟩.

/// ⟨a a σ^s⟩
inline cplx aa_s(const CumulantState& m, double s, cplx as) { return m.aa * s + 2.0 * m.a * as - 2.0 * m.a * m.a * s; }

/// ⟨a† a σ^s⟩
inline cplx ada_s(const CumulantState& m, double s, cplx as) {
    return m.n * s + std::conj(m.a) * as + std::conj(as) * m.a - 2.0 * std::norm(m.a) * s;
}

/// ⟨a σ^s_i σ^t_j⟩, i≠j
inline cplx a_st(const CumulantState& m, double s, double t, cplx as, cplx at, double st) {
    return as * t + m.a * st + at * s - 2.0 * m.a * s * t;
}

}  // namespace closure

/// Time derivative of all moments with third cumulants set to zero.
inline CumulantState rhs_cumulant(const CumulantState& m, const Rates& r, double eta,
                                  AxBracket bracket = AxBracket::analogy_consistent) {
    using closure::a_st;
    using closure::aa_s;
    using closure::ada_s;
    constexpr cplx I{0.0, 1.0};
    const double g = r.g;
    const double N = r.n;
    const double Nm1 = N - 1.0;
    const double gt = r.gamma_tot;
    const double gm = r.gamma_minus;
    const double da = r.delta_a;
    const double dc = r.delta_c;
    const double k2 = 0.5 * r.kappa;

    const cplx aax = aa_s(m, m.x, m.ax), aay = aa_s(m, m.y, m.ay), aaz = aa_s(m, m.z, m.az);
    const cplx adax = ada_s(m, m.x, m.ax), aday = ada_s(m, m.y, m.ay), adaz = ada_s(m, m.z, m.az);
    const cplx axx = a_st(m, m.x, m.x, m.ax, m.ax, m.xx);
    const cplx ayy = a_st(m, m.y, m.y, m.ay, m.ay, m.yy);
    const cplx azz = a_st(m, m.z, m.z, m.az, m.az, m.zz);
    const cplx axy = a_st(m, m.x, m.y, m.ax, m.ay, m.xy);
    const cplx axz = a_st(m, m.x, m.z, m.ax, m.az, m.xz);
    const cplx ayz = a_st(m, m.y, m.z, m.ay, m.az, m.yz);

    CumulantState d;
    d.a = -(I * dc + k2) * m.a - 0.5 * g * N * (I * m.x + m.y) + eta;
    d.x = -da * m.y - 2.0 * g * m.az.imag() - gt * m.x;
    d.y = da * m.x - 2.0 * g * m.az.real() - gt * m.y;
    d.z = 2.0 * g * (m.ay.real() + m.ax.imag()) - gm * (m.z + 1.0);

    d.n = -r.kappa * m.n - g * N * (m.ax.imag() + m.ay.real()) + 2.0 * eta * m.a.real();
    d.aa = -(2.0 * I * dc + r.kappa) * m.aa - g * N * (I * m.ax + m.ay) + 2.0 * eta * m.a;

    const cplx ax_const = bracket == AxBracket::analogy_consistent ? -I * (0.5 * g) * (1.0 + Nm1 * m.xx)
                                                                   : -I * (0.5 * g) * (N * m.xx);
    d.ax = -(I * dc + k2 + gt) * m.ax - da * m.ay + ax_const - 0.5 * g * (I * m.z + Nm1 * m.xy) +
           I * g * (aaz - adaz) + eta * m.x;
    d.ay = -(I * dc + k2 + gt) * m.ay + da * m.ax - I * (0.5 * g) * (-I * m.z + Nm1 * m.xy) -
           0.5 * g * (1.0 + Nm1 * m.yy) - g * (aaz + adaz) + eta * m.y;
    d.az = -(I * dc + k2) * m.az - gm * (m.az + m.a) - 0.5 * g * (-I * m.x + Nm1 * m.yz) -
           I * (0.5 * g) * (I * m.y + Nm1 * m.xz) + g * (aay + aday) - I * g * (aax - adax) + eta * m.z;

    d.xx = -2.0 * da * m.xy - 4.0 * g * axz.imag() - 2.0 * gt * m.xx;
    d.yy = 2.0 * da * m.xy - 4.0 * g * ayz.real() - 2.0 * gt * m.yy;
    d.zz = 4.0 * g * (axz.imag() + ayz.real()) - 2.0 * gm * (m.zz + m.z);
    d.xy = da * (m.xx - m.yy) - 2.0 * g * (axz.real() + ayz.imag()) - 2.0 * gt * m.xy;
    d.xz = -da * m.yz + 2.0 * g * (axy.real() + axx.imag() - azz.imag()) - gt * m.xz - gm * (m.xz + m.x);
    d.yz = da * m.xz + 2.0 * g * (ayy.real() - azz.real() + axy.imag()) - gt * m.yz - gm * (m.yz + m.y);
    return d;
}

/// Mean-field derivative: only ⟨a⟩ and ⟨σ^{x,y,z}⟩ evolve, second moments
/// factorised as ⟨AB⟩ = ⟨A⟩⟨B⟩. Second-order fields of the input are ignored
/// and the second-order fields of the result are zero.
inline CumulantState rhs_meanfield(const CumulantState& m, const Rates& r, double eta) {
    constexpr cplx I{0.0, 1.0};
    const double g = r.g;
    const cplx az = m.a * m.z;
    const cplx ax = m.a * m.x;
    const cplx ay = m.a * m.y;
    CumulantState d;
    d.a = -(I * r.delta_c + 0.5 * r.kappa) * m.a - 0.5 * g * r.n * (I * m.x + m.y) + eta;
    d.x = -r.delta_a * m.y - 2.0 * g * az.imag() - r.gamma_tot * m.x;
    d.y = r.delta_a * m.x - 2.0 * g * az.real() - r.gamma_tot * m.y;
    d.z = 2.0 * g * (ay.real() + ax.imag()) - r.gamma_minus * (m.z + 1.0);
    return d;
}

/// Fill the second-order fields of a mean-field state with factorised products.
inline CumulantState factorize(CumulantState s) {
    s.n = std::norm(s.a);
    s.aa = s.a * s.a;
    s.ax = s.a * s.x;
    s.ay = s.a * s.y;
    s.az = s.a * s.z;
    s.xx = s.x * s.x;
    s.yy = s.y * s.y;
    s.zz = s.z * s.z;
    s.xy = s.x * s.y;
    s.xz = s.x * s.z;
    s.yz = s.y * s.z;
    return s;
}

inline CumulantState rhs_cumulant(const CumulantState& state, const ModelParams& params, const PulseParams& pulse,
                                  double t, AxBracket bracket = AxBracket::analogy_consistent) {
    if (!state.finite()) throw NumericError("rhs_cumulant: non-finite state component");
    return rhs_cumulant(state, to_rates(params), pulse_envelope(pulse, t), bracket);
}

inline CumulantState rhs_meanfield(const CumulantState& state, const ModelParams& params, const PulseParams& pulse,
                                   double t) {
    if (!state.finite()) throw NumericError("rhs_meanfield: non-finite state component");
    return rhs_meanfield(state, to_rates(params), pulse_envelope(pulse, t));
}

namespace detail {

/// Integration segments: steps capped at σ/4 within t0 ± 8σ.
inline std::vector<ode::Segment> pulse_segments(const PulseParams& pulse, double t_start, double t_end,
                                                double max_step) {
    std::vector<ode::Segment> segs;
    const double lo = pulse.center - 8.0 * pulse.width;
    const double hi = pulse.center + 8.0 * pulse.width;
    const double fine = std::min(max_step, 0.25 * pulse.width);
    if (pulse.amplitude > 0.0 && hi > t_start && lo < t_end) {
        if (lo > t_start) segs.push_back({lo, max_step});
        segs.push_back({std::min(hi, t_end), fine});
        if (hi < t_end) segs.push_back({t_end, max_step});
    } else {
        segs.push_back({t_end, max_step});
    }
    return segs;
}

}  // namespace detail

/// Evolve the moments from the ground state and sample them every output_dt.
inline MomentTrace integrate(const ModelParams& params, const PulseParams& pulse, const SolverConfig& config) {
    validate(params);
    validate(pulse);
    validate(config);
    if (params.n_molecules < 1.0)
        warn("N = " + std::to_string(params.n_molecules) + " < 1: equations are evaluated analytically in N");

    const Rates rates = to_rates(params);
    const std::vector<double> grid = ode::uniform_grid(config.t_start, config.t_end, config.output_dt);
    const auto segments = detail::pulse_segments(pulse, config.t_start, config.t_end, config.max_step);
    ode::Options opt;
    opt.rel_tol = config.rel_tol;
    opt.abs_tol = config.abs_tol;
    opt.max_step = config.max_step;

    MomentTrace trace;
    trace.times.reserve(grid.size());
    trace.states.reserve(grid.size());

    if (config.closure == Closure::cumulant) {
        using Packed = CumulantState::Packed;
        auto rhs = [&](double t, const Packed& y, Packed& dy) {
            dy = rhs_cumulant(CumulantState::unpack(y), rates, pulse_envelope(pulse, t), config.ax_bracket).pack();
        };
        auto observe = [&](double t, const Packed& y) {
            trace.times.push_back(t);
            trace.states.push_back(CumulantState::unpack(y));
        };
        ode::integrate(rhs, CumulantState::ground().pack(), config.t_start, std::span<const ode::Segment>(segments),
                       std::span<const double>(grid), opt, observe);
    } else {
        using Packed = std::array<double, 5>;
        auto expand = [](const Packed& y) {
            CumulantState s;
            s.a = {y[0], y[1]};
            s.x = y[2];
            s.y = y[3];
            s.z = y[4];
            return s;
        };
        auto rhs = [&](double t, const Packed& y, Packed& dy) {
            const CumulantState d = rhs_meanfield(expand(y), rates, pulse_envelope(pulse, t));
            dy = {d.a.real(), d.a.imag(), d.x, d.y, d.z};
        };
        auto observe = [&](double t, const Packed& y) {
            trace.times.push_back(t);
            trace.states.push_back(factorize(expand(y)));
        };
        ode::integrate(rhs, Packed{0.0, 0.0, 0.0, 0.0, -1.0}, config.t_start,
                       std::span<const ode::Segment>(segments), std::span<const double>(grid), opt, observe);
    }
    return trace;
}

/// Energy per molecule, photon number and photons per molecule over time.
inline EnergyTrace simulate_energy(const ModelParams& params, const PulseParams& pulse, const SolverConfig& config) {
    const MomentTrace moments = integrate(params, pulse, config);
    EnergyTrace out;
    const std::size_t n = moments.times.size();
    out.times = moments.times;
    out.energy.resize(n);
    out.inversion.resize(n);
    out.photon_number.resize(n);
    out.photon_ratio.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const CumulantState& s = moments.states[i];
        out.inversion[i] = s.z;
        out.energy[i] = energy_density_from_inversion(s.z, params.transition_energy);
        out.photon_number[i] = s.n;
        out.photon_ratio[i] = s.n / params.n_molecules;
    }
    return out;
}

}  // namespace dicke
