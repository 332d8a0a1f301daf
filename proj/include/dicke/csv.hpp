#pragma once

// CSV writers. Numbers use the C locale and %.12g so output is byte-stable.

#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "energy_trace.hpp"
#include "fit.hpp"
#include "lindblad.hpp"
#include "model.hpp"
#include "observables.hpp"
#include "spectrum.hpp"

namespace dicke::csv {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_comment(std::ostream& os, const std::string& text) {
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        os << "# " << text.substr(start, end == std::string::npos ? std::string::npos : end - start) << '\n';
        if (end == std::string::npos) break;
        start = end + 1;
    }
}

inline std::string describe(const ModelParams& p) {
    return "N=" + num(p.n_molecules) + " g_meV=" + num(p.coupling) + " kappa_meV=" + num(p.cavity_decay) +
           " gamma0z_meV=" + num(p.dephasing_base) + " N_ref=" + num(p.dephasing_ref_count) +
           " gammaz_scales=" + (p.dephasing_scales_with_n ? "1" : "0") + " gammaminus_meV=" + num(p.relaxation) +
           " delta_c_meV=" + num(p.detuning_cavity) + " delta_a_meV=" + num(p.detuning_molecule) +
           " omega_a_meV=" + num(p.transition_energy);
}

inline std::string describe(const PulseParams& p) {
    return "eta0=" + num(p.amplitude) + " t0_ps=" + num(p.center) + " sigma_ps=" + num(p.width) +
           " sigma_R_ps=" + num(p.response_width);
}

/// `t_ps, E_meV, Cz, n_photons, n_over_N`; missing optional series are written as nan.
inline void write_trace(std::ostream& os, const EnergyTrace& tr, const std::string& comment = {}) {
    if (!comment.empty()) write_comment(os, comment);
    os << "t_ps,E_meV,Cz,n_photons,n_over_N\n";
    auto at = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? num(v[i]) : std::string("nan"); };
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        os << num(tr.times[i]) << ',' << num(tr.energy[i]) << ',' << at(tr.inversion, i) << ','
           << at(tr.photon_number, i) << ',' << at(tr.photon_ratio, i) << '\n';
}

inline void write_metrics(std::ostream& os, const ChargingMetrics& m) {
    os << "tau_ps,Emax_meV,Pmax_meV_per_ps,t_peak_ps,t_half_ps\n"
       << num(m.rise_time) << ',' << num(m.peak_energy) << ',' << num(m.peak_power) << ',' << num(m.t_peak) << ','
       << num(m.t_half) << '\n';
}

inline void write_sweep(std::ostream& os, std::span<const SweepPoint> pts, const std::string& comment = {}) {
    if (!comment.empty()) write_comment(os, comment);
    for (const auto& p : pts)
        if (!p.ok) write_comment(os, "point " + num(p.axis_value) + " failed: " + p.error);
    os << "axis_value,tau_ps,Emax_meV,Pmax_meV_per_ps,regime,N_kappa,N_gammaz,N_sigma\n";
    for (const auto& p : pts) {
        os << num(p.axis_value) << ',';
        if (p.ok)
            os << num(p.metrics.rise_time) << ',' << num(p.metrics.peak_energy) << ',' << num(p.metrics.peak_power)
               << ',' << to_string(p.regime.regime);
        else
            os << "nan,nan,nan,failed";
        os << ',' << num(p.regime.n_kappa) << ',' << num(p.regime.n_gammaz) << ',' << num(p.regime.n_sigma) << '\n';
    }
}

inline void write_spectrum(std::ostream& os, const SpectrumResult& s, const std::string& comment = {}) {
    if (!comment.empty()) write_comment(os, comment);
    os << "delta_nu_meV,absorption\n";
    for (std::size_t i = 0; i < s.detunings.size(); ++i) os << num(s.detunings[i]) << ',' << num(s.absorption[i]) << '\n';
}

inline void write_chi2_map(std::ostream& os, const FitResult& r) {
    os << "g_neV,gamma0z_meV,gammaminus_meV,chi2_reduced\n";
    for (std::size_t idx = 0; idx < r.grid.size(); ++idx) {
        const auto c = r.grid.coords(idx);
        os << num(r.grid.g_nev[c[0]]) << ',' << num(r.grid.gamma0z[c[1]]) << ',' << num(r.grid.gamma_minus[c[2]])
           << ',' << num(r.chi2_reduced[idx]) << '\n';
    }
}

inline void write_residuals(std::ostream& os, std::span<const Residual> res) {
    os << "t_fs,normalized_residual\n";
    for (const auto& r : res) os << num(r.t_fs) << ',' << num(r.value) << '\n';
}

/// Oracle trace columns plus truncation diagnostics.
inline void write_oracle_trace(std::ostream& os, const OracleTrace& o, const std::string& comment = {}) {
    if (!comment.empty()) write_comment(os, comment);
    os << "t_ps,E_meV,Cz,n_photons,trace_error,min_eigenvalue,top_fock_population\n";
    for (std::size_t i = 0; i < o.times.size(); ++i) {
        const auto& s = o.moments[i];
        os << num(o.times[i]) << ',' << num(energy_density_from_inversion(s.z, o.transition_energy)) << ','
           << num(s.z) << ',' << num(s.n) << ',' << num(o.trace_error[i]) << ',' << num(o.min_eigenvalue[i]) << ','
           << num(o.top_fock_population[i]) << '\n';
    }
}

}  // namespace dicke::csv
