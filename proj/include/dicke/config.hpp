#pragma once

// Flat `key = value` run configuration. Keys are namespaced
// (model.N, pulse.sigma_fs, ...); unknown keys are rejected.

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "cumulant.hpp"
#include "error.hpp"
#include "fit.hpp"
#include "model.hpp"
#include "observables.hpp"
#include "units.hpp"

namespace dicke {

struct DatasetConfig {
    std::string label;
    std::string path;
    std::optional<double> n_molecules;
    std::optional<double> photon_ratio;
    std::optional<std::vector<double>> window_edges_fs;
};

struct RunConfig {
    // model
    double n_molecules = 8.08e10;
    double g_nev = 10.6;
    double cavity_lifetime_fs = 120.0;
    double gamma0z = 1.68;
    double n_ref = 8.08e10;
    bool gammaz_scales = true;
    double gamma_minus = 0.0141;
    double delta_c = 0.0, delta_a = 0.0;
    double wavelength_nm = 526.0;
    // pulse
    std::optional<double> photon_ratio = 0.14;
    std::optional<double> eta0;
    double t0_fs = 0.0;
    double sigma_fs = 20.0;
    std::optional<double> response_fs;  ///< defaults to the cavity lifetime
    // solver
    Closure closure = Closure::cumulant;
    AxBracket bracket = AxBracket::analogy_consistent;
    double t_start_ps = -0.2, t_end_ps = 4.0, dt_fs = 1.0;
    double rtol = 1e-8, atol = 1e-10, max_step_fs = 50.0;
    // sweep
    SweepAxis sweep_axis = SweepAxis::molecules;
    double sweep_from = 1e8, sweep_to = 1e12;
    int sweep_points = 9;
    bool sweep_log = true;
    std::vector<double> sweep_values;
    bool lower_polariton = false;
    // spectrum
    double spectrum_extent = 200.0;
    int spectrum_half_points = 2000;
    // oracle
    int oracle_molecules = 2;
    int oracle_fock = 8;
    double oracle_tolerance = 0.02;
    // fit
    std::vector<double> fit_lifetimes_fs{120.0};
    std::vector<double> fit_g_axis{0.1, 5000.0, 9};      ///< lo, hi, points (neV)
    std::vector<double> fit_gamma0z_axis{0.1, 5000.0, 9};  ///< meV
    std::vector<double> fit_gminus_axis{0.001, 1.0, 9};   ///< meV
    double fit_shift_window_fs = 400.0;
    bool fit_refine = false;
    std::vector<DatasetConfig> datasets;
    // run
    unsigned threads = 0;
    unsigned long long seed = 1;

    ModelParams model() const {
        ModelParams p;
        p.n_molecules = n_molecules;
        p.coupling = units::nev_to_mev(g_nev);
        p.cavity_decay = units::lifetime_fs_to_kappa_mev(cavity_lifetime_fs);
        p.dephasing_base = gamma0z;
        p.dephasing_ref_count = n_ref;
        p.dephasing_scales_with_n = gammaz_scales;
        p.relaxation = gamma_minus;
        p.detuning_cavity = delta_c;
        p.detuning_molecule = delta_a;
        p.transition_energy = units::nm_to_mev(wavelength_nm);
        validate(p);
        return p;
    }

    PulseParams pulse() const {
        PulseParams p;
        p.amplitude = eta0 ? *eta0 : drive_amplitude_from_photon_ratio(photon_ratio.value_or(0.0), n_molecules);
        p.center = units::fs_to_ps(t0_fs);
        p.width = units::fs_to_ps(sigma_fs);
        p.response_width = units::fs_to_ps(response_fs.value_or(cavity_lifetime_fs));
        validate(p);
        return p;
    }

    SolverConfig solver() const {
        SolverConfig s;
        s.closure = closure;
        s.ax_bracket = bracket;
        s.t_start = t_start_ps;
        s.t_end = t_end_ps;
        s.output_dt = units::fs_to_ps(dt_fs);
        s.rel_tol = rtol;
        s.abs_tol = atol;
        s.max_step = units::fs_to_ps(max_step_fs);
        validate(s);
        return s;
    }

    std::vector<double> sweep_grid() const {
        if (!sweep_values.empty()) return sweep_values;
        if (sweep_points < 1) throw ConfigError("sweep.points must be >= 1");
        if (sweep_log) return geometric_axis(sweep_from, sweep_to, static_cast<std::size_t>(sweep_points));
        std::vector<double> v(static_cast<std::size_t>(sweep_points));
        for (int i = 0; i < sweep_points; ++i)
            v[static_cast<std::size_t>(i)] =
                sweep_points == 1 ? sweep_from : sweep_from + (sweep_to - sweep_from) * i / (sweep_points - 1);
        return v;
    }

    FitGrid fit_grid() const {
        auto axis = [](const std::vector<double>& a, const char* key) {
            if (a.size() != 3 || a[2] < 1 || a[2] != std::floor(a[2]))
                throw ConfigError(std::string(key) + " must be 'lo, hi, points'");
            return geometric_axis(a[0], a[1], static_cast<std::size_t>(a[2]));
        };
        return {axis(fit_g_axis, "fit.g_neV"), axis(fit_gamma0z_axis, "fit.gamma0z_meV"),
                axis(fit_gminus_axis, "fit.gammaminus_meV")};
    }
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    if (!parse_double(v, out)) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

inline int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("config: '" + key + "' expects an integer");
    return static_cast<int>(d);
}

inline std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma-separated list");
    return out;
}

inline std::vector<std::string> to_words(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + csv::num(v[i]);
    return s;
}

}  // namespace detail

inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    using namespace detail;
    auto d = [&] { return to_double(key, value); };
    if (key == "model.N") c.n_molecules = d();
    else if (key == "model.g_neV") c.g_nev = d();
    else if (key == "model.cavity_lifetime_fs") c.cavity_lifetime_fs = d();
    else if (key == "model.gamma0z_meV") c.gamma0z = d();
    else if (key == "model.N_ref") c.n_ref = d();
    else if (key == "model.gammaz_scales_with_N") c.gammaz_scales = to_bool(key, value);
    else if (key == "model.gammaminus_meV") c.gamma_minus = d();
    else if (key == "model.delta_c_meV") c.delta_c = d();
    else if (key == "model.delta_a_meV") c.delta_a = d();
    else if (key == "model.wavelength_nm") c.wavelength_nm = d();
    else if (key == "pulse.r") { c.photon_ratio = d(); c.eta0.reset(); }
    else if (key == "pulse.eta0") { c.eta0 = d(); c.photon_ratio.reset(); }
    else if (key == "pulse.t0_fs") c.t0_fs = d();
    else if (key == "pulse.sigma_fs") c.sigma_fs = d();
    else if (key == "pulse.response_fs") c.response_fs = d();
    else if (key == "solver.closure") {
        if (value == "cumulant") c.closure = Closure::cumulant;
        else if (value == "mean-field" || value == "mean_field") c.closure = Closure::mean_field;
        else throw ConfigError("config: solver.closure must be 'cumulant' or 'mean-field'");
    } else if (key == "solver.ax_bracket") {
        if (value == "analogy") c.bracket = AxBracket::analogy_consistent;
        else if (value == "printed") c.bracket = AxBracket::as_printed;
        else throw ConfigError("config: solver.ax_bracket must be 'analogy' or 'printed'");
    } else if (key == "solver.t_start_ps") c.t_start_ps = d();
    else if (key == "solver.t_end_ps") c.t_end_ps = d();
    else if (key == "solver.dt_fs") c.dt_fs = d();
    else if (key == "solver.rtol") c.rtol = d();
    else if (key == "solver.atol") c.atol = d();
    else if (key == "solver.max_step_fs") c.max_step_fs = d();
    else if (key == "sweep.axis") {
        if (value == "N") c.sweep_axis = SweepAxis::molecules;
        else if (value == "r") c.sweep_axis = SweepAxis::photon_ratio;
        else throw ConfigError("config: sweep.axis must be 'N' or 'r'");
    } else if (key == "sweep.from") c.sweep_from = d();
    else if (key == "sweep.to") c.sweep_to = d();
    else if (key == "sweep.points") c.sweep_points = to_int(key, value);
    else if (key == "sweep.spacing") {
        if (value == "log") c.sweep_log = true;
        else if (value == "linear") c.sweep_log = false;
        else throw ConfigError("config: sweep.spacing must be 'log' or 'linear'");
    } else if (key == "sweep.values") c.sweep_values = to_list(key, value);
    else if (key == "sweep.lower_polariton") c.lower_polariton = to_bool(key, value);
    else if (key == "spectrum.extent_meV") c.spectrum_extent = d();
    else if (key == "spectrum.half_points") c.spectrum_half_points = to_int(key, value);
    else if (key == "oracle.n_molecules") c.oracle_molecules = to_int(key, value);
    else if (key == "oracle.fock_cutoff") c.oracle_fock = to_int(key, value);
    else if (key == "oracle.tolerance") c.oracle_tolerance = d();
    else if (key == "fit.lifetimes_fs") c.fit_lifetimes_fs = to_list(key, value);
    else if (key == "fit.g_neV") c.fit_g_axis = to_list(key, value);
    else if (key == "fit.gamma0z_meV") c.fit_gamma0z_axis = to_list(key, value);
    else if (key == "fit.gammaminus_meV") c.fit_gminus_axis = to_list(key, value);
    else if (key == "fit.shift_window_fs") c.fit_shift_window_fs = d();
    else if (key == "fit.refine") c.fit_refine = to_bool(key, value);
    else if (key == "fit.datasets") {
        c.datasets.clear();
        for (const auto& label : to_words(value)) c.datasets.push_back({label, {}, {}, {}, {}});
    } else if (key.rfind("dataset.", 0) == 0) {
        const auto dot = key.find('.', 8);
        if (dot == std::string::npos) throw ConfigError("config: malformed dataset key '" + key + "'");
        const std::string label = key.substr(8, dot - 8), field = key.substr(dot + 1);
        auto it = std::find_if(c.datasets.begin(), c.datasets.end(), [&](auto& ds) { return ds.label == label; });
        if (it == c.datasets.end())
            throw ConfigError("config: dataset '" + label + "' is not listed in fit.datasets (list it first)");
        if (field == "path") it->path = value;
        else if (field == "N") it->n_molecules = d();
        else if (field == "r") it->photon_ratio = d();
        else if (field == "windows_fs") it->window_edges_fs = to_list(key, value);
        else throw ConfigError("config: unknown key '" + key + "'");
    } else if (key == "run.threads") c.threads = static_cast<unsigned>(to_int(key, value));
    else if (key == "run.seed") c.seed = static_cast<unsigned long long>(d());
    else throw ConfigError("config: unknown key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    RunConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(body.substr(0, eq)), value = detail::trim(body.substr(eq + 1));
        try {
            apply_setting(c, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse_config(in, path);
}

/// Every key with its effective value; parses back to the same configuration.
inline std::string resolved_config(const RunConfig& c) {
    using csv::num;
    using detail::join;
    std::ostringstream o;
    o << "model.N = " << num(c.n_molecules) << '\n'
      << "model.g_neV = " << num(c.g_nev) << '\n'
      << "model.cavity_lifetime_fs = " << num(c.cavity_lifetime_fs) << '\n'
      << "model.gamma0z_meV = " << num(c.gamma0z) << '\n'
      << "model.N_ref = " << num(c.n_ref) << '\n'
      << "model.gammaz_scales_with_N = " << (c.gammaz_scales ? "true" : "false") << '\n'
      << "model.gammaminus_meV = " << num(c.gamma_minus) << '\n'
      << "model.delta_c_meV = " << num(c.delta_c) << '\n'
      << "model.delta_a_meV = " << num(c.delta_a) << '\n'
      << "model.wavelength_nm = " << num(c.wavelength_nm) << '\n';
    if (c.eta0) o << "pulse.eta0 = " << num(*c.eta0) << '\n';
    else o << "pulse.r = " << num(c.photon_ratio.value_or(0.0)) << '\n';
    o << "pulse.t0_fs = " << num(c.t0_fs) << '\n'
      << "pulse.sigma_fs = " << num(c.sigma_fs) << '\n'
      << "pulse.response_fs = " << num(c.response_fs.value_or(c.cavity_lifetime_fs)) << '\n'
      << "solver.closure = " << (c.closure == Closure::cumulant ? "cumulant" : "mean-field") << '\n'
      << "solver.ax_bracket = " << (c.bracket == AxBracket::analogy_consistent ? "analogy" : "printed") << '\n'
      << "solver.t_start_ps = " << num(c.t_start_ps) << '\n'
      << "solver.t_end_ps = " << num(c.t_end_ps) << '\n'
      << "solver.dt_fs = " << num(c.dt_fs) << '\n'
      << "solver.rtol = " << num(c.rtol) << '\n'
      << "solver.atol = " << num(c.atol) << '\n'
      << "solver.max_step_fs = " << num(c.max_step_fs) << '\n'
      << "sweep.axis = " << (c.sweep_axis == SweepAxis::molecules ? "N" : "r") << '\n'
      << "sweep.from = " << num(c.sweep_from) << '\n'
      << "sweep.to = " << num(c.sweep_to) << '\n'
      << "sweep.points = " << c.sweep_points << '\n'
      << "sweep.spacing = " << (c.sweep_log ? "log" : "linear") << '\n';
    if (!c.sweep_values.empty()) o << "sweep.values = " << join(c.sweep_values) << '\n';
    o << "sweep.lower_polariton = " << (c.lower_polariton ? "true" : "false") << '\n'
      << "spectrum.extent_meV = " << num(c.spectrum_extent) << '\n'
      << "spectrum.half_points = " << c.spectrum_half_points << '\n'
      << "oracle.n_molecules = " << c.oracle_molecules << '\n'
      << "oracle.fock_cutoff = " << c.oracle_fock << '\n'
      << "oracle.tolerance = " << num(c.oracle_tolerance) << '\n'
      << "fit.lifetimes_fs = " << join(c.fit_lifetimes_fs) << '\n'
      << "fit.g_neV = " << join(c.fit_g_axis) << '\n'
      << "fit.gamma0z_meV = " << join(c.fit_gamma0z_axis) << '\n'
      << "fit.gammaminus_meV = " << join(c.fit_gminus_axis) << '\n'
      << "fit.shift_window_fs = " << num(c.fit_shift_window_fs) << '\n'
      << "fit.refine = " << (c.fit_refine ? "true" : "false") << '\n';
    if (!c.datasets.empty()) {
        o << "fit.datasets = ";
        for (std::size_t i = 0; i < c.datasets.size(); ++i) o << (i ? ", " : "") << c.datasets[i].label;
        o << '\n';
        for (const auto& ds : c.datasets) {
            const std::string p = "dataset." + ds.label + ".";
            if (!ds.path.empty()) o << p << "path = " << ds.path << '\n';
            if (ds.n_molecules) o << p << "N = " << num(*ds.n_molecules) << '\n';
            if (ds.photon_ratio) o << p << "r = " << num(*ds.photon_ratio) << '\n';
            if (ds.window_edges_fs) o << p << "windows_fs = " << join(*ds.window_edges_fs) << '\n';
        }
    }
    o << "run.threads = " << c.threads << '\n' << "run.seed = " << c.seed << '\n';
    return o.str();
}

}  // namespace dicke
