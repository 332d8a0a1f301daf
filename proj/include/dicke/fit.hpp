#pragma once

// Fitting simulated energy traces to pump-probe differential reflectivity:
// dataset ingestion, windowed noise estimates, the inner (S, T0) fit, the
// global grid search over (g, γ0^z, γ^−) and 68% confidence intervals.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cumulant.hpp"
#include "energy_trace.hpp"
#include "error.hpp"
#include "lindblad.hpp"
#include "log.hpp"
#include "model.hpp"
#include "observables.hpp"
#include "parallel.hpp"
#include "units.hpp"

namespace dicke {

/// The confidence contour lies Δ*/k_eff above the minimum of the reduced χ²
/// (3 parameters, 68%).
inline constexpr double delta_star_68 = 3.51;

struct ReferenceExperiment {
    const char* label;
    double n_dye;
    double n_photon;
};

/// Molecule and photon counts of the five reference experiments.
inline constexpr ReferenceExperiment reference_experiments[] = {
    {"A1", 16.20e10, 1.90e10}, {"A2", 8.08e10, 0.98e10}, {"A3", 1.62e10, 0.26e10},
    {"B1", 1.62e10, 4.53e10},  {"B2", 0.81e10, 0.16e10},
};

inline const ReferenceExperiment* find_reference(const std::string& label) {
    for (const auto& e : reference_experiments)
        if (label == e.label) return &e;
    return nullptr;
}

/// Noise window boundaries (fs): five windows for A1/A2, four otherwise.
inline std::vector<double> default_window_edges(const std::string& label) {
    if (label == "A1" || label == "A2") return {-300.0, 300.0, 700.0, 1000.0};
    return {-300.0, 300.0, 1000.0};
}

struct NoiseWindow {
    double t_lo;   ///< fs, inclusive (−∞ for the first window)
    double t_hi;   ///< fs, exclusive (+∞ for the last window)
    double sigma;
};

struct ExperimentDataset {
    std::string label = "custom";
    double n_molecules = 0.0;
    double photon_ratio = 0.0;          ///< r
    std::vector<double> times_fs;
    std::vector<double> signal;         ///< ΔR/R
    std::vector<NoiseWindow> noise_windows;
    double response_width = 0.120;      ///< σ_R, ps

    std::size_t size() const { return times_fs.size(); }

    /// σ of the window containing each sample.
    std::vector<double> sample_sigma() const {
        if (noise_windows.empty()) throw DataError("dataset '" + label + "' has no noise estimate");
        std::vector<double> out(size());
        for (std::size_t i = 0; i < size(); ++i) {
            const double t = times_fs[i];
            const auto it = std::find_if(noise_windows.begin(), noise_windows.end(),
                                         [t](const NoiseWindow& w) { return t >= w.t_lo && t < w.t_hi; });
            if (it == noise_windows.end()) throw DataError("sample at " + std::to_string(t) + " fs is in no noise window");
            out[i] = it->sigma;
        }
        return out;
    }
};

struct DatasetMetadata {
    std::string label = "custom";
    std::optional<double> n_molecules;
    std::optional<double> photon_ratio;
    double response_width = 0.120;  ///< ps
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* first = t.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size();
}

}  // namespace detail

inline void attach_metadata(ExperimentDataset& d, const DatasetMetadata& meta) {
    d.label = meta.label;
    d.response_width = meta.response_width;
    const ReferenceExperiment* ref = find_reference(meta.label);
    if (meta.n_molecules)
        d.n_molecules = *meta.n_molecules;
    else if (ref)
        d.n_molecules = ref->n_dye;
    else
        throw ConfigError("dataset '" + meta.label + "': molecule count required for a custom label");
    if (meta.photon_ratio)
        d.photon_ratio = *meta.photon_ratio;
    else if (ref)
        d.photon_ratio = ref->n_photon / ref->n_dye;
    else
        throw ConfigError("dataset '" + meta.label + "': photon ratio r required for a custom label");
    if (!(d.n_molecules > 0.0) || !(d.photon_ratio >= 0.0))
        throw ConfigError("dataset '" + meta.label + "': N must be > 0 and r >= 0");
}

/// Two-column CSV `t_fs, dR_over_R`; `#` starts a comment, an optional
/// non-numeric header line is skipped. Unsorted input is sorted with a warning.
inline ExperimentDataset parse_dataset(std::istream& in, const DatasetMetadata& meta, const std::string& source = "<stream>") {
    ExperimentDataset d;
    attach_metadata(d, meta);
    std::string line;
    int lineno = 0;
    bool header_allowed = true;
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto comma = body.find(',');
        double t = 0, v = 0;
        const bool ok = comma != std::string::npos && body.find(',', comma + 1) == std::string::npos &&
                        detail::parse_double(body.substr(0, comma), t) && detail::parse_double(body.substr(comma + 1), v);
        if (!ok) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw DataError(source + ":" + std::to_string(lineno) + ": malformed row '" + body + "'");
        }
        if (!std::isfinite(t) || !std::isfinite(v))
            throw DataError(source + ":" + std::to_string(lineno) + ": non-finite value");
        header_allowed = false;
        rows.emplace_back(t, v);
    }
    if (rows.empty()) throw DataError(source + ": no data rows");
    if (rows.size() < 10) warn(source + ": only " + std::to_string(rows.size()) + " data rows");
    if (!std::is_sorted(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.first < b.first; })) {
        warn(source + ": samples not time-ordered; sorting");
        std::stable_sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.first < b.first; });
    }
    for (const auto& [t, v] : rows) {
        d.times_fs.push_back(t);
        d.signal.push_back(v);
    }
    return d;
}

inline ExperimentDataset load_dataset(const std::string& path, const DatasetMetadata& meta) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset '" + path + "'");
    return parse_dataset(in, meta, path);
}

/// Per-window σ from the residual scatter about a straight line over the
/// `quiet_width_fs` stretch with the smallest trend slope. Windows are
/// [−∞, e0), [e0, e1), …, [e_k, ∞).
inline std::vector<NoiseWindow> estimate_noise(const ExperimentDataset& d, std::span<const double> edges,
                                               double quiet_width_fs = 150.0, std::size_t min_samples = 5) {
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw ConfigError("noise window edges must be ascending");
    std::vector<double> bounds{-std::numeric_limits<double>::infinity()};
    bounds.insert(bounds.end(), edges.begin(), edges.end());
    bounds.push_back(std::numeric_limits<double>::infinity());

    std::vector<NoiseWindow> out;
    for (std::size_t w = 0; w + 1 < bounds.size(); ++w) {
        const double lo = bounds[w], hi = bounds[w + 1];
        const auto first = std::lower_bound(d.times_fs.begin(), d.times_fs.end(), lo);
        const auto last = std::lower_bound(d.times_fs.begin(), d.times_fs.end(), hi);
        const std::size_t b = static_cast<std::size_t>(first - d.times_fs.begin());
        const std::size_t e = static_cast<std::size_t>(last - d.times_fs.begin());
        if (e - b < min_samples)
            throw DataError("dataset '" + d.label + "': noise window [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + ") fs has " + std::to_string(e - b) + " samples, need " +
                            std::to_string(min_samples));

        double best_slope = std::numeric_limits<double>::infinity();
        double best_sigma = 0.0;
        for (std::size_t s = b; s < e; ++s) {
            std::size_t stop = s;
            while (stop < e && d.times_fs[stop] <= d.times_fs[s] + quiet_width_fs) ++stop;
            if (stop - s < min_samples) {
                if (s == b) stop = e;  // window narrower than one stretch
                else break;
            }
            const double n = static_cast<double>(stop - s);
            double mt = 0, mv = 0;
            for (std::size_t k = s; k < stop; ++k) {
                mt += d.times_fs[k];
                mv += d.signal[k];
            }
            mt /= n;
            mv /= n;
            double stt = 0, stv = 0;
            for (std::size_t k = s; k < stop; ++k) {
                stt += (d.times_fs[k] - mt) * (d.times_fs[k] - mt);
                stv += (d.times_fs[k] - mt) * (d.signal[k] - mv);
            }
            const double slope = stt > 0 ? stv / stt : 0.0;
            double ss = 0;
            for (std::size_t k = s; k < stop; ++k) {
                const double r = d.signal[k] - mv - slope * (d.times_fs[k] - mt);
                ss += r * r;
            }
            const double sigma = n > 2 ? std::sqrt(ss / (n - 2.0)) : 0.0;
            if (std::abs(slope) < best_slope) {
                best_slope = std::abs(slope);
                best_sigma = sigma;
            }
            if (stop == e) break;
        }
        if (!(best_sigma > 1e-12)) {
            warn("dataset '" + d.label + "': zero noise in window starting at " + std::to_string(lo) +
                 " fs; using floor 1e-12");
            best_sigma = 1e-12;
        }
        out.push_back({lo, hi, best_sigma});
    }
    return out;
}

/// Loads a dataset and attaches noise windows (label defaults unless `edges` given).
inline ExperimentDataset prepare_dataset(const std::string& path, const DatasetMetadata& meta,
                                         std::optional<std::vector<double>> edges = std::nullopt) {
    ExperimentDataset d = load_dataset(path, meta);
    const std::vector<double> e = edges ? *edges : default_window_edges(d.label);
    d.noise_windows = estimate_noise(d, e);
    return d;
}

struct InnerFit {
    double scale = 0.0;     ///< S
    double shift_fs = 0.0;  ///< T0
    double chi2 = 0.0;
};

/// How σ_i (data units) enters the residual S·d_i − E.
/// `data_units` compares in data units, Σ[(d_i − E/S)/σ_i]², equivalently σ_i
/// scaled by S; χ̃² ≈ 1 for a correct model. `literal` divides the energy
/// residual by σ_i directly, which favours models with small E.
enum class InnerFitNorm { data_units, literal };

struct InnerFitOptions {
    InnerFitNorm norm = InnerFitNorm::data_units;
    double shift_window_fs = 400.0;  ///< T0 searched in [−w, w]
    double coarse_step_fs = 10.0;
    double tolerance_fs = 1e-3;
};

namespace detail {

/// Precomputed per-sample quantities for repeated inner fits of one dataset.
struct PreparedData {
    std::vector<double> t_ps, d, w;  // times, data, 1/σ²
    double wdd = 0.0;

    explicit PreparedData(const ExperimentDataset& ds) {
        const std::vector<double> sigma = ds.sample_sigma();
        for (std::size_t i = 0; i < ds.size(); ++i) {
            t_ps.push_back(units::fs_to_ps(ds.times_fs[i]));
            d.push_back(ds.signal[i]);
            w.push_back(1.0 / (sigma[i] * sigma[i]));
            wdd += w.back() * d.back() * d.back();
        }
    }
};

/// χ² at fixed T0 with S at its weighted least-squares optimum.
inline InnerFit chi2_at_shift(const PreparedData& p, std::span<const double> mt, std::span<const double> me,
                              double shift_fs, InnerFitNorm norm) {
    const double s_ps = units::fs_to_ps(shift_fs);
    double wde = 0.0, wee = 0.0;
    const std::size_t n = p.t_ps.size();
    // Model samples are uniform; index arithmetic avoids a binary search.
    const double t0 = mt.front(), dt = (mt.back() - mt.front()) / static_cast<double>(mt.size() - 1);
    const std::size_t last = mt.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (p.t_ps[i] + s_ps - t0) / dt;
        double e;
        if (x <= 0.0) e = me.front();
        else if (x >= static_cast<double>(last)) e = me[last];
        else {
            const std::size_t k = static_cast<std::size_t>(x);
            const double f = x - static_cast<double>(k);
            e = me[k] + f * (me[k + 1] - me[k]);
        }
        wde += p.w[i] * p.d[i] * e;
        wee += p.w[i] * e * e;
    }
    InnerFit r;
    r.shift_fs = shift_fs;
    if (norm == InnerFitNorm::literal) {
        r.scale = p.wdd > 0.0 ? wde / p.wdd : 0.0;
        r.chi2 = std::max(0.0, r.scale * r.scale * p.wdd - 2.0 * r.scale * wde + wee);
    } else if (wee > 0.0) {
        const double c = wde / wee;  // 1/S
        r.scale = c != 0.0 ? 1.0 / c : std::numeric_limits<double>::infinity();
        r.chi2 = std::max(0.0, p.wdd - c * wde);
    } else {
        r.scale = std::numeric_limits<double>::infinity();
        r.chi2 = p.wdd;
    }
    return r;
}

inline bool better(const InnerFit& a, const InnerFit& b) {
    if (a.chi2 != b.chi2) return a.chi2 < b.chi2;
    return std::abs(a.shift_fs) < std::abs(b.shift_fs);
}

inline InnerFit inner_fit_prepared(const PreparedData& p, const EnergyTrace& model, const InnerFitOptions& opt) {
    const auto& mt = model.times;
    const auto& me = model.energy;
    if (mt.size() < 2) throw DataError("inner_fit: model trace too short");
    const double w = opt.shift_window_fs;
    const double tmin = p.t_ps.front(), tmax = p.t_ps.back();
    if (tmax + units::fs_to_ps(w) < mt.front() || tmin - units::fs_to_ps(w) > mt.back())
        throw DataError("inner_fit: no overlap between data and model for any shift");

    // Coarse scan, visiting shifts in order of increasing |T0| so ties keep the smaller shift.
    const int half = static_cast<int>(std::floor(w / opt.coarse_step_fs));
    InnerFit best = chi2_at_shift(p, mt, me, 0.0, opt.norm);
    for (int k = 1; k <= half; ++k)
        for (double sgn : {1.0, -1.0}) {
            const InnerFit c = chi2_at_shift(p, mt, me, sgn * k * opt.coarse_step_fs, opt.norm);
            if (better(c, best)) best = c;
        }

    // Golden-section refinement around the coarse minimum.
    double a = std::max(-w, best.shift_fs - opt.coarse_step_fs);
    double b = std::min(w, best.shift_fs + opt.coarse_step_fs);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    InnerFit fc = chi2_at_shift(p, mt, me, c, opt.norm), fd = chi2_at_shift(p, mt, me, d, opt.norm);
    while (b - a > opt.tolerance_fs) {
        if (fc.chi2 <= fd.chi2) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = chi2_at_shift(p, mt, me, c, opt.norm);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = chi2_at_shift(p, mt, me, d, opt.norm);
        }
    }
    for (const InnerFit& cand : {fc, fd})
        if (better(cand, best)) best = cand;
    return best;
}

}  // namespace detail

/// Minimises the weighted misfit between S·d_i and E(t_i + T0) over S
/// (closed form, see InnerFitNorm) and T0 (scan plus golden section).
/// The model must be on a uniform grid; beyond its ends it is held constant.
inline InnerFit inner_fit(const EnergyTrace& model, const ExperimentDataset& data, const InnerFitOptions& opt = {}) {
    if (data.size() == 0) throw DataError("inner_fit: empty dataset");
    uniform_step(model.times);
    const detail::PreparedData p(data);
    return detail::inner_fit_prepared(p, model, opt);
}

struct Residual {
    double t_fs;
    double value;  ///< normalized residual, see InnerFitNorm
};

inline std::vector<Residual> residuals(const EnergyTrace& model, const ExperimentDataset& data, double scale,
                                       double shift_fs, InnerFitNorm norm = InnerFitNorm::data_units) {
    const std::vector<double> sigma = data.sample_sigma();
    std::vector<Residual> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double e = interpolate_linear(model.times, model.energy, units::fs_to_ps(data.times_fs[i] + shift_fs));
        const double r = norm == InnerFitNorm::literal ? scale * data.signal[i] - e : data.signal[i] - e / scale;
        out.push_back({data.times_fs[i], r / sigma[i]});
    }
    return out;
}

struct FitGrid {
    std::vector<double> g_nev;
    std::vector<double> gamma0z;      ///< meV
    std::vector<double> gamma_minus;  ///< meV

    std::size_t size() const { return g_nev.size() * gamma0z.size() * gamma_minus.size(); }
    std::size_t index(std::size_t ig, std::size_t iz, std::size_t im) const {
        return (ig * gamma0z.size() + iz) * gamma_minus.size() + im;
    }
    std::array<std::size_t, 3> coords(std::size_t idx) const {
        const std::size_t im = idx % gamma_minus.size();
        const std::size_t iz = (idx / gamma_minus.size()) % gamma0z.size();
        const std::size_t ig = idx / (gamma_minus.size() * gamma0z.size());
        return {ig, iz, im};
    }
    const std::vector<double>& axis(int k) const { return k == 0 ? g_nev : (k == 1 ? gamma0z : gamma_minus); }
};

inline void validate(const FitGrid& g) {
    for (int k = 0; k < 3; ++k) {
        const auto& a = g.axis(k);
        if (a.empty()) throw ConfigError("fit grid axis is empty");
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!(a[i] > 0.0) || !std::isfinite(a[i])) throw ConfigError("fit grid values must be positive");
            if (i > 0 && !(a[i] > a[i - 1])) throw ConfigError("fit grid axes must be strictly ascending");
        }
    }
}

/// n values from lo to hi, equally spaced in log.
inline std::vector<double> geometric_axis(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw ConfigError("geometric_axis: need 0 < lo <= hi and n > 0");
    if (n == 1) return {lo};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    v.back() = hi;
    return v;
}

/// n values centred on c with neighbour ratio q.
inline std::vector<double> centered_geometric_axis(double c, double q, std::size_t n) {
    if (n == 1) return {c};
    const double h = 0.5 * static_cast<double>(n - 1);
    return geometric_axis(c * std::pow(q, -h), c * std::pow(q, h), n);
}

/// A grid with the same point counts, centred on `centre` and `factor` times finer.
inline FitGrid refine_grid(const FitGrid& grid, std::size_t centre, double factor = 4.0) {
    const auto c = grid.coords(centre);
    FitGrid out;
    auto refine = [&](const std::vector<double>& a, std::size_t i) {
        if (a.size() == 1) return a;
        const double q = std::pow(a.back() / a.front(), 1.0 / static_cast<double>(a.size() - 1));
        return centered_geometric_axis(a[i], std::pow(q, 1.0 / factor), a.size());
    };
    out.g_nev = refine(grid.g_nev, c[0]);
    out.gamma0z = refine(grid.gamma0z, c[1]);
    out.gamma_minus = refine(grid.gamma_minus, c[2]);
    return out;
}

struct FitOptions {
    double cavity_lifetime_fs = 120.0;  ///< T; κ = ħ/T and σ_R = T
    PulseParams pulse;                  ///< width used; amplitude and σ_R are set per dataset
    ModelParams base;                   ///< N_ref, scaling flag, detunings, ω_a
    SolverConfig solver;                ///< t_start/t_end widened to cover data ± shift window
    InnerFitOptions inner;
    unsigned threads = 0;
    bool refine = false;
};

/// Model parameters for one grid point and dataset.
inline ModelParams fit_point_params(const FitOptions& opt, double g_nev, double gamma0z, double gamma_minus,
                                    const ExperimentDataset& d) {
    ModelParams p = opt.base;
    p.n_molecules = d.n_molecules;
    p.coupling = units::nev_to_mev(g_nev);
    p.cavity_decay = units::lifetime_fs_to_kappa_mev(opt.cavity_lifetime_fs);
    p.dephasing_base = gamma0z;
    p.relaxation = gamma_minus;
    return p;
}

inline PulseParams fit_pulse(const FitOptions& opt, const ExperimentDataset& d) {
    PulseParams pu = opt.pulse;
    pu.amplitude = drive_amplitude_from_photon_ratio(d.photon_ratio, d.n_molecules);
    pu.response_width = units::fs_to_ps(opt.cavity_lifetime_fs);
    return pu;
}

/// Solver window covering every dataset shifted by up to the T0 window.
inline SolverConfig fit_solver_config(const FitOptions& opt, std::span<const ExperimentDataset> data) {
    SolverConfig s = opt.solver;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& d : data) {
        if (d.size() == 0) throw DataError("dataset '" + d.label + "' is empty");
        lo = std::min(lo, d.times_fs.front());
        hi = std::max(hi, d.times_fs.back());
    }
    const double pad = opt.inner.shift_window_fs + 5.0 * opt.cavity_lifetime_fs + opt.solver.output_dt * 1e3;
    s.t_start = std::min(s.t_start, units::fs_to_ps(lo - pad));
    s.t_end = std::max(s.t_end, units::fs_to_ps(hi + pad));
    return s;
}

/// Convolved model energy traces for every grid point and dataset, reusable
/// across fits of data sets that share N, r and the time range.
struct ModelBank {
    FitGrid grid;
    std::size_t n_datasets = 0;
    std::vector<EnergyTrace> traces;  ///< [point * n_datasets + dataset]
    std::vector<char> valid;          ///< per grid point
    std::vector<std::string> errors;  ///< per grid point, empty when valid

    const EnergyTrace& trace(std::size_t point, std::size_t dataset) const { return traces[point * n_datasets + dataset]; }
};

inline ModelBank build_model_bank(std::span<const ExperimentDataset> data, const FitGrid& grid, const FitOptions& opt) {
    validate(grid);
    if (data.empty()) throw ConfigError("fit: at least one dataset is required");
    if (!(opt.cavity_lifetime_fs > 0.0)) throw ConfigError("fit: cavity lifetime must be > 0");
    const SolverConfig solver = fit_solver_config(opt, data);
    ModelBank bank;
    bank.grid = grid;
    bank.n_datasets = data.size();
    bank.traces.resize(grid.size() * data.size());
    bank.valid.assign(grid.size(), 1);
    bank.errors.resize(grid.size());
    parallel_for(grid.size(), opt.threads, [&](std::size_t idx) {
        const auto c = grid.coords(idx);
        try {
            for (std::size_t k = 0; k < data.size(); ++k) {
                const ModelParams p =
                    fit_point_params(opt, grid.g_nev[c[0]], grid.gamma0z[c[1]], grid.gamma_minus[c[2]], data[k]);
                const PulseParams pu = fit_pulse(opt, data[k]);
                EnergyTrace raw = simulate_energy(p, pu, solver);
                raw.inversion.clear();
                raw.photon_number.clear();
                raw.photon_ratio.clear();
                bank.traces[idx * data.size() + k] = convolve_response(raw, pu.response_width);
            }
        } catch (const std::exception& e) {
            bank.valid[idx] = 0;
            bank.errors[idx] = e.what();
        }
    });
    return bank;
}

struct ParameterInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ConfidenceIntervals {
    ParameterInterval g_nev, gamma0z, gamma_minus;
    bool touches_boundary = false;

    const ParameterInterval& operator[](int k) const { return k == 0 ? g_nev : (k == 1 ? gamma0z : gamma_minus); }
    ParameterInterval& operator[](int k) { return k == 0 ? g_nev : (k == 1 ? gamma0z : gamma_minus); }
};

/// The grid minimum lies on an edge of an axis with more than one value.
class GridBoundaryError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Per-parameter extent of the grid points with χ̃² ≤ χ̃²_min + Δ*/k_eff.
inline ConfidenceIntervals confidence_intervals(const FitGrid& grid, std::span<const double> chi2_reduced,
                                                std::size_t k_eff, double delta_star = delta_star_68) {
    if (chi2_reduced.size() != grid.size()) throw DomainError("confidence_intervals: map does not match grid");
    if (k_eff == 0) throw DomainError("confidence_intervals: k_eff must be > 0");
    const auto best = std::min_element(chi2_reduced.begin(), chi2_reduced.end());
    if (!std::isfinite(*best)) throw NumericError("confidence_intervals: no valid grid point");
    const auto bc = grid.coords(static_cast<std::size_t>(best - chi2_reduced.begin()));
    for (int k = 0; k < 3; ++k) {
        const auto& a = grid.axis(k);
        if (a.size() > 1 && (bc[k] == 0 || bc[k] + 1 == a.size()))
            throw GridBoundaryError("chi-squared minimum lies on the grid boundary; extend the search grid");
    }
    const double level = *best + delta_star / static_cast<double>(k_eff);
    ConfidenceIntervals ci;
    for (int k = 0; k < 3; ++k) ci[k] = {grid.axis(k)[bc[k]], grid.axis(k)[bc[k]]};
    for (std::size_t idx = 0; idx < chi2_reduced.size(); ++idx) {
        if (!(chi2_reduced[idx] <= level)) continue;
        const auto c = grid.coords(idx);
        for (int k = 0; k < 3; ++k) {
            const auto& a = grid.axis(k);
            ci[k].lo = std::min(ci[k].lo, a[c[k]]);
            ci[k].hi = std::max(ci[k].hi, a[c[k]]);
            if (a.size() > 1 && (c[k] == 0 || c[k] + 1 == a.size())) ci.touches_boundary = true;
        }
    }
    if (ci.touches_boundary) warn("68% contour touches the grid boundary; intervals may be truncated");
    return ci;
}

struct FitResult {
    double cavity_lifetime_fs = 0.0;
    double kappa = 0.0;  ///< meV
    double g_nev = 0.0, gamma0z = 0.0, gamma_minus = 0.0;
    std::size_t best_index = 0;
    double chi2_reduced_min = 0.0;
    std::size_t k_eff = 0;
    std::optional<ConfidenceIntervals> intervals;  ///< absent when the minimum is on the grid boundary
    std::vector<InnerFit> per_dataset;
    FitGrid grid;
    std::vector<double> chi2_reduced;  ///< per grid point; +∞ where invalid
};

/// Reduced χ² map from a prebuilt bank; argmin, inner fits and intervals.
inline FitResult global_fit(std::span<const ExperimentDataset> data, const ModelBank& bank, const FitOptions& opt) {
    if (data.size() != bank.n_datasets) throw ConfigError("fit: dataset count does not match model bank");
    std::size_t k = 0;
    std::vector<detail::PreparedData> prepared;
    prepared.reserve(data.size());
    for (const auto& d : data) {
        prepared.emplace_back(d);
        k += d.size();
    }
    if (k <= 3) throw DataError("fit: need more than 3 data points in total");
    FitResult res;
    res.cavity_lifetime_fs = opt.cavity_lifetime_fs;
    res.kappa = units::lifetime_fs_to_kappa_mev(opt.cavity_lifetime_fs);
    res.k_eff = k - 3;
    res.grid = bank.grid;
    res.chi2_reduced.assign(bank.grid.size(), std::numeric_limits<double>::infinity());
    parallel_for(bank.grid.size(), opt.threads, [&](std::size_t idx) {
        if (!bank.valid[idx]) return;
        double chi2 = 0.0;
        for (std::size_t j = 0; j < data.size(); ++j)
            chi2 += detail::inner_fit_prepared(prepared[j], bank.trace(idx, j), opt.inner).chi2;
        res.chi2_reduced[idx] = chi2 / static_cast<double>(res.k_eff);
    });
    const auto best = std::min_element(res.chi2_reduced.begin(), res.chi2_reduced.end());
    if (!std::isfinite(*best)) throw NumericError("fit: every grid point failed to simulate");
    res.best_index = static_cast<std::size_t>(best - res.chi2_reduced.begin());
    res.chi2_reduced_min = *best;
    const auto c = bank.grid.coords(res.best_index);
    res.g_nev = bank.grid.g_nev[c[0]];
    res.gamma0z = bank.grid.gamma0z[c[1]];
    res.gamma_minus = bank.grid.gamma_minus[c[2]];
    for (std::size_t j = 0; j < data.size(); ++j)
        res.per_dataset.push_back(detail::inner_fit_prepared(prepared[j], bank.trace(res.best_index, j), opt.inner));
    try {
        res.intervals = confidence_intervals(bank.grid, res.chi2_reduced, res.k_eff);
    } catch (const GridBoundaryError& e) {
        warn(e.what());
    }
    return res;
}

/// Simulates the grid, fits, and optionally repeats once on a 4× finer grid
/// around the coarse minimum.
inline FitResult global_fit(std::span<const ExperimentDataset> data, const FitGrid& grid, const FitOptions& opt) {
    FitResult res = global_fit(data, build_model_bank(data, grid, opt), opt);
    if (opt.refine) res = global_fit(data, build_model_bank(data, refine_grid(grid, res.best_index), opt), opt);
    return res;
}

/// Convolved model energy trace for the best-fit point of one dataset.
inline EnergyTrace best_fit_trace(const FitResult& res, const ExperimentDataset& d, const FitOptions& opt,
                                  std::span<const ExperimentDataset> all) {
    const ModelParams p = fit_point_params(opt, res.g_nev, res.gamma0z, res.gamma_minus, d);
    const PulseParams pu = fit_pulse(opt, d);
    return convolve_response(simulate_energy(p, pu, fit_solver_config(opt, all)), pu.response_width);
}

struct SyntheticNoise {
    double base = 0.02;        ///< σ as a fraction of the peak signal
    double near_pump = 0.04;   ///< σ fraction inside [near_lo, near_hi)
    double near_lo = -300.0, near_hi = 300.0;  ///< fs
};

/// Samples S⁻¹·E(t + T0) on the given times and adds seeded Gaussian noise.
inline ExperimentDataset make_synthetic_dataset(const EnergyTrace& model, const DatasetMetadata& meta,
                                                std::span<const double> times_fs, double scale, double shift_fs,
                                                const SyntheticNoise& noise, std::mt19937_64& rng) {
    if (!(scale > 0.0)) throw DomainError("synthetic dataset: scale must be > 0");
    ExperimentDataset d;
    attach_metadata(d, meta);
    d.times_fs.assign(times_fs.begin(), times_fs.end());
    double peak = 0.0;
    for (double t : times_fs) {
        const double v = interpolate_linear(model.times, model.energy, units::fs_to_ps(t + shift_fs)) / scale;
        d.signal.push_back(v);
        peak = std::max(peak, std::abs(v));
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double t = d.times_fs[i];
        const double frac = (t >= noise.near_lo && t < noise.near_hi) ? noise.near_pump : noise.base;
        d.signal[i] += frac * peak * normal(rng);
    }
    return d;
}

}  // namespace dicke
