#pragma once

// Exact Lindblad evolution for a few molecules in a truncated Fock space.
// Serves as ground truth for the cumulant solver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "cumulant.hpp"
#include "error.hpp"
#include "model.hpp"
#include "ode.hpp"

namespace dicke {

struct OracleConfig {
    int n_molecules = 1;  ///< 1..3; overrides params.n_molecules
    int fock_cutoff = 8;  ///< highest retained photon number
    int initial_photons = 0;  ///< initial Fock state of the cavity (molecules start in |↓⟩)
    ModelParams params;
    PulseParams pulse;
    SolverConfig solver;
    double truncation_threshold = 1e-6;  ///< max allowed population of the top Fock level
};

inline constexpr int oracle_max_dimension = 64;

inline int oracle_dimension(const OracleConfig& c) { return (1 << c.n_molecules) * (c.fock_cutoff + 1); }

/// Density matrix ρ with its physical-validity diagnostics.
struct DensityMatrix {
    Eigen::MatrixXcd entries;

    int dim() const { return static_cast<int>(entries.rows()); }
    double trace_error() const { return std::abs(entries.trace() - std::complex<double>(1.0, 0.0)); }
    double hermiticity_error() const { return (entries - entries.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const {
        const Eigen::MatrixXcd h = 0.5 * (entries + entries.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
};

/// Molecule-averaged moments of the exact state, sampled on the output grid.
struct OracleTrace {
    std::vector<double> times;
    std::vector<CumulantState> moments;
    std::vector<double> trace_error;
    std::vector<double> min_eigenvalue;
    std::vector<double> top_fock_population;
    std::vector<double> hermiticity_error;
    std::vector<double> sigma_z_first;   ///< ⟨σ^z_1⟩
    std::vector<double> sigma_z_last;    ///< ⟨σ^z_N⟩
    double transition_energy = 0.0;
    DensityMatrix final_state;
};

namespace detail {

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Operators on cavity ⊗ molecule_1 ⊗ … ⊗ molecule_N. Spin basis {|↑⟩, |↓⟩}.
struct OracleOperators {
    Eigen::MatrixXcd a, n_top;
    std::vector<Eigen::MatrixXcd> sx, sy, sz, sm;

    OracleOperators(int n_mol, int cutoff) {
        const int d = cutoff + 1;
        Eigen::MatrixXcd a1 = Eigen::MatrixXcd::Zero(d, d);
        for (int k = 1; k < d; ++k) a1(k - 1, k) = std::sqrt(static_cast<double>(k));
        Eigen::MatrixXcd top = Eigen::MatrixXcd::Zero(d, d);
        top(cutoff, cutoff) = 1.0;
        const Eigen::MatrixXcd i2 = Eigen::MatrixXcd::Identity(2, 2);
        Eigen::MatrixXcd px(2, 2), py(2, 2), pz(2, 2), pm(2, 2);
        px << 0, 1, 1, 0;
        py << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
        pz << 1, 0, 0, -1;
        pm << 0, 0, 1, 0;

        auto embed_cavity = [&](const Eigen::MatrixXcd& op) {
            Eigen::MatrixXcd out = op;
            for (int k = 0; k < n_mol; ++k) out = kron(out, i2);
            return out;
        };
        auto embed_spin = [&](const Eigen::MatrixXcd& op, int which) {
            Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(d, d);
            for (int k = 0; k < n_mol; ++k) out = kron(out, k == which ? op : i2);
            return out;
        };
        a = embed_cavity(a1);
        n_top = embed_cavity(top);
        for (int k = 0; k < n_mol; ++k) {
            sx.push_back(embed_spin(px, k));
            sy.push_back(embed_spin(py, k));
            sz.push_back(embed_spin(pz, k));
            sm.push_back(embed_spin(pm, k));
        }
    }
};

inline std::complex<double> expect(const Eigen::MatrixXcd& op, const Eigen::MatrixXcd& rho) {
    return op.transpose().cwiseProduct(rho).sum();
}

}  // namespace detail

/// Lindblad generator and moment extraction for an OracleConfig.
class LindbladModel {
public:
    using Mat = Eigen::MatrixXcd;
    using cd = std::complex<double>;

    explicit LindbladModel(const OracleConfig& config) : config_(config), ops_(check(config), config.fock_cutoff) {
        params_ = config.params;
        params_.n_molecules = config.n_molecules;
        validate(params_);
        validate(config.pulse);
        const int nm = config.n_molecules;
        dim_ = oracle_dimension(config);
        const Rates r = to_rates(params_);
        const Mat ad = ops_.a.adjoint();

        Mat h0 = r.delta_c * ad * ops_.a;
        for (int k = 0; k < nm; ++k)
            h0 += 0.5 * r.delta_a * ops_.sz[k] + r.g * (ad * ops_.sm[k] + ops_.a * ops_.sm[k].adjoint());
        h_drive_ = cd(0.0, 1.0) * (ad - ops_.a);
        if (r.kappa > 0.0) jumps_.emplace_back(r.kappa, ops_.a);
        for (int k = 0; k < nm; ++k) {
            if (r.gamma_z > 0.0) jumps_.emplace_back(r.gamma_z, ops_.sz[k]);
            if (r.gamma_minus > 0.0) jumps_.emplace_back(r.gamma_minus, ops_.sm[k]);
        }
        // Non-Hermitian effective Hamiltonian: H − (i/2)Σ γ c†c.
        h0_eff_ = h0;
        for (const auto& [rate, c] : jumps_) h0_eff_ -= cd(0.0, 0.5 * rate) * c.adjoint() * c;

        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < nm; ++i)
            for (int j = 0; j < nm; ++j)
                if (i != j) pairs.emplace_back(i, j);
        auto avg1 = [&](const std::vector<Mat>& s, const Mat& left) {
            Mat m = Mat::Zero(dim_, dim_);
            for (const auto& op : s) m += left * op;
            return Mat(m / static_cast<double>(nm));
        };
        auto avg2 = [&](const std::vector<Mat>& s, const std::vector<Mat>& t) {
            Mat m = Mat::Zero(dim_, dim_);
            if (pairs.empty()) return m;
            for (const auto& [i, j] : pairs) m += s[i] * t[j];
            return Mat(m / static_cast<double>(pairs.size()));
        };
        const Mat id = Mat::Identity(dim_, dim_);
        o_x_ = avg1(ops_.sx, id);
        o_y_ = avg1(ops_.sy, id);
        o_z_ = avg1(ops_.sz, id);
        o_ax_ = avg1(ops_.sx, ops_.a);
        o_ay_ = avg1(ops_.sy, ops_.a);
        o_az_ = avg1(ops_.sz, ops_.a);
        o_n_ = ad * ops_.a;
        o_aa_ = ops_.a * ops_.a;
        o_xx_ = avg2(ops_.sx, ops_.sx);
        o_yy_ = avg2(ops_.sy, ops_.sy);
        o_zz_ = avg2(ops_.sz, ops_.sz);
        o_xy_ = avg2(ops_.sx, ops_.sy);
        o_xz_ = avg2(ops_.sx, ops_.sz);
        o_yz_ = avg2(ops_.sy, ops_.sz);
    }

    int dim() const { return dim_; }
    const ModelParams& params() const { return params_; }
    const detail::OracleOperators& operators() const { return ops_; }

    /// |n_0⟩⟨n_0| ⊗ |↓…↓⟩⟨↓…↓|.
    Mat initial_state() const {
        int idx = config_.initial_photons;
        for (int k = 0; k < config_.n_molecules; ++k) idx = idx * 2 + 1;  // spin index 1 is |↓⟩
        Mat rho = Mat::Zero(dim_, dim_);
        rho(idx, idx) = 1.0;
        return rho;
    }

    /// dρ/dt, written into `out` (may not alias rho).
    template <class In, class Out>
    void derivative(double t, const In& rho, Out&& out) const {
        Mat heff = h0_eff_;
        const double eta = pulse_envelope(config_.pulse, t);
        if (eta != 0.0) heff += eta * h_drive_;
        Mat tmp = heff * rho;
        out = cd(0.0, -1.0) * tmp;
        out += cd(0.0, 1.0) * tmp.adjoint();  // ρ Heff† = (Heff ρ)† for Hermitian ρ
        for (const auto& [rate, c] : jumps_) {
            tmp.noalias() = c * rho;
            out.noalias() += rate * tmp * c.adjoint();
        }
    }

    Mat derivative(double t, const Mat& rho) const {
        Mat out(dim_, dim_);
        derivative(t, rho, out);
        return out;
    }

    /// Molecule-averaged moments Tr(Oρ); linear in ρ, so moments(dρ/dt) = d⟨O⟩/dt.
    template <class In>
    CumulantState moments(const In& rho) const {
        using detail::expect;
        CumulantState s;
        s.a = expect(ops_.a, rho);
        s.aa = expect(o_aa_, rho);
        s.ax = expect(o_ax_, rho);
        s.ay = expect(o_ay_, rho);
        s.az = expect(o_az_, rho);
        s.x = expect(o_x_, rho).real();
        s.y = expect(o_y_, rho).real();
        s.z = expect(o_z_, rho).real();
        s.n = expect(o_n_, rho).real();
        s.xx = expect(o_xx_, rho).real();
        s.yy = expect(o_yy_, rho).real();
        s.zz = expect(o_zz_, rho).real();
        s.xy = expect(o_xy_, rho).real();
        s.xz = expect(o_xz_, rho).real();
        s.yz = expect(o_yz_, rho).real();
        return s;
    }

private:
    static int check(const OracleConfig& c) {
        if (c.n_molecules < 1 || c.n_molecules > 3) throw ConfigError("oracle: n_molecules must be 1..3");
        if (c.fock_cutoff < 1) throw ConfigError("oracle: fock_cutoff must be >= 1");
        if (c.initial_photons < 0 || c.initial_photons > c.fock_cutoff)
            throw ConfigError("oracle: initial_photons must lie within the Fock cutoff");
        const int dim = oracle_dimension(c);
        if (dim > oracle_max_dimension)
            throw ConfigError("oracle: Hilbert dimension " + std::to_string(dim) + " exceeds cap " +
                              std::to_string(oracle_max_dimension));
        return c.n_molecules;
    }

    OracleConfig config_;
    detail::OracleOperators ops_;
    ModelParams params_;
    int dim_ = 0;
    Mat h0_eff_, h_drive_;
    std::vector<std::pair<double, Mat>> jumps_;
    Mat o_x_, o_y_, o_z_, o_ax_, o_ay_, o_az_, o_n_, o_aa_, o_xx_, o_yy_, o_zz_, o_xy_, o_xz_, o_yz_;
};

/// Integrate the full master equation from |n_0⟩⊗|↓…↓⟩ and sample moments.
/// Throws ConfigError when the Hilbert space exceeds the dimension cap and
/// TruncationError when the top Fock level becomes populated.
inline OracleTrace evolve_exact(const OracleConfig& config) {
    using Mat = Eigen::MatrixXcd;
    using cd = std::complex<double>;
    const LindbladModel model(config);
    validate(config.solver);
    const int dim = model.dim();
    const auto& ops = model.operators();

    using State = std::vector<double>;
    auto as_matrix = [dim](const State& v) {
        return Eigen::Map<const Mat>(reinterpret_cast<const cd*>(v.data()), dim, dim);
    };
    auto rhs = [&](double t, const State& y, State& dy) {
        model.derivative(t, as_matrix(y), Eigen::Map<Mat>(reinterpret_cast<cd*>(dy.data()), dim, dim));
    };

    State y(2 * static_cast<std::size_t>(dim) * dim, 0.0);
    Eigen::Map<Mat>(reinterpret_cast<cd*>(y.data()), dim, dim) = model.initial_state();

    OracleTrace out;
    out.transition_energy = model.params().transition_energy;
    auto observe = [&](double t, const State& yv) {
        const DensityMatrix dm{as_matrix(yv)};
        out.times.push_back(t);
        out.moments.push_back(model.moments(dm.entries));
        out.trace_error.push_back(dm.trace_error());
        out.hermiticity_error.push_back(dm.hermiticity_error());
        out.min_eigenvalue.push_back(dm.min_eigenvalue());
        out.top_fock_population.push_back(detail::expect(ops.n_top, dm.entries).real());
        out.sigma_z_first.push_back(detail::expect(ops.sz.front(), dm.entries).real());
        out.sigma_z_last.push_back(detail::expect(ops.sz.back(), dm.entries).real());
    };

    const std::vector<double> grid = ode::uniform_grid(config.solver.t_start, config.solver.t_end, config.solver.output_dt);
    const auto segments =
        detail::pulse_segments(config.pulse, config.solver.t_start, config.solver.t_end, config.solver.max_step);
    ode::Options opt;
    opt.rel_tol = config.solver.rel_tol;
    opt.abs_tol = config.solver.abs_tol;
    opt.max_step = config.solver.max_step;
    const State final_state = ode::integrate(rhs, std::move(y), config.solver.t_start,
                                             std::span<const ode::Segment>(segments), std::span<const double>(grid),
                                             opt, observe);
    out.final_state.entries = as_matrix(final_state);

    const double worst = *std::max_element(out.top_fock_population.begin(), out.top_fock_population.end());
    if (worst > config.truncation_threshold)
        throw TruncationError("oracle: top Fock level population " + std::to_string(worst) + " exceeds " +
                              std::to_string(config.truncation_threshold) + "; increase fock_cutoff");
    return out;
}

enum class Observable { energy, inversion, photon_number, cavity_field_abs };

inline Observable parse_observable(const std::string& name) {
    if (name == "E" || name == "energy") return Observable::energy;
    if (name == "Cz" || name == "inversion") return Observable::inversion;
    if (name == "n" || name == "photon_number") return Observable::photon_number;
    if (name == "abs_a" || name == "cavity_field") return Observable::cavity_field_abs;
    throw ConfigError("unknown observable '" + name + "'");
}

inline std::vector<double> observable_series(std::span<const CumulantState> states, Observable obs,
                                             double transition_energy) {
    std::vector<double> out;
    out.reserve(states.size());
    for (const CumulantState& s : states) {
        switch (obs) {
            case Observable::energy: out.push_back(energy_density_from_inversion(s.z, transition_energy)); break;
            case Observable::inversion: out.push_back(s.z); break;
            case Observable::photon_number: out.push_back(s.n); break;
            case Observable::cavity_field_abs: out.push_back(std::abs(s.a)); break;
        }
    }
    return out;
}

struct ComparisonResult {
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;   ///< max_abs_error / max|reference|
    double peak_rel_error = 0.0;  ///< |max test − max reference| / |max reference|
};

/// Linear interpolation of (times, values) at t; times must be ascending.
inline double interpolate_linear(std::span<const double> times, std::span<const double> values, double t) {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

/// Error norms of a test series against a reference on the reference grid,
/// restricted to the overlap of the two time ranges.
inline ComparisonResult compare_series(std::span<const double> ref_times, std::span<const double> ref_values,
                                       std::span<const double> test_times, std::span<const double> test_values) {
    if (ref_times.empty() || test_times.empty()) throw DomainError("compare: empty series");
    const double lo = std::max(ref_times.front(), test_times.front());
    const double hi = std::min(ref_times.back(), test_times.back());
    if (lo > hi) throw DomainError("compare: disjoint time ranges");
    ComparisonResult r;
    double ref_peak = -std::numeric_limits<double>::infinity();
    double test_peak = -std::numeric_limits<double>::infinity();
    double ref_scale = 0.0;
    for (std::size_t i = 0; i < ref_times.size(); ++i) {
        const double t = ref_times[i];
        if (t < lo || t > hi) continue;
        const double tv = interpolate_linear(test_times, test_values, t);
        r.max_abs_error = std::max(r.max_abs_error, std::abs(tv - ref_values[i]));
        ref_peak = std::max(ref_peak, ref_values[i]);
        test_peak = std::max(test_peak, tv);
        ref_scale = std::max(ref_scale, std::abs(ref_values[i]));
    }
    r.max_rel_error = ref_scale > 0.0 ? r.max_abs_error / ref_scale : (r.max_abs_error > 0.0 ? INFINITY : 0.0);
    const double peak_diff = std::abs(test_peak - ref_peak);
    r.peak_rel_error = ref_peak != 0.0 ? peak_diff / std::abs(ref_peak) : (peak_diff > 0.0 ? INFINITY : 0.0);
    return r;
}

inline ComparisonResult compare_cumulant(const OracleTrace& oracle, const MomentTrace& cumulant, Observable obs) {
    const auto ref = observable_series(oracle.moments, obs, oracle.transition_energy);
    const auto test = observable_series(cumulant.states, obs, oracle.transition_energy);
    return compare_series(oracle.times, ref, cumulant.times, test);
}

}  // namespace dicke
