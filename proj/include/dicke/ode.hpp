#pragma once

// Adaptive Dormand–Prince 5(4) integrator with 4th-order dense output
// (Hairer, Nørsett & Wanner coefficients). Works on any contiguous real state
// with size()/operator[] (std::array<double, N>, std::vector<double>).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"

namespace dicke::ode {

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 20'000'000;
};

/// Integration interval ending at `end` inside which steps never exceed `max_step`.
struct Segment {
    double end;
    double max_step;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
};

namespace detail {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

template <class State>
double scaled_norm(const State& v, const State& y0, const State& y1, const Options& opt) {
    double acc = 0.0;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double sk = opt.abs_tol + opt.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = v[i] / sk;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

template <class State>
bool all_finite(const State& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

}  // namespace detail

/// Integrate y' = rhs(t, y) from t_start across consecutive segments, calling
/// observe(t, y) at every requested output time (ascending, within the
/// integrated span). Returns the final state.
///
/// rhs must have the signature void(double t, const State& y, State& dydt).
/// Throws IntegrationError when the step size underflows, the step budget is
/// exhausted, or the state cannot be kept finite.
template <class State, class Rhs, class Observer>
State integrate(Rhs&& rhs, State y, double t_start, std::span<const Segment> segments,
                std::span<const double> output_times, const Options& opt, Observer&& observe,
                Stats* stats = nullptr) {
    using namespace detail;
    Stats local;
    Stats& st = stats ? *stats : local;

    const std::size_t n = y.size();
    State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y, err = y;
    State r2 = y, r3 = y, r4 = y, r5 = y, yout = y;

    double t = t_start;
    std::size_t next_out = 0;
    constexpr double time_eps = 1e-12;
    while (next_out < output_times.size() && output_times[next_out] <= t + time_eps * std::max(1.0, std::abs(t))) {
        observe(output_times[next_out], y);
        ++next_out;
    }
    if (!all_finite(y)) throw IntegrationError("non-finite initial state", t);

    rhs(t, y, k1);
    ++st.rhs_evaluations;
    if (!all_finite(k1)) throw IntegrationError("non-finite derivative at initial state", t);

    // Initial step guess from the local scale of y and y'.
    double h;
    {
        double d0 = 0.0, d1n = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
            d0 += (y[i] / sk) * (y[i] / sk);
            d1n += (k1[i] / sk) * (k1[i] / sk);
        }
        d0 = std::sqrt(d0 / n);
        d1n = std::sqrt(d1n / n);
        h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * k1[i];
        rhs(t + h, ytmp, k2);
        ++st.rhs_evaluations;
        double d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
            d2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
        }
        d2 = std::sqrt(d2 / n) / h;
        const double dm = std::max(d1n, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / dm, 0.2);
        if (!std::isfinite(h1)) h = 1e-6;
        else h = std::min(100.0 * h, h1);
    }

    for (const Segment& seg : segments) {
        const double seg_max = std::min(opt.max_step, seg.max_step);
        bool last_rejected = false;
        while (t < seg.end - time_eps * std::max(1.0, std::abs(seg.end))) {
            h = std::min({h, seg_max, seg.end - t});
            const double h_min = 1e-13 * std::max(1.0, std::abs(t));
            if (h < h_min) throw IntegrationError("step size underflow", t);
            if (st.accepted + st.rejected >= opt.max_steps) throw IntegrationError("step budget exhausted", t);

            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
            rhs(t + c2 * h, ytmp, k2);
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            rhs(t + c3 * h, ytmp, k3);
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(t + c4 * h, ytmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(t + c5 * h, ytmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            const double t_new = t + h;
            rhs(t_new, ytmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            rhs(t_new, ynew, k7);
            st.rhs_evaluations += 6;

            for (std::size_t i = 0; i < n; ++i)
                err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double e = scaled_norm(err, y, ynew, opt);

            if (!std::isfinite(e) || !all_finite(ynew) || !all_finite(k7)) {
                ++st.rejected;
                h *= 0.2;
                last_rejected = true;
                continue;
            }
            if (e > 1.0) {
                ++st.rejected;
                h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
                last_rejected = true;
                continue;
            }

            // Accepted: serve dense output for the covered output times.
            if (next_out < output_times.size() && output_times[next_out] <= t_new + time_eps * std::max(1.0, std::abs(t_new))) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double ydiff = ynew[i] - y[i];
                    const double bspl = h * k1[i] - ydiff;
                    r2[i] = ydiff;
                    r3[i] = bspl;
                    r4[i] = ydiff - h * k7[i] - bspl;
                    r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                }
                while (next_out < output_times.size() &&
                       output_times[next_out] <= t_new + time_eps * std::max(1.0, std::abs(t_new))) {
                    const double theta = std::clamp((output_times[next_out] - t) / h, 0.0, 1.0);
                    const double theta1 = 1.0 - theta;
                    for (std::size_t i = 0; i < n; ++i)
                        yout[i] = y[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
                    observe(output_times[next_out], yout);
                    ++next_out;
                }
            }

            y = ynew;
            k1 = k7;
            t = t_new;
            ++st.accepted;

            double fac = 0.9 * std::pow(std::max(e, 1e-10), -0.2);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
            h *= fac;
            last_rejected = false;
        }
        t = std::max(t, seg.end);
    }
    return y;
}

/// Convenience overload: one segment, one step cap taken from `opt`.
template <class State, class Rhs, class Observer>
State integrate(Rhs&& rhs, State y, double t_start, double t_end, std::span<const double> output_times,
                const Options& opt, Observer&& observe, Stats* stats = nullptr) {
    const Segment seg{t_end, opt.max_step};
    return integrate(std::forward<Rhs>(rhs), std::move(y), t_start, std::span<const Segment>(&seg, 1),
                     output_times, opt, std::forward<Observer>(observe), stats);
}

/// Uniform output grid t_start, t_start + dt, ... up to and including t_end
/// (the last point is kept when it lands within 1e-9·dt of t_end).
inline std::vector<double> uniform_grid(double t_start, double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > t_start)) throw DomainError("uniform grid needs dt > 0 and t_end > t_start");
    const auto count = static_cast<std::size_t>(std::floor((t_end - t_start) / dt + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k) grid[k] = t_start + static_cast<double>(k) * dt;
    return grid;
}

}  // namespace dicke::ode
