#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "dicke/ode.hpp"

using namespace dicke;
using State = std::vector<double>;

TEST(Ode, ExponentialDecayMatchesClosedForm) {
    const auto grid = ode::uniform_grid(0.0, 5.0, 0.1);
    ode::Options opt;
    double worst = 0.0;
    ode::integrate(
        [](double, const State& y, State& dy) { dy[0] = -1.3 * y[0]; }, State{2.0}, 0.0, 5.0,
        std::span<const double>(grid), opt,
        [&](double t, const State& y) { worst = std::max(worst, std::abs(y[0] - 2.0 * std::exp(-1.3 * t))); });
    EXPECT_LT(worst, 1e-7);
}

TEST(Ode, HarmonicOscillatorDenseOutput) {
    // Dense output between steps must keep the accuracy of the steps themselves.
    const auto grid = ode::uniform_grid(0.0, 20.0, 0.013);
    ode::Options opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-12;
    double worst = 0.0;
    std::size_t seen = 0;
    ode::integrate(
        [](double, const State& y, State& dy) {
            dy[0] = y[1];
            dy[1] = -y[0];
        },
        State{1.0, 0.0}, 0.0, 20.0, std::span<const double>(grid), opt,
        [&](double t, const State& y) {
            ++seen;
            worst = std::max(worst, std::abs(y[0] - std::cos(t)) + std::abs(y[1] + std::sin(t)));
        });
    EXPECT_EQ(seen, grid.size());
    EXPECT_LT(worst, 1e-8);
}

TEST(Ode, SegmentsCapStepSize) {
    const std::array<ode::Segment, 2> seg{{{1.0, 0.01}, {2.0, 1.0}}};
    ode::Options opt;
    ode::Stats st;
    const std::vector<double> out{2.0};
    ode::integrate([](double, const State&, State& dy) { dy[0] = 1.0; }, State{0.0}, 0.0,
                   std::span<const ode::Segment>(seg), std::span<const double>(out), opt,
                   [](double, const State&) {}, &st);
    EXPECT_GE(st.accepted, 100u);
}

TEST(Ode, NonFiniteDerivativeThrowsWithLastGoodTime) {
    const auto grid = ode::uniform_grid(0.0, 2.0, 0.5);
    ode::Options opt;
    try {
        ode::integrate([](double, const State& y, State& dy) { dy[0] = y[0] * y[0]; }, State{1.0}, 0.0, 2.0,
                       std::span<const double>(grid), opt, [](double, const State&) {});
        FAIL() << "expected IntegrationError";
    } catch (const IntegrationError& e) {
        EXPECT_GT(e.last_good_time(), 0.9);
        EXPECT_LT(e.last_good_time(), 1.0 + 1e-9);
    }
}

TEST(Ode, StepBudgetExhaustionThrows) {
    const auto grid = ode::uniform_grid(0.0, 1.0, 0.5);
    ode::Options opt;
    opt.max_steps = 10;
    opt.max_step = 1e-3;
    EXPECT_THROW(ode::integrate([](double, const State&, State& dy) { dy[0] = 1.0; }, State{0.0}, 0.0, 1.0,
                                std::span<const double>(grid), opt, [](double, const State&) {}),
                 IntegrationError);
}

TEST(Ode, UniformGridIncludesEnd) {
    const auto g = ode::uniform_grid(-0.2, 4.0, 0.001);
    EXPECT_EQ(g.size(), 4201u);
    EXPECT_NEAR(g.back(), 4.0, 1e-12);
    EXPECT_THROW(ode::uniform_grid(1.0, 0.0, 0.1), DomainError);
}

TEST(Ode, Deterministic) {
    auto run = [] {
        std::vector<double> vals;
        const auto grid = ode::uniform_grid(0.0, 3.0, 0.01);
        ode::integrate([](double t, const State& y, State& dy) { dy[0] = std::sin(t * y[0]) - 0.1 * y[0]; },
                       State{1.0}, 0.0, 3.0, std::span<const double>(grid), ode::Options{},
                       [&](double, const State& y) { vals.push_back(y[0]); });
        return vals;
    };
    EXPECT_EQ(run(), run());
}
