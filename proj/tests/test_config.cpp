#include <gtest/gtest.h>

#include <sstream>

#include "dicke/config.hpp"
#include "dicke/csv.hpp"

using namespace dicke;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.conf");
}

}  // namespace

TEST(Config, DefaultsBuildValidObjects) {
    const RunConfig c;
    const auto p = c.model();
    EXPECT_NEAR(p.coupling, 10.6e-6, 1e-18);
    const auto pu = c.pulse();
    EXPECT_NEAR(pu.amplitude, std::sqrt(0.14 * 8.08e10), 1e-6);
    EXPECT_NEAR(pu.response_width, 0.120, 1e-15);
    EXPECT_NEAR(c.solver().output_dt, 0.001, 1e-15);
    EXPECT_EQ(c.sweep_grid().size(), 9u);
    EXPECT_EQ(c.fit_grid().size(), 729u);
}

TEST(Config, ParsesKeysCommentsAndDatasets) {
    const auto c = parse(
        "# header\n"
        "model.N = 1.62e10\n"
        "model.gammaz_scales_with_N = false  # fixed dephasing\n"
        "pulse.eta0 = 3000\n"
        "solver.closure = mean-field\n"
        "sweep.axis = r\n"
        "sweep.values = 0.01, 0.1, 1\n"
        "fit.datasets = A1, mine\n"
        "dataset.mine.path = data/mine.csv\n"
        "dataset.mine.N = 2e10\n"
        "dataset.mine.r = 0.3\n"
        "dataset.mine.windows_fs = -300, 300\n");
    EXPECT_EQ(c.n_molecules, 1.62e10);
    EXPECT_FALSE(c.gammaz_scales);
    EXPECT_EQ(c.pulse().amplitude, 3000.0);
    EXPECT_FALSE(c.photon_ratio.has_value());
    EXPECT_EQ(c.closure, Closure::mean_field);
    EXPECT_EQ(c.sweep_grid(), (std::vector<double>{0.01, 0.1, 1}));
    ASSERT_EQ(c.datasets.size(), 2u);
    EXPECT_EQ(c.datasets[1].path, "data/mine.csv");
    EXPECT_EQ(*c.datasets[1].photon_ratio, 0.3);
    EXPECT_EQ(c.datasets[1].window_edges_fs->size(), 2u);
}

TEST(Config, ErrorsCarryLineNumbers) {
    auto message = [](const std::string& text) {
        try {
            parse(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("model.N = 1\nmodel.bogus = 2\n").find("test.conf:2"), std::string::npos);
    EXPECT_NE(message("model.N = abc\n").find("expects a number"), std::string::npos);
    EXPECT_NE(message("\n\njust words\n").find("test.conf:3"), std::string::npos);
    EXPECT_NE(message("dataset.X.path = a.csv\n").find("not listed"), std::string::npos);
    EXPECT_NE(message("solver.closure = exact\n").find("closure"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent.conf"), ConfigError);
}

TEST(Config, ResolvedConfigRoundTrips) {
    const auto c = parse("model.g_neV = 12.5\npulse.r = 0.3\nsweep.values = 1e9, 1e10\nfit.datasets = B1\n"
                         "dataset.B1.path = b1.csv\nrun.seed = 42\n");
    const std::string once = resolved_config(c);
    const std::string twice = resolved_config(parse(once));
    EXPECT_EQ(once, twice);
    EXPECT_NE(once.find("run.seed = 42"), std::string::npos);
    EXPECT_NE(once.find("dataset.B1.path = b1.csv"), std::string::npos);
}

TEST(Csv, OutputIsDeterministic) {
    EnergyTrace tr;
    tr.times = {0.0, 0.001, 0.002};
    tr.energy = {0.0, 1.0 / 3.0, 2.0};
    auto render = [&] {
        std::ostringstream o;
        csv::write_trace(o, tr, "a\nb");
        return o.str();
    };
    const std::string s = render();
    EXPECT_EQ(s, render());
    EXPECT_EQ(s.rfind("# a\n# b\nt_ps,E_meV,Cz,n_photons,n_over_N\n", 0), 0u);
    EXPECT_NE(s.find("0.333333333333,nan"), std::string::npos);
}

TEST(Csv, SpectrumAndSweepHeaders) {
    SpectrumResult s;
    s.detunings = {-1, 1};
    s.absorption = {0.5, 0.5};
    std::ostringstream o;
    csv::write_spectrum(o, s);
    EXPECT_EQ(o.str().rfind("delta_nu_meV,absorption\n", 0), 0u);
    std::vector<SweepPoint> pts(1);
    pts[0].axis_value = 1e10;
    pts[0].ok = false;
    pts[0].error = "undefined half max";
    std::ostringstream w;
    csv::write_sweep(w, pts);
    EXPECT_NE(w.str().find("failed"), std::string::npos);
}
