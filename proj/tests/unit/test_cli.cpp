#include "chfem/studies.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#ifndef CHFEM_CLI_PATH
#define CHFEM_CLI_PATH "chfem"
#endif
#ifndef CHFEM_SOURCE_DIR
#define CHFEM_SOURCE_DIR "."
#endif

using namespace chfem;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("chfem_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(CHFEM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST(Config, ParsesCommentsAndOverrides) {
    std::istringstream in("# comment\ndomain = rect\n  nx=7   # trailing\n\nmodel = taylor\ntaylor_n = 4\n"
                          "init_modes = 1, 0.5\nconv_levels = 10,20\nsweep_eps = 0.3,0.31\n");
    RunConfig cfg;
    read_config(in, cfg);
    EXPECT_EQ(cfg.domain, "rect");
    EXPECT_EQ(cfg.nx, 7);
    EXPECT_EQ(cfg.taylor_n, 4);
    ASSERT_EQ(cfg.init_modes.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.init_modes[1], 0.5);
    EXPECT_EQ(cfg.conv_levels, (std::vector<int>{10, 20}));
    EXPECT_FALSE(cfg.sweep_auto);
    EXPECT_EQ(cfg.sweep_eps.size(), 2u);
    apply_override(cfg, "eps2=0.5");
    EXPECT_DOUBLE_EQ(cfg.eps2, 0.5);
    EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, ErrorsNameTheProblem) {
    RunConfig cfg;
    EXPECT_THROW(apply_setting(cfg, "nope", "1"), ConfigError);
    EXPECT_THROW(apply_setting(cfg, "degree", "two"), ConfigError);
    EXPECT_THROW(apply_setting(cfg, "eps2", "1e-3x"), ConfigError);
    EXPECT_THROW(apply_setting(cfg, "model", "cubic"), ConfigError);
    EXPECT_THROW(apply_override(cfg, "degree"), ConfigError);
    std::istringstream in("degree = 2\nbogus = 1\n");
    try {
        read_config(in, cfg);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Config, CrossFieldValidation) {
    RunConfig cfg;
    cfg.model = "taylor";
    cfg.taylor_n = 1;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = RunConfig{};
    cfg.model = "logarithmic";
    cfg.init_amplitude = 0.6;
    cfg.init_mean = 0.5;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg.init_mean = 0.3;
    EXPECT_NO_THROW(validate(cfg));
    cfg.T = 3.0;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = RunConfig{};
    apply_setting(cfg, "sweep_eps", "");
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = RunConfig{};
    cfg.domain = "mesh";
    EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Config, DumpRoundTrips) {
    RunConfig a;
    a.domain = "rect";
    a.eps2 = 0.0123456789;
    a.init_modes = {1.0, -0.25};
    a.sweep_auto = false;
    a.sweep_eps = {0.3, 0.29};
    std::stringstream ss;
    dump_config(a, ss);
    RunConfig b;
    read_config(ss, b);
    std::stringstream s2;
    dump_config(b, s2);
    std::stringstream s1;
    dump_config(a, s1);
    EXPECT_EQ(s1.str(), s2.str());
    EXPECT_EQ(b.eps2, a.eps2);
}

TEST(Config, ShippedConfigsAreValid) {
    for (const auto& e : fs::directory_iterator(fs::path(CHFEM_SOURCE_DIR) / "configs")) {
        SCOPED_TRACE(e.path().string());
        RunConfig cfg = load_config(e.path().string());
        EXPECT_NO_THROW(validate(cfg));
    }
}

TEST(Studies, CriticalTableMatchesClosedFormAtN2) {
    // f_4'' = -(Tc - T) + T u^2, f_4' = 0 at u^2 = 3 (Tc - T) / T
    const double T = 1.0, Tc = 2.5;
    const auto rows = critical_table(T, Tc, 2, 8);
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_NEAR(rows[0].taylor.sigma_plus, std::sqrt((Tc - T) / T), 1e-12);
    EXPECT_NEAR(rows[0].taylor.beta_plus, std::sqrt(3.0 * (Tc - T) / T), 1e-12);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_LT(rows[k].sigma_error, rows[k - 1].sigma_error);
        EXPECT_LT(rows[k].beta_error, rows[k - 1].beta_error);
        EXPECT_EQ(rows[k].log.beta_plus, rows[0].log.beta_plus);
    }
    EXPECT_THROW(critical_table(T, Tc, 1, 3), ParameterError);
}

TEST(Studies, ExactProfileEnergyMatchesSimpson) {
    for (double eps : {0.02, 0.05, 0.1}) {
        const double T = 1.0, Tc = 2.0;
        const auto prof = tanh_profile(T, Tc, eps);
        const EnergyModel m = taylor_model(2, T, Tc);
        const int n = 200000;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double x = static_cast<double>(i) / n;
            const double d = prof.derivative(x - 0.5);
            const double f = m.f(prof(x - 0.5)) + 0.5 * eps * eps * d * d;
            s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
        }
        s /= 3.0 * n;
        EXPECT_NEAR(exact_profile_energy(T, Tc, eps), s, 1e-10 * s) << eps;
    }
}

TEST(Studies, ConvergencePointOnCoarseMesh) {
    const auto r = convergence_point(2, 120, 0.05);
    EXPECT_EQ(r.n_elem, 60);
    EXPECT_EQ(r.complexity, 120);
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.l2_error, 0.0);
    EXPECT_LT(r.l2_error, 1e-3);
    EXPECT_LT(r.l2_interp_error, 1e-3);
    EXPECT_LT(r.slope_error, 1e-2 * std::sqrt(3.0) / (0.05 * std::sqrt(2.0)));  // 1% of u_plus mu
    EXPECT_LT(r.energy_error, 1e-3);
    // odd element counts are made even so the interface sits on a vertex
    EXPECT_EQ(convergence_point(3, 99, 0.05).n_elem, 34);
}

TEST(Studies, ConvergenceStudyNeedsTwoLevels) {
    EXPECT_THROW(convergence_study({1}, {60}, 0.05, 4), FitError);
    const auto st = convergence_study({2}, {60, 120, 240}, 0.05, 3);
    ASSERT_EQ(st.orders.size(), 1u);
    EXPECT_EQ(st.orders[0].n_points, 3);
    EXPECT_GT(st.orders[0].l2, 2.0);
}

TEST(Studies, CrossInitialData) {
    RunConfig cfg;
    cfg.domain = "rect";
    cfg.nx = cfg.ny = 20;
    const auto d = build_discretization(cfg);
    const auto u = cross_initial_data(*d, 1.0);
    auto at = [&](double x, double y) {
        const auto& xy = d->dofs().dof_coords;
        for (std::size_t i = 0; i < xy.size(); ++i)
            if (std::abs(xy[i].x - x) < 1e-12 && std::abs(xy[i].y - y) < 1e-12) return u[i];
        ADD_FAILURE() << "no node at " << x << "," << y;
        return 0.0;
    };
    EXPECT_GT(at(0.5, 0.5), 0.99);
    EXPECT_GT(at(0.2, 0.5), 0.99);    // horizontal arm
    EXPECT_GT(at(0.5, 0.8), 0.99);    // vertical arm
    EXPECT_LT(at(0.2, 0.2), -0.99);   // between the arms
    EXPECT_LT(at(0.0, 0.0), -0.99);
    for (double v : u) EXPECT_LE(std::abs(v), 1.0);
    // symmetric under x -> 1 - x
    EXPECT_NEAR(at(0.3, 0.45), at(0.7, 0.45), 1e-12);
    RunConfig seg;
    EXPECT_THROW(cross_initial_data(*build_discretization(seg), 1.0), ConfigError);
}

TEST(Studies, InitialDataKinds) {
    RunConfig cfg;
    cfg.n_elem = 10;
    cfg.degree = 2;
    const auto d = build_discretization(cfg);
    const auto r1 = build_initial_data(cfg, *d), r2 = build_initial_data(cfg, *d);
    EXPECT_EQ(r1, r2);
    cfg.seed = 2;
    EXPECT_NE(build_initial_data(cfg, *d), r1);
    cfg.init = "mode";
    cfg.init_amplitude = 0.3;
    const auto m = build_initial_data(cfg, *d);
    double mx = 0.0;
    for (double v : m) mx = std::max(mx, std::abs(v));
    EXPECT_NEAR(mx, 0.3, 1e-12);
    cfg.init = "constant";
    cfg.init_mean = 0.25;
    for (double v : build_initial_data(cfg, *d)) EXPECT_EQ(v, 0.25);
    cfg.init = "tanh";
    cfg.eps2 = 1e-3;
    const auto t = build_initial_data(cfg, *d);
    EXPECT_LT(t.front(), -0.99);
    EXPECT_GT(t[d->n_dofs() > 10 ? 10 : 1], 0.99);  // vertex x = 1
    cfg.init = "file";
    const auto dir = scratch_dir("init");
    cfg.init_file = (dir / "u.txt").string();
    {
        std::ofstream out(cfg.init_file);
        for (std::size_t i = 0; i < d->n_dofs(); ++i) out << 0.01 * i << '\n';
    }
    const auto f = build_initial_data(cfg, *d);
    EXPECT_DOUBLE_EQ(f[3], 0.03);
    {
        std::ofstream out(cfg.init_file);
        out << "0.1\n0.2\n";
    }
    EXPECT_THROW(build_initial_data(cfg, *d), ConfigError);
    cfg.init = "constant";
    cfg.model = "logarithmic";
    cfg.init_mean = 1.0;
    EXPECT_THROW(build_initial_data(cfg, *d), ConfigError);
}

TEST(Studies, VtkSamplesTheField) {
    RunConfig cfg;
    cfg.domain = "rect";
    cfg.lx = 2.0;
    cfg.nx = 3;
    cfg.ny = 2;
    cfg.degree = 2;
    const auto d = build_discretization(cfg);
    const auto u = d->interpolate([](double x, double y) { return x * x + y; });
    std::stringstream ss;
    write_vtk(ss, *d, u, u);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "# vtk DataFile Version 3.0");
    std::getline(ss, line);
    std::getline(ss, line);
    EXPECT_EQ(line, "ASCII");
    std::getline(ss, line);
    EXPECT_EQ(line, "DATASET STRUCTURED_GRID");
    std::getline(ss, line);
    EXPECT_EQ(line, "DIMENSIONS 7 5 1");
    std::getline(ss, line);
    EXPECT_EQ(line, "POINTS 35 double");
    std::vector<std::array<double, 2>> pts(35);
    for (auto& p : pts) {
        double z;
        ss >> p[0] >> p[1] >> z;
    }
    ss >> std::ws;
    std::getline(ss, line);
    EXPECT_EQ(line, "POINT_DATA 35");
    std::getline(ss, line);
    std::getline(ss, line);
    for (const auto& p : pts) {
        double v;
        ss >> v;
        EXPECT_NEAR(v, p[0] * p[0] + p[1], 1e-12);
    }
    EXPECT_NEAR(pts[6][0], 2.0, 1e-12);
    EXPECT_NEAR(pts[34][1], 1.0, 1e-12);
    RunConfig seg;
    const auto ds = build_discretization(seg);
    std::stringstream s2;
    EXPECT_THROW(write_vtk(s2, *ds, std::vector<double>(ds->n_dofs())), ParameterError);
}

TEST(Studies, RunWritesDiagnosticsAndIsDeterministic) {
    RunConfig cfg;
    cfg.n_elem = 16;
    cfg.degree = 2;
    cfg.eps2 = 1e-3;
    cfg.tau = 1e-3;
    cfg.t_end = 0.02;
    cfg.snapshot_every = 5;
    const auto a = scratch_dir("run_a"), b = scratch_dir("run_b");
    const auto ra = run_evolution(cfg, a);
    run_evolution(cfg, b);
    EXPECT_EQ(ra.trajectory.steps, 20);
    EXPECT_EQ(ra.snapshots.size(), 6u);  // steps 0, 5, 10, 15, 20 and final
    EXPECT_TRUE(fs::exists(a / "final.csv"));
    const std::string da = slurp(a / "diagnostics.csv");
    EXPECT_EQ(da, slurp(b / "diagnostics.csv"));
    EXPECT_EQ(slurp(a / "final.csv"), slurp(b / "final.csv"));
    EXPECT_EQ(da.substr(0, da.find('\n')), "step,t,energy,mass,min_u,max_u,newton_iters,krylov_iters");
    EXPECT_EQ(std::count(da.begin(), da.end(), '\n'), 22);

    cfg.t_end = 0.0;
    const auto c = scratch_dir("run_c");
    const auto rc = run_evolution(cfg, c);
    EXPECT_EQ(rc.trajectory.steps, 0);
    ASSERT_EQ(rc.snapshots.size(), 1u);
    EXPECT_FALSE(fs::exists(c / "final.csv"));
}

TEST(Studies, SweepOnSegment) {
    RunConfig cfg;
    cfg.n_elem = 12;
    cfg.degree = 3;
    cfg.tau = 0.01;
    cfg.sweep_points = 4;
    cfg.sweep_d_min = 0.2;
    cfg.sweep_d_max = 2.0;
    const auto s = bifurcation_sweep(cfg);
    EXPECT_NEAR(s.pair.rho, std::numbers::pi * std::numbers::pi, 1e-6);
    ASSERT_EQ(s.points.size(), 4u);
    for (const auto& p : s.points) EXPECT_TRUE(p.converged);
    // amplitude grows with the distance to the threshold
    for (std::size_t k = 1; k < s.points.size(); ++k) EXPECT_GT(s.points[k].max_abs_u, s.points[k - 1].max_abs_u);
    EXPECT_GT(s.fit.get("alpha"), 1.2);
    EXPECT_LT(s.fit.get("alpha"), 1.8);
    cfg.sweep_auto = false;
    cfg.sweep_eps = {0.5, 0.6};  // both below the threshold
    EXPECT_THROW(bifurcation_sweep(cfg), ConfigError);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch_dir("exit");
    const std::string out = " --out " + dir.string();
    EXPECT_EQ(cli("config-dump"), 0);
    EXPECT_EQ(cli("run --set t_end=0" + out), 0);
    EXPECT_TRUE(fs::exists(dir / "snapshot_000000.csv"));
    EXPECT_EQ(cli("run --set bogus=1" + out), 2);
    EXPECT_EQ(cli("run --config /nonexistent.cfg" + out), 2);
    EXPECT_EQ(cli("frobnicate"), 2);
    EXPECT_EQ(cli("sweep --set sweep_eps=" + out), 2);
    EXPECT_EQ(cli("convergence --set conv_degrees=1 --set conv_levels=40" + out), 4);
    // a step that cannot converge: Newton capped at one iteration, no retries
    EXPECT_EQ(cli("run --set eps2=1e-4 --set tau=1 --set t_end=1 --set newton_max=1 --set max_retries=0" + out), 3);
    EXPECT_EQ(cli("critical" + out), 0);
    EXPECT_TRUE(fs::exists(dir / "critical.csv"));
    EXPECT_EQ(cli("eigen --count 2 --set degree=3 --set n_elem=8" + out), 0);
    EXPECT_TRUE(fs::exists(dir / "eigenvalues.csv"));
    EXPECT_TRUE(fs::exists(dir / "mode_02.csv"));
}

TEST(Cli, SeedFlagOverridesConfig) {
    const auto a = scratch_dir("seed_a"), b = scratch_dir("seed_b"), c = scratch_dir("seed_c");
    const std::string base = "run --set t_end=0 --set n_elem=8 ";
    ASSERT_EQ(cli(base + "--seed 5 --out " + a.string()), 0);
    ASSERT_EQ(cli(base + "--set seed=5 --out " + b.string()), 0);
    ASSERT_EQ(cli(base + "--seed 6 --out " + c.string()), 0);
    EXPECT_EQ(slurp(a / "snapshot_000000.csv"), slurp(b / "snapshot_000000.csv"));
    EXPECT_NE(slurp(a / "snapshot_000000.csv"), slurp(c / "snapshot_000000.csv"));
}
