// Command-line front end: run | eigen | critical | convergence | sweep | config-dump.
// Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 fit failure.

#include "chfem/studies.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace chfem;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    return out;
}

int cmd_run(const RunConfig& cfg, const fs::path& out) {
    const auto res = run_evolution(cfg, out);
    const auto& tr = res.trajectory;
    std::cout << "steps " << tr.steps << ", t = " << tr.final.t << ", energy " << tr.records.back().energy
              << ", max mass drift " << tr.max_mass_drift << (tr.stationary ? ", stationary" : "") << '\n';
    if (tr.energy_increases > 0) std::cout << "warning: energy increased in " << tr.energy_increases << " steps\n";
    std::cout << "wrote " << (out / "diagnostics.csv").string() << " and " << res.snapshots.size() << " snapshot(s)\n";
    return 0;
}

int cmd_eigen(const RunConfig& cfg, const fs::path& out, int count) {
    validate(cfg);
    const auto disc = build_discretization(cfg);
    const auto pairs = compute_eigenpairs(*disc, count);
    fs::create_directories(out);
    auto csv = open_out(out / "eigenvalues.csv");
    csv << "k,rho,residual\n";
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double r = eigen_residual(disc->stiffness(), disc->mass(), pairs[k]);
        csv << k + 1 << ',' << pairs[k].rho << ',' << r << '\n';
        std::cout << "rho_" << k + 1 << " = " << std::setprecision(12) << pairs[k].rho << '\n';
        char name[32];
        std::snprintf(name, sizeof name, "mode_%02zu", k + 1);
        write_snapshot(out / name, *disc, pairs[k].v);
    }
    return 0;
}

int cmd_critical(const RunConfig& cfg, const fs::path& out) {
    validate(cfg);
    const auto rows = critical_table(cfg.T, cfg.Tc, cfg.critical_n_min, cfg.critical_n_max);
    fs::create_directories(out);
    auto csv = open_out(out / "critical.csv");
    csv << "n,sigma_plus_2n,beta_plus_2n,sigma_plus_log,beta_plus_log,sigma_error,beta_error\n";
    for (const auto& r : rows)
        csv << r.n << ',' << r.taylor.sigma_plus << ',' << r.taylor.beta_plus << ',' << r.log.sigma_plus << ','
            << r.log.beta_plus << ',' << r.sigma_error << ',' << r.beta_error << '\n';
    std::cout << "wrote " << (out / "critical.csv").string() << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_convergence(const RunConfig& cfg, const fs::path& out) {
    validate(cfg);
    const auto st = convergence_study(cfg.conv_degrees, cfg.conv_levels, cfg.conv_eps, cfg.conv_fit_levels);
    fs::create_directories(out);
    auto csv = open_out(out / "convergence.csv");
    csv << "degree,n_elem,complexity,converged,slope_error,energy_error,l2_error,l2_interp_error\n";
    for (const auto& r : st.rows)
        csv << r.degree << ',' << r.n_elem << ',' << r.complexity << ',' << r.converged << ',' << r.slope_error << ','
            << r.energy_error << ',' << r.l2_error << ',' << r.l2_interp_error << '\n';
    auto ord = open_out(out / "convergence_orders.csv");
    ord << "degree,n_points,l2_interp_order,l2_order,slope_order,energy_order\n";
    std::cout << "degree  order(L2 vs interpolant)  order(L2 vs exact)\n";
    for (const auto& o : st.orders) {
        ord << o.degree << ',' << o.n_points << ',' << o.l2_interp << ',' << o.l2 << ',' << o.slope << ','
            << o.energy << '\n';
        std::cout << std::setw(6) << o.degree << std::setw(26) << std::setprecision(4) << o.l2_interp
                  << std::setw(20) << o.l2 << '\n';
    }
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& out) {
    const auto res = bifurcation_sweep(cfg);
    fs::create_directories(out);
    auto csv = open_out(out / "sweep.csv");
    csv << "eps,inv_eps2,distance,converged,steps,max_abs_u,C,misfit\n";
    for (std::size_t k = 0; k < res.points.size(); ++k) {
        const auto& p = res.points[k];
        csv << p.eps << ',' << 1.0 / (p.eps * p.eps) << ',' << 1.0 / (p.eps * p.eps) - res.pair.rho << ','
            << p.converged << ',' << p.steps << ',' << p.max_abs_u << ','
            << res.fit.get("C_" + std::to_string(k)) << ',' << res.fit.get("misfit_" + std::to_string(k)) << '\n';
        if (!p.converged) std::cout << "warning: eps = " << p.eps << " did not reach a stationary state\n";
    }
    auto fit = open_out(out / "fit_summary.csv");
    fit << "name,value\nrho_1," << res.pair.rho << '\n';
    for (const char* k : {"alpha", "C_tilde", "alpha_r2", "c_exponent", "c_prefactor"})
        fit << k << ',' << res.fit.get(k) << '\n';
    std::cout << std::setprecision(6) << "rho_1 = " << res.pair.rho << "\nalpha = " << res.fit.get("alpha")
              << ", C_tilde = " << res.fit.get("C_tilde") << "\nC(eps) ~ " << res.fit.get("c_prefactor")
              << " eps^" << res.fit.get("c_exponent") << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-version finite element solver for the Cahn-Hilliard equation"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir = "out";
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    int count = 0;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--set", overrides, "override key=value (repeatable)");

    auto* run = app.add_subcommand("run", "time evolution with diagnostics and snapshots");
    auto* eigen = app.add_subcommand("eigen", "smallest Neumann Laplace eigenpairs");
    eigen->add_option("--count", count, "number of eigenpairs (default: eigen_count)");
    auto* critical = app.add_subcommand("critical", "spinodal and binodal points of f_2n and the logarithmic model");
    auto* conv = app.add_subcommand("convergence", "1D stationary profile convergence study");
    auto* sweep = app.add_subcommand("sweep", "bifurcation sweep in eps and amplitude fits");
    auto* dump = app.add_subcommand("config-dump", "print every key with its value and meaning");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        for (const auto& o : overrides) apply_override(cfg, o);
        if (*seed_opt) cfg.seed = seed;
        const fs::path out(out_dir);
        if (*dump) {
            validate(cfg);
            dump_config(cfg, std::cout);
            return 0;
        }
        if (*run) return cmd_run(cfg, out);
        if (*eigen) return cmd_eigen(cfg, out, count > 0 ? count : cfg.eigen_count);
        if (*critical) return cmd_critical(cfg, out);
        if (*conv) return cmd_convergence(cfg, out);
        if (*sweep) return cmd_sweep(cfg, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const GeometryError& e) {
        std::cerr << "mesh error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << '\n';
        return 4;
    } catch (const ShapeError& e) {
        std::cerr << "fit error: " << e.what() << '\n';
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
