#include "chfem/studies.hpp"

#include "chfem/error.hpp"
#include "chfem/linalg.hpp"
#include "chfem/ref_element.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

namespace chfem {

Mesh build_mesh(const RunConfig& cfg) {
    if (cfg.domain == "segment") return make_segment_mesh(0.0, cfg.lx, cfg.n_elem);
    if (cfg.domain == "rect") return make_rect_mesh(cfg.lx, cfg.ly, cfg.nx, cfg.ny);
    std::ifstream in(cfg.mesh_file);
    if (!in) throw ConfigError("cannot open mesh file '" + cfg.mesh_file + "'");
    Mesh m;
    try {
        m = import_quad_mesh(in);
    } catch (const ParseError& e) {
        throw ConfigError(cfg.mesh_file + ": " + e.what());
    }
    return cfg.refine > 1 ? refine(m, cfg.refine) : m;
}

std::unique_ptr<Discretization> build_discretization(const RunConfig& cfg) {
    return std::make_unique<Discretization>(build_mesh(cfg),
                                            DiscretizationOptions{cfg.degree, cfg.quad_order, cfg.lumped});
}

EnergyModel build_model(const RunConfig& cfg) {
    if (cfg.model == "logarithmic") return logarithmic_model(cfg.T, cfg.Tc);
    if (cfg.model == "taylor") return taylor_model(cfg.taylor_n, cfg.T, cfg.Tc);
    return scaled_quartic_model();
}

SolverConfig build_solver_config(const RunConfig& cfg) {
    SolverConfig s;
    s.tau = cfg.tau;
    s.eps2 = cfg.eps2;
    s.newton_tol = cfg.newton_tol;
    s.newton_max = cfg.newton_max;
    s.krylov_tol = cfg.krylov_tol;
    s.steady_tol = cfg.steady_tol;
    s.max_retries = cfg.max_retries;
    s.mass_lumping = cfg.lumped;
    s.krylov = cfg.krylov == "bicg" ? KrylovMethod::bicg : KrylovMethod::bicgstab;
    s.precond = cfg.precond == "mass" ? PrecondKind::mass : cfg.precond == "none" ? PrecondKind::none : PrecondKind::lu;
    return s;
}

namespace {

double max_element_diameter(const Mesh& m) {
    double h = 0.0;
    for (std::size_t e = 0; e < m.n_elements(); ++e) {
        const auto& el = m.elements[e];
        const Point a = m.vertices[el[0]];
        const Point b = m.vertices[el[m.dim == 1 ? 1 : 2]];
        h = std::max(h, std::hypot(b.x - a.x, b.y - a.y));
        if (m.dim == 2) {
            const Point c = m.vertices[el[1]], d = m.vertices[el[3]];
            h = std::max(h, std::hypot(c.x - d.x, c.y - d.y));
        }
    }
    return h;
}

// signed distance to the axis-aligned box |x - cx| <= hx, |y - cy| <= hy
double box_distance(double x, double y, double cx, double cy, double hx, double hy) {
    const double qx = std::abs(x - cx) - hx, qy = std::abs(y - cy) - hy;
    const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
    return outside + std::min(std::max(qx, qy), 0.0);
}

} // namespace

std::vector<double> cross_initial_data(const Discretization& disc, double beta) {
    if (disc.dim() != 2) throw ConfigError("the cross initial condition needs a 2D domain");
    const auto b = disc.mesh().bounds();
    const double lx = b[1] - b[0], ly = b[3] - b[2];
    const double cx = 0.5 * (b[0] + b[1]), cy = 0.5 * (b[2] + b[3]);
    const double h = max_element_diameter(disc.mesh());
    return disc.interpolate([&](double x, double y) {
        const double d = std::min(box_distance(x, y, cx, cy, 0.4 * lx, 0.1 * ly),
                                  box_distance(x, y, cx, cy, 0.1 * lx, 0.4 * ly));
        return -beta * std::tanh(2.0 * d / h);
    });
}

std::vector<double> build_initial_data(const RunConfig& cfg, const Discretization& disc) {
    const std::size_t n = disc.n_dofs();
    std::vector<double> u;
    if (cfg.init == "random") {
        u = random_initial_data(n, cfg.init_amplitude, cfg.seed);
        for (auto& x : u) x += cfg.init_mean;
    } else if (cfg.init == "mode") {
        const auto pairs = compute_eigenpairs(disc, static_cast<int>(cfg.init_modes.size()));
        u = mode_initial_data(pairs, cfg.init_modes, cfg.init_amplitude);
        for (auto& x : u) x += cfg.init_mean;
    } else if (cfg.init == "cross") {
        u = cross_initial_data(disc, critical_points(build_model(cfg)).beta_plus);
    } else if (cfg.init == "constant") {
        u.assign(n, cfg.init_mean);
    } else if (cfg.init == "tanh") {
        if (disc.dim() != 1) throw ConfigError("the tanh initial condition needs a segment");
        const double eps = std::sqrt(cfg.eps2), c = 0.5 * cfg.lx;
        if (cfg.model == "quartic") {
            u = disc.interpolate([&](double x, double) { return std::tanh((x - c) / (eps * std::sqrt(2.0))); });
        } else {
            const auto prof = tanh_profile(cfg.T, cfg.Tc, eps);
            const double cap = 0.99 * critical_points(build_model(cfg)).beta_plus;
            u = disc.interpolate([&](double x, double) { return std::clamp(prof(x - c), -cap, cap); });
        }
    } else {
        std::ifstream in(cfg.init_file);
        if (!in) throw ConfigError("cannot open init_file '" + cfg.init_file + "'");
        double x;
        while (in >> x) u.push_back(x);
        if (!in.eof()) throw ConfigError(cfg.init_file + ": non-numeric entry");
        if (u.size() != n)
            throw ConfigError(cfg.init_file + ": " + std::to_string(u.size()) + " values for " + std::to_string(n) +
                              " degrees of freedom");
    }
    const EnergyModel model = build_model(cfg);
    for (double x : u)
        if (!model.admissible(x))
            throw ConfigError("initial value " + std::to_string(x) + " is outside the admissible interval of " +
                              model.name());
    return u;
}

// ---- output ---------------------------------------------------------------

void write_diagnostics_header(std::ostream& out) {
    out << "step,t,energy,mass,min_u,max_u,newton_iters,krylov_iters\n";
}

void write_diagnostics_row(std::ostream& out, const StepRecord& r) {
    out << r.step << ',' << std::setprecision(17) << r.t << ',' << r.energy << ',' << r.mass << ',' << r.min_u << ','
        << r.max_u << ',' << r.newton_iters << ',' << r.krylov_iters << '\n';
}

void write_vtk(std::ostream& out, const Discretization& disc, std::span<const double> u, std::span<const double> w) {
    const Mesh& m = disc.mesh();
    if (m.dim != 2 || m.nx == 0) throw ParameterError("write_vtk: needs a structured rectangle mesh");
    const int p = disc.degree();
    const int px = m.nx * p + 1, py = m.ny * p + 1;
    struct Sample {
        std::size_t e;
        double xi, eta;
    };
    std::vector<Sample> at;
    at.reserve(static_cast<std::size_t>(px) * py);
    for (int j = 0; j < py; ++j)
        for (int i = 0; i < px; ++i) {
            const int ex = std::min(i / p, m.nx - 1), ey = std::min(j / p, m.ny - 1);
            at.push_back({static_cast<std::size_t>(ey * m.nx + ex), -1.0 + 2.0 * (i - ex * p) / p,
                          -1.0 + 2.0 * (j - ey * p) / p});
        }
    out << "# vtk DataFile Version 3.0\nchfem field\nASCII\nDATASET STRUCTURED_GRID\n";
    out << "DIMENSIONS " << px << ' ' << py << " 1\nPOINTS " << at.size() << " double\n";
    out << std::setprecision(17);
    for (const auto& s : at) {
        const Point q = m.map(s.e, s.xi, s.eta);
        out << q.x << ' ' << q.y << " 0\n";
    }
    out << "POINT_DATA " << at.size() << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    out << std::setprecision(17);
    for (const auto& s : at) out << disc.evaluate(u, s.e, s.xi, s.eta) << '\n';
    if (!w.empty()) {
        out << "SCALARS w double 1\nLOOKUP_TABLE default\n";
        for (const auto& s : at) out << disc.evaluate(w, s.e, s.xi, s.eta) << '\n';
    }
}

void write_point_csv(std::ostream& out, const Discretization& disc, std::span<const double> u,
                     std::span<const double> w) {
    const auto& xy = disc.dofs().dof_coords;
    out << (w.empty() ? "x,y,u\n" : "x,y,u,w\n") << std::setprecision(17);
    for (std::size_t i = 0; i < xy.size(); ++i) {
        out << xy[i].x << ',' << xy[i].y << ',' << u[i];
        if (!w.empty()) out << ',' << w[i];
        out << '\n';
    }
}

std::filesystem::path write_snapshot(const std::filesystem::path& stem, const Discretization& disc,
                                     std::span<const double> u, std::span<const double> w) {
    const bool vtk = disc.dim() == 2 && disc.mesh().nx > 0;
    std::filesystem::path path = stem;
    path += vtk ? ".vtk" : ".csv";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    if (vtk)
        write_vtk(out, disc, u, w);
    else
        write_point_csv(out, disc, u, w);
    return path;
}

// ---- studies ----------------------------------------------------------------

RunOutcome run_evolution(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    validate(cfg);
    const auto disc = build_discretization(cfg);
    const EnergyModel model = build_model(cfg);
    const SolverConfig sc = build_solver_config(cfg);
    State s;
    s.u = build_initial_data(cfg, *disc);

    RunOutcome res;
    std::ofstream diag;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        diag.open(out_dir / "diagnostics.csv");
        if (!diag) throw ConfigError("cannot write to '" + out_dir.string() + "'");
        write_diagnostics_header(diag);
    }
    Schedule sched;
    sched.t_end = cfg.t_end;
    sched.max_steps = cfg.max_steps;
    sched.stop_when_steady = cfg.stop_when_steady;
    sched.on_step = [&](const State& st, const StepRecord& r) {
        if (out_dir.empty()) return;
        write_diagnostics_row(diag, r);
        if (r.step == 0 || (cfg.snapshot_every > 0 && r.step % cfg.snapshot_every == 0)) {
            char name[32];
            std::snprintf(name, sizeof name, "snapshot_%06lld", static_cast<long long>(r.step));
            res.snapshots.push_back(write_snapshot(out_dir / name, *disc, st.u, st.w));
        }
    };
    res.trajectory = evolve(s, sc, model, *disc, sched);
    if (!out_dir.empty() && res.trajectory.steps > 0)
        res.snapshots.push_back(write_snapshot(out_dir / "final", *disc, res.trajectory.final.u, res.trajectory.final.w));
    return res;
}

std::vector<EigenPair> compute_eigenpairs(const Discretization& disc, int count) {
    if (disc.dim() == 2) {
        const SparseMatrix ax = assemble_directional_stiffness(disc.mesh(), disc.dofs(), disc.basis(), 0);
        return smallest_eigenpairs(disc.stiffness(), disc.mass(), count, &ax);
    }
    return smallest_eigenpairs(disc.stiffness(), disc.mass(), count);
}

std::vector<CriticalRow> critical_table(double T, double Tc, int n_min, int n_max) {
    if (n_min < 2 || n_max < n_min) throw ParameterError("critical_table: need 2 <= n_min <= n_max");
    const CriticalPoints lg = critical_points(logarithmic_model(T, Tc));
    std::vector<CriticalRow> rows;
    for (int n = n_min; n <= n_max; ++n) {
        CriticalRow r;
        r.n = n;
        r.taylor = critical_points(taylor_model(n, T, Tc));
        r.log = lg;
        r.sigma_error = std::abs(r.taylor.sigma_plus - lg.sigma_plus);
        r.beta_error = std::abs(r.taylor.beta_plus - lg.beta_plus);
        rows.push_back(r);
    }
    return rows;
}

ProfileRun stationary_profile(int degree, int n_elem, double eps, double T, double Tc) {
    return stationary_profile(degree, n_elem, eps, taylor_model(2, T, Tc), T, Tc);
}

ProfileRun stationary_profile(int degree, int n_elem, double eps, const EnergyModel& model, double T, double Tc) {
    ProfileRun run;
    run.disc = std::make_unique<Discretization>(make_segment_mesh(0.0, 1.0, n_elem), DiscretizationOptions{degree, 0, false});
    const auto prof = tanh_profile(T, Tc, eps);
    SolverConfig cfg;
    cfg.tau = 1e-3;
    cfg.eps2 = eps * eps;
    cfg.tau_growth = 2.0;
    cfg.tau_max = 1e6;
    cfg.steady_tol = 1e-13;
    State s;
    const double cap = 0.99 * critical_points(model).beta_plus;
    s.u = run.disc->interpolate([&](double x, double) { return std::clamp(prof(x - 0.5), -cap, cap); });
    run.result = find_stationary(s, cfg, model, *run.disc, 1e9, 2000);
    return run;
}

double exact_profile_energy(double T, double Tc, double eps) {
    // f(u) = eps^2/2 u'^2 pointwise along the profile, so F = eps^2 int u'^2
    const auto prof = tanh_profile(T, Tc, eps);
    const double t = std::tanh(0.5 * prof.mu);
    return eps * eps * prof.u_plus * prof.u_plus * prof.mu * 2.0 * (t - t * t * t / 3.0);
}

namespace {

// Lagrange interpolant of g at p + 1 equispaced points of [a, b], at xi.
double equispaced_interpolant(double a, double b, int p, double xi, const std::function<double(double)>& g) {
    double s = 0.0;
    for (int i = 0; i <= p; ++i) {
        const double xi_i = -1.0 + 2.0 * i / p;
        double l = 1.0;
        for (int j = 0; j <= p; ++j)
            if (j != i) {
                const double xj = -1.0 + 2.0 * j / p;
                l *= (xi - xj) / (xi_i - xj);
            }
        s += l * g(a + 0.5 * (xi_i + 1.0) * (b - a));
    }
    return s;
}

} // namespace

ConvergenceRow convergence_point(int degree, int complexity, double eps) {
    if (degree < 1) throw ParameterError("convergence_point: degree must be >= 1");
    int ne = std::max(1, complexity / degree);
    ne += ne % 2;  // keeps the interface on a vertex
    auto run = stationary_profile(degree, ne, eps);
    const Discretization& d = *run.disc;
    const auto& u = run.result.state.u;
    const auto prof = tanh_profile(1.0, 2.0, eps);
    auto exact = [&](double x) { return prof(x - 0.5); };

    ConvergenceRow row;
    row.degree = degree;
    row.n_elem = ne;
    row.complexity = ne * degree;
    row.converged = run.result.converged;

    const auto roots = interface_slope(u, d);
    if (roots.empty()) throw ShapeError("convergence_point: the stationary state has no interface");
    const auto it = std::min_element(roots.begin(), roots.end(),
                                     [](const auto& a, const auto& b) { return std::abs(a.x - 0.5) < std::abs(b.x - 0.5); });
    row.slope_error = std::abs(it->slope - prof.u_plus * prof.mu);
    row.energy_error =
        std::abs(total_energy(u, taylor_model(2, 1.0, 2.0), d, eps * eps, 4) - exact_profile_energy(1.0, 2.0, eps));
    row.l2_error = l2_error(u, [&](double x, double) { return exact(x); }, d);

    const auto q = gauss_legendre(2 * degree + 6);
    double s = 0.0;
    for (std::size_t e = 0; e < d.mesh().n_elements(); ++e) {
        const double a = d.mesh().map(e, -1.0, 0.0).x, b = d.mesh().map(e, 1.0, 0.0).x;
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const double xi = q.points[k];
            const double v = d.evaluate(u, e, xi, 0.0) - equispaced_interpolant(a, b, degree, xi, exact);
            s += q.weights[k] * 0.5 * (b - a) * v * v;
        }
    }
    row.l2_interp_error = std::sqrt(s);
    return row;
}

namespace {

double order_of(const std::vector<double>& x, const std::vector<double>& y) {
    for (double v : y)
        if (!(v > 0.0)) return std::nan("");
    return -linear_regression_loglog(x, y).slope;
}

} // namespace

ConvergenceStudy convergence_study(const std::vector<int>& degrees, const std::vector<int>& levels, double eps,
                                   int fit_levels) {
    ConvergenceStudy st;
    for (int p : degrees) {
        std::vector<ConvergenceRow> rows;
        for (int c : levels) rows.push_back(convergence_point(p, c, eps));
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.complexity < b.complexity; });
        rows.erase(std::unique(rows.begin(), rows.end(),
                               [](const auto& a, const auto& b) { return a.complexity == b.complexity; }),
                   rows.end());
        st.rows.insert(st.rows.end(), rows.begin(), rows.end());
        const std::size_t k = std::min(rows.size(), static_cast<std::size_t>(std::max(fit_levels, 0)));
        if (k < 2)
            throw FitError("convergence: degree " + std::to_string(p) + " has " + std::to_string(k) +
                           " level(s) to fit, need at least 2");
        std::vector<double> x, l2, li, sl, en;
        for (std::size_t i = rows.size() - k; i < rows.size(); ++i) {
            x.push_back(rows[i].complexity);
            l2.push_back(rows[i].l2_error);
            li.push_back(rows[i].l2_interp_error);
            sl.push_back(rows[i].slope_error);
            en.push_back(rows[i].energy_error);
        }
        ConvergenceOrder o;
        o.degree = p;
        o.n_points = static_cast<int>(k);
        o.l2 = order_of(x, l2);
        o.l2_interp = order_of(x, li);
        o.slope = order_of(x, sl);
        o.energy = order_of(x, en);
        st.orders.push_back(o);
    }
    return st;
}

SweepResult bifurcation_sweep(const RunConfig& cfg) {
    validate(cfg);
    const auto disc = build_discretization(cfg);
    const EnergyModel model = build_model(cfg);
    SweepResult res;
    res.pair = compute_eigenpairs(*disc, 1).front();
    const double rho = res.pair.rho;

    std::vector<double> eps_list;
    if (cfg.sweep_auto) {
        for (int k = 0; k < cfg.sweep_points; ++k) {
            const double f = cfg.sweep_points > 1 ? k / (cfg.sweep_points - 1.0) : 0.0;
            const double d = cfg.sweep_d_min * std::pow(cfg.sweep_d_max / cfg.sweep_d_min, f);
            eps_list.push_back(1.0 / std::sqrt(rho + d));
        }
    } else {
        for (double e : cfg.sweep_eps)
            if (1.0 / (e * e) > rho) eps_list.push_back(e);
        if (eps_list.empty()) throw ConfigError("sweep: no eps in the list satisfies 1/eps^2 > rho_1");
    }

    std::vector<BifurcationSample> samples;
    for (double eps : eps_list) {
        SolverConfig sc = build_solver_config(cfg);
        sc.eps2 = eps * eps;
        sc.tau_growth = 1.5;
        sc.tau_max = 100.0;
        sc.steady_tol = cfg.sweep_steady_tol;
        State s;
        s.u = mode_initial_data({res.pair}, {1.0}, cfg.sweep_amplitude);
        auto r = find_stationary(s, sc, model, *disc, 1e7, 20000);
        SweepPoint pt;
        pt.eps = eps;
        pt.converged = r.converged;
        pt.steps = r.steps;
        for (double v : r.state.u) pt.max_abs_u = std::max(pt.max_abs_u, std::abs(v));
        res.points.push_back(pt);
        samples.push_back({eps, std::move(r.state.u)});
    }
    res.fit = fit_bifurcation(samples, res.pair, *disc);
    return res;
}

} // namespace chfem
