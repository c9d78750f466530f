#include "chfem/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace chfem {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const char* end = v.data() + v.size();
    auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(x))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
}

long long to_int(const std::string& key, const std::string& v) {
    long long x = 0;
    const char* end = v.data() + v.size();
    auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc() || r.ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string choice(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return v;
    std::string msg = key + ": '" + v + "' is not one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw ConfigError(msg);
}

template <class T>
std::string join(const std::vector<T>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        if constexpr (std::is_floating_point_v<T>)
            s += fmt(xs[i]);
        else
            s += std::to_string(xs[i]);
    }
    return s;
}

struct Entry {
    const char* key;
    const char* doc;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define REAL(name, doc) \
    Entry { #name, doc, [](RunConfig& c, const std::string& v) { c.name = to_double(#name, v); }, \
            [](const RunConfig& c) { return fmt(c.name); } }
#define INT(name, doc) \
    Entry { #name, doc, [](RunConfig& c, const std::string& v) { c.name = static_cast<decltype(c.name)>(to_int(#name, v)); }, \
            [](const RunConfig& c) { return std::to_string(c.name); } }
#define BOOL(name, doc) \
    Entry { #name, doc, [](RunConfig& c, const std::string& v) { c.name = to_bool(#name, v); }, \
            [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); } }
#define TEXT(name, doc) \
    Entry { #name, doc, [](RunConfig& c, const std::string& v) { c.name = v; }, \
            [](const RunConfig& c) { return c.name; } }
#define CHOICE(name, doc, ...) \
    Entry { #name, doc, [](RunConfig& c, const std::string& v) { c.name = choice(#name, v, {__VA_ARGS__}); }, \
            [](const RunConfig& c) { return c.name; } }

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        CHOICE(domain, "segment [0,lx], rect [0,lx]x[0,ly], or mesh (mesh_file)", "segment", "rect", "mesh"),
        REAL(lx, "domain length in x"),
        REAL(ly, "domain length in y (rect)"),
        TEXT(mesh_file, "quadrilateral mesh file for domain = mesh"),
        INT(refine, "uniform refinement factor applied to an imported mesh"),
        INT(degree, "polynomial degree 1..10"),
        INT(n_elem, "elements of a segment"),
        INT(nx, "rect elements in x"),
        INT(ny, "rect elements in y"),
        INT(quad_order, "Gauss points per direction, 0 = degree + 2"),
        BOOL(lumped, "row-sum lumped mass"),
        CHOICE(model, "free energy: quartic (1-u^2)^2/4, logarithmic, taylor (f_2n)", "quartic", "logarithmic",
               "taylor"),
        REAL(T, "temperature (logarithmic, taylor)"),
        REAL(Tc, "critical temperature (logarithmic, taylor)"),
        INT(taylor_n, "Taylor order n of f_2n, n >= 2"),
        REAL(eps2, "gradient coefficient eps^2"),
        REAL(tau, "time step"),
        REAL(t_end, "final time"),
        INT(max_steps, "step limit, 0 = none"),
        INT(seed, "random seed for random initial data"),
        BOOL(stop_when_steady, "stop once |u_{n+1}-u_n|/tau < steady_tol"),
        CHOICE(precond, "Krylov preconditioner", "lu", "mass", "none"),
        CHOICE(krylov, "Krylov method", "bicgstab", "bicg"),
        REAL(newton_tol, "Newton residual tolerance, 0 = 1e-10 sqrt(n_dofs)"),
        INT(newton_max, "Newton iteration limit"),
        REAL(krylov_tol, "relative Krylov tolerance"),
        REAL(steady_tol, "stationarity threshold on |u_{n+1}-u_n|/tau"),
        INT(max_retries, "step halvings before a step failure"),
        CHOICE(init, "initial data", "random", "mode", "cross", "file", "tanh", "constant"),
        REAL(init_amplitude, "random/mode amplitude"),
        REAL(init_mean, "constant offset added to random/mode data; the value for constant"),
        Entry{"init_modes", "mode combination coefficients (comma list)",
              [](RunConfig& c, const std::string& v) {
                  c.init_modes.clear();
                  for (const auto& s : split_list(v)) c.init_modes.push_back(to_double("init_modes", s));
              },
              [](const RunConfig& c) { return join(c.init_modes); }},
        TEXT(init_file, "nodal values, one per line (init = file)"),
        INT(snapshot_every, "snapshot cadence in steps, 0 = initial and final only"),
        INT(eigen_count, "number of eigenpairs (eigen)"),
        INT(critical_n_min, "smallest Taylor order (critical)"),
        INT(critical_n_max, "largest Taylor order (critical)"),
        Entry{"conv_degrees", "degrees of the convergence study (comma list)",
              [](RunConfig& c, const std::string& v) {
                  c.conv_degrees.clear();
                  for (const auto& s : split_list(v)) c.conv_degrees.push_back(static_cast<int>(to_int("conv_degrees", s)));
              },
              [](const RunConfig& c) { return join(c.conv_degrees); }},
        Entry{"conv_levels", "complexity levels degree x elements (comma list)",
              [](RunConfig& c, const std::string& v) {
                  c.conv_levels.clear();
                  for (const auto& s : split_list(v)) c.conv_levels.push_back(static_cast<int>(to_int("conv_levels", s)));
              },
              [](const RunConfig& c) { return join(c.conv_levels); }},
        REAL(conv_eps, "eps of the stationary profile benchmark"),
        INT(conv_fit_levels, "finest levels entering the order fit"),
        Entry{"sweep_eps", "auto, or an explicit comma list of eps values",
              [](RunConfig& c, const std::string& v) {
                  c.sweep_eps.clear();
                  if (v == "auto") {
                      c.sweep_auto = true;
                      return;
                  }
                  c.sweep_auto = false;
                  for (const auto& s : split_list(v)) c.sweep_eps.push_back(to_double("sweep_eps", s));
              },
              [](const RunConfig& c) { return c.sweep_auto ? std::string("auto") : join(c.sweep_eps); }},
        REAL(sweep_d_min, "auto sweep: smallest 1/eps^2 - rho_1"),
        REAL(sweep_d_max, "auto sweep: largest 1/eps^2 - rho_1"),
        INT(sweep_points, "auto sweep: number of log-spaced points"),
        REAL(sweep_amplitude, "amplitude of the mode-seeded initial data"),
        REAL(sweep_steady_tol, "stationarity threshold of the sweep runs"),
    };
    return table;
}

#undef REAL
#undef INT
#undef BOOL
#undef TEXT
#undef CHOICE

} // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& t = entries();
    auto it = std::find_if(t.begin(), t.end(), [&](const Entry& e) { return key == e.key; });
    if (it == t.end()) throw ConfigError("unknown key '" + key + "'");
    it->set(cfg, value);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    apply_setting(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void read_config(std::istream& in, RunConfig& cfg) {
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        try {
            apply_override(cfg, line);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(n) + ": " + e.what());
        }
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    RunConfig cfg;
    try {
        read_config(in, cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return cfg;
}

void validate(const RunConfig& c) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    need(c.degree >= 1 && c.degree <= 10, "degree must be in 1..10");
    need(c.lx > 0.0 && c.ly > 0.0, "lx and ly must be positive");
    need(c.refine >= 1, "refine must be >= 1");
    if (c.domain == "segment") need(c.n_elem >= 1, "n_elem must be >= 1");
    if (c.domain == "rect") need(c.nx >= 1 && c.ny >= 1, "nx and ny must be >= 1");
    if (c.domain == "mesh") need(!c.mesh_file.empty(), "domain = mesh needs mesh_file");
    need(c.quad_order >= 0, "quad_order must be >= 0");
    need(c.eps2 > 0.0, "eps2 must be positive");
    need(c.tau > 0.0, "tau must be positive");
    need(c.t_end >= 0.0, "t_end must be >= 0");
    need(c.max_steps >= 0, "max_steps must be >= 0");
    need(c.newton_tol >= 0.0, "newton_tol must be >= 0");
    need(c.newton_max >= 1, "newton_max must be >= 1");
    need(c.krylov_tol > 0.0, "krylov_tol must be positive");
    need(c.steady_tol > 0.0, "steady_tol must be positive");
    need(c.max_retries >= 0, "max_retries must be >= 0");
    need(c.snapshot_every >= 0, "snapshot_every must be >= 0");
    if (c.model != "quartic") {
        need(c.T > 0.0 && c.Tc > 0.0, "T and Tc must be positive");
        need(c.T < c.Tc, "T must be below Tc (no double well otherwise)");
    }
    if (c.model == "taylor") need(c.taylor_n >= 2, "taylor requires taylor_n >= 2");
    need(c.init_amplitude >= 0.0, "init_amplitude must be >= 0");
    if (c.init == "file") need(!c.init_file.empty(), "init = file needs init_file");
    if (c.init == "mode") need(!c.init_modes.empty(), "init = mode needs init_modes");
    if (c.model == "logarithmic" && (c.init == "random" || c.init == "mode"))
        need(c.init_amplitude + std::abs(c.init_mean) < 1.0,
             "logarithmic model needs |u0| < 1 (init_amplitude + |init_mean| >= 1)");
    if (c.model == "logarithmic" && c.init == "constant")
        need(std::abs(c.init_mean) < 1.0, "logarithmic model needs |u0| < 1");
    need(c.eigen_count >= 1, "eigen_count must be >= 1");
    need(c.critical_n_min >= 2 && c.critical_n_max >= c.critical_n_min, "need 2 <= critical_n_min <= critical_n_max");
    need(!c.conv_degrees.empty(), "conv_degrees is empty");
    for (int p : c.conv_degrees) need(p >= 1 && p <= 10, "conv_degrees entries must be in 1..10");
    need(!c.conv_levels.empty(), "conv_levels is empty");
    for (int l : c.conv_levels) need(l >= 1, "conv_levels entries must be >= 1");
    need(c.conv_eps > 0.0, "conv_eps must be positive");
    need(c.conv_fit_levels >= 1, "conv_fit_levels must be >= 1");
    if (c.sweep_auto) {
        need(c.sweep_points >= 1, "sweep_points must be >= 1");
        need(c.sweep_d_min > 0.0 && c.sweep_d_max >= c.sweep_d_min, "need 0 < sweep_d_min <= sweep_d_max");
    } else {
        need(!c.sweep_eps.empty(), "sweep_eps is empty");
        for (double e : c.sweep_eps) need(e > 0.0, "sweep_eps entries must be positive");
    }
    need(c.sweep_amplitude > 0.0, "sweep_amplitude must be positive");
    need(c.sweep_steady_tol > 0.0, "sweep_steady_tol must be positive");
}

void dump_config(const RunConfig& cfg, std::ostream& out) {
    for (const auto& e : entries()) out << e.key << " = " << e.get(cfg) << "  # " << e.doc << '\n';
}

} // namespace chfem
