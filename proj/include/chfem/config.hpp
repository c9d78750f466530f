#pragma once
// Flat key = value run configuration shared by the command-line front end and
// the acceptance driver. Unknown keys and malformed values are errors.

#include "chfem/error.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace chfem {

/// Invalid configuration (bad key, value or cross-field combination).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    // geometry and discretization
    std::string domain = "segment";  ///< segment | rect | mesh
    double lx = 1.0;
    double ly = 1.0;
    std::string mesh_file;
    int refine = 1;
    int degree = 1;
    int n_elem = 32;
    int nx = 16;
    int ny = 16;
    int quad_order = 0;
    bool lumped = false;

    // free energy
    std::string model = "quartic";  ///< quartic | logarithmic | taylor
    double T = 1.0;
    double Tc = 2.0;
    int taylor_n = 2;

    // time stepping
    double eps2 = 0.01;
    double tau = 1e-3;
    double t_end = 1.0;
    std::int64_t max_steps = 0;
    std::uint64_t seed = 1;
    bool stop_when_steady = false;
    std::string precond = "lu";     ///< lu | mass | none
    std::string krylov = "bicgstab";  ///< bicgstab | bicg
    double newton_tol = 0.0;
    int newton_max = 25;
    double krylov_tol = 1e-12;
    double steady_tol = 1e-8;
    int max_retries = 4;

    // initial condition
    std::string init = "random";  ///< random | mode | cross | file | tanh | constant
    double init_amplitude = 0.05;
    double init_mean = 0.0;
    std::vector<double> init_modes{1.0};
    std::string init_file;

    // output
    int snapshot_every = 0;  ///< 0: initial and final snapshots only

    // eigen
    int eigen_count = 6;

    // critical points table
    int critical_n_min = 2;
    int critical_n_max = 8;

    // convergence study
    std::vector<int> conv_degrees{1, 2, 3, 4, 5};
    std::vector<int> conv_levels{120, 240, 360, 480, 600, 720};
    double conv_eps = 0.02;
    int conv_fit_levels = 4;

    // bifurcation sweep
    bool sweep_auto = true;            ///< sweep_eps = auto
    std::vector<double> sweep_eps;     ///< explicit list when !sweep_auto
    double sweep_d_min = 0.1;
    double sweep_d_max = 5.0;
    int sweep_points = 8;
    double sweep_amplitude = 0.1;
    double sweep_steady_tol = 1e-10;
};

/// Applies one assignment. Throws ConfigError for unknown keys or bad values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Applies "key=value".
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Reads key = value lines ('#' comments, blank lines ignored). Errors carry
/// the line number.
void read_config(std::istream& in, RunConfig& cfg);
RunConfig load_config(const std::string& path);

/// Cross-field checks; throws ConfigError.
void validate(const RunConfig& cfg);

/// Every key with its current value and a one-line description, in a form
/// read_config accepts.
void dump_config(const RunConfig& cfg, std::ostream& out);

} // namespace chfem
