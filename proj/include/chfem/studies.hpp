#pragma once
// Studies built on the solver: configured evolutions, eigen solves, the
// critical-point table, the 1D stationary-profile convergence benchmark and
// the bifurcation sweep, plus their file writers.

#include "chfem/assembly.hpp"
#include "chfem/chsolver.hpp"
#include "chfem/config.hpp"
#include "chfem/diagnostics.hpp"
#include "chfem/eigensolver.hpp"

#include <filesystem>
#include <memory>
#include <ostream>
#include <vector>

namespace chfem {

Mesh build_mesh(const RunConfig& cfg);
std::unique_ptr<Discretization> build_discretization(const RunConfig& cfg);
EnergyModel build_model(const RunConfig& cfg);
SolverConfig build_solver_config(const RunConfig& cfg);

/// beta inside the centred axis-aligned cross (arm width 0.2, length 0.8, in
/// units of the bounding box), -beta outside, mollified over one element width.
std::vector<double> cross_initial_data(const Discretization& disc, double beta);

/// Initial nodal values for cfg.init.
std::vector<double> build_initial_data(const RunConfig& cfg, const Discretization& disc);

// ---- output ---------------------------------------------------------------

void write_diagnostics_header(std::ostream& out);
void write_diagnostics_row(std::ostream& out, const StepRecord& r);

/// Legacy ASCII VTK structured grid of u (and w when given) sampled on the
/// (nx p + 1) x (ny p + 1) lattice of a structured rectangle mesh.
void write_vtk(std::ostream& out, const Discretization& disc, std::span<const double> u,
               std::span<const double> w = {});
/// x,y,u[,w] at the DoF coordinates.
void write_point_csv(std::ostream& out, const Discretization& disc, std::span<const double> u,
                     std::span<const double> w = {});
/// VTK for structured rectangles, point CSV otherwise; returns the file path.
std::filesystem::path write_snapshot(const std::filesystem::path& stem, const Discretization& disc,
                                     std::span<const double> u, std::span<const double> w = {});

// ---- studies ----------------------------------------------------------------

struct RunOutcome {
    Trajectory trajectory;
    std::vector<std::filesystem::path> snapshots;
};
/// Configured evolution. With an output directory, writes diagnostics.csv,
/// snapshots at the configured cadence and final.{vtk,csv}.
RunOutcome run_evolution(const RunConfig& cfg, const std::filesystem::path& out_dir = {});

/// First cfg.eigen_count eigenpairs; 2D problems use the x-directional
/// stiffness as tie-break so repeated eigenvalues come out as axis modes.
std::vector<EigenPair> compute_eigenpairs(const Discretization& disc, int count);

struct CriticalRow {
    int n = 0;
    CriticalPoints taylor;
    CriticalPoints log;
    double sigma_error = 0.0;  ///< |sigma_+(f_2n) - sigma_+(log)|
    double beta_error = 0.0;   ///< |beta_+(f_2n) - beta_+(log)|
};
std::vector<CriticalRow> critical_table(double T, double Tc, int n_min, int n_max);

/// Stationary state of the 1D profile benchmark: taylor(2) model, the exact
/// tanh profile centred at 1/2 as initial data, relaxed by find_stationary.
struct ProfileRun {
    std::unique_ptr<Discretization> disc;
    StationaryResult result;
};
ProfileRun stationary_profile(int degree, int n_elem, double eps, double T = 1.0, double Tc = 2.0);
/// Same relaxation for another model; the initial tanh is clipped to 0.99 of
/// the model's binodal value.
ProfileRun stationary_profile(int degree, int n_elem, double eps, const EnergyModel& model, double T, double Tc);

/// Energy of u_plus tanh(mu (x - 1/2)) on [0, 1] for the normalized f_4.
double exact_profile_energy(double T, double Tc, double eps);

struct ConvergenceRow {
    int degree = 0;
    int n_elem = 0;
    int complexity = 0;
    bool converged = false;
    double slope_error = 0.0;   ///< |slope at the interface - u_plus mu|
    double energy_error = 0.0;  ///< |F(u_h) - F(exact)|
    double l2_error = 0.0;      ///< |u_h - exact|
    /// |u_h - I u|, I the interpolant of the exact profile at equispaced
    /// element nodes.
    double l2_interp_error = 0.0;
};
ConvergenceRow convergence_point(int degree, int complexity, double eps);

struct ConvergenceOrder {
    int degree = 0;
    int n_points = 0;
    double l2 = 0.0;
    double l2_interp = 0.0;
    double slope = 0.0;
    double energy = 0.0;
};
struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    std::vector<ConvergenceOrder> orders;
};
/// Runs every (degree, level) pair; orders are minus the log-log slopes over
/// the `fit_levels` finest levels. Throws FitError with fewer than two levels.
ConvergenceStudy convergence_study(const std::vector<int>& degrees, const std::vector<int>& levels, double eps,
                                   int fit_levels);

struct SweepPoint {
    double eps = 0.0;
    bool converged = false;
    std::int64_t steps = 0;
    double max_abs_u = 0.0;
};
struct SweepResult {
    EigenPair pair;
    std::vector<SweepPoint> points;
    FitResult fit;
};
/// Mode-seeded find_stationary runs for every eps with 1/eps^2 > rho_1, then
/// fit_bifurcation. Uses the scaled quartic unless cfg selects another model.
SweepResult bifurcation_sweep(const RunConfig& cfg);

} // namespace chfem
