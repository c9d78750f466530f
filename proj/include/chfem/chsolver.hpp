#pragma once
// Backward Euler in time for the mixed system
//   tau A w + M u - M u_n           = 0
//   M w - eps2 A u - N(u)           = 0,   N_i = int psi(u_h) phi_i
// solved by Newton's method with a Krylov method for the linearized block
// system.

#include "chfem/assembly.hpp"
#include "chfem/energy_models.hpp"
#include "chfem/linalg.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chfem {

struct State {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> w;
};

enum class KrylovMethod { bicgstab, bicg };
enum class PrecondKind { lu, mass, none };

struct SolverConfig {
    double tau = 1e-3;
    double eps2 = 0.01;
    /// Absolute 2-norm of the block residual; <= 0 selects 1e-10*sqrt(n_dofs).
    double newton_tol = 0.0;
    int newton_max = 25;
    double krylov_tol = 1e-12;
    int krylov_max = 2000;
    double steady_tol = 1e-8;
    /// Must match the discretization's mass matrix choice.
    bool mass_lumping = false;
    KrylovMethod krylov = KrylovMethod::bicgstab;
    PrecondKind precond = PrecondKind::lu;
    /// The LU preconditioner is refreshed when the last Krylov solve needed
    /// more iterations than this.
    int refactor_iters = 6;
    /// Step failure policy: split the step into 2^k substeps, k <= max_retries.
    int max_retries = 4;
    /// Optional step growth for find_stationary (1 = fixed step).
    double tau_growth = 1.0;
    double tau_max = 0.0;

    /// Throws ParameterError on non-positive tolerances, tau or eps2.
    void validate() const;
    double effective_newton_tol(std::size_t n_dofs) const;
};

struct StepStats {
    int newton_iters = 0;
    int krylov_iters = 0;
    double energy = 0.0;
    double mass = 0.0;
    double residual = 0.0;
    int substeps = 1;
    int refactorizations = 0;
};

class TimeStepper {
public:
    TimeStepper(const Discretization& disc, const EnergyModel& model, SolverConfig cfg);
    ~TimeStepper();
    TimeStepper(TimeStepper&&) noexcept;

    const SolverConfig& config() const { return cfg_; }
    const Discretization& discretization() const { return disc_; }
    const EnergyModel& model() const { return model_; }

    /// State with w from M w = N(u) + eps2 A u.
    State initial_state(std::vector<double> u0, double t0 = 0.0) const;

    /// Block residual (R1; R2) of stacked length 2n for step size tau.
    std::vector<double> residual(const State& next, const State& prev, double tau) const;
    std::vector<double> residual(const State& next, const State& prev) const { return residual(next, prev, cfg_.tau); }

    struct NewtonUpdate {
        State state;
        double residual_norm = 0.0;  ///< norm before the update
        int krylov_iters = 0;
    };
    /// One Newton update from guess.
    NewtonUpdate newton_step(const State& guess, const State& prev, double tau);

    /// One backward Euler step of size tau (cfg.tau by default) with the
    /// retry policy. Throws NumericError once retries are exhausted.
    std::pair<State, StepStats> advance(const State& state);
    std::pair<State, StepStats> advance(const State& state, double tau);

    /// Norm of the stationary residual (A w ; M w - eps2 A u - N(u)).
    double stationary_residual(const State& s) const;

    /// |M^{-1} A w|_2, the rate du/dt of the semi-discrete flow at s.
    double rate(const State& s) const;

    /// Residual norms of every Newton iterate of the last successful solve.
    const std::vector<double>& last_newton_history() const { return history_; }

private:
    /// Newton solve for a single step without retries; nullopt on failure.
    std::optional<std::pair<State, StepStats>> try_step(const State& prev, double tau, std::string& why);
    void refresh_preconditioner(const BlockOperator& op);
    std::vector<double> solve_mass(std::vector<double> rhs) const;

    struct MassFactor;

    const Discretization& disc_;
    EnergyModel model_;
    SolverConfig cfg_;
    SparseMatrix jac_;
    std::unique_ptr<SparseLUPreconditioner> lu_;
    std::unique_ptr<DiagonalPreconditioner> diag_;
    double lu_tau_ = -1.0;
    int last_krylov_ = 0;
    int refactor_count_ = 0;
    std::vector<double> history_;
    mutable std::unique_ptr<MassFactor> mass_factor_;
};

/// Free-function forms of the stepper operations.
std::vector<double> residual(const State& next, const State& prev, const SolverConfig& cfg, const EnergyModel& model,
                             const Discretization& disc);
TimeStepper::NewtonUpdate newton_step(const State& guess, const State& prev, const SolverConfig& cfg,
                                      const EnergyModel& model, const Discretization& disc);
std::pair<State, StepStats> advance(const State& state, const SolverConfig& cfg, const EnergyModel& model,
                                    const Discretization& disc);

struct StepRecord {
    std::int64_t step = 0;
    double t = 0.0;
    double energy = 0.0;
    double mass = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    int newton_iters = 0;
    int krylov_iters = 0;
};

struct Schedule {
    double t_end = 1.0;
    std::int64_t max_steps = 0;  ///< 0: unlimited
    bool stop_when_steady = true;
    /// Called for the initial state (step 0) and after every accepted step.
    std::function<void(const State&, const StepRecord&)> on_step;
};

struct Trajectory {
    State final;
    std::vector<StepRecord> records;
    bool stationary = false;
    std::int64_t steps = 0;
    std::int64_t energy_increases = 0;  ///< steps violating monotone decay
    double max_mass_drift = 0.0;
};

/// Runs until t_end, max_steps or stationarity (||u_{n+1}-u_n||_2/tau < steady_tol).
/// Throws NumericError on step failure or on a mass drift above
/// 10*krylov_tol*max(||u0||,1)*n_steps.
Trajectory evolve(const State& initial, const SolverConfig& cfg, const EnergyModel& model, const Discretization& disc,
                  const Schedule& schedule);

struct StationaryResult {
    State state;
    bool converged = false;
    double residual_norm = 0.0;  ///< stationary residual of the final state
    std::int64_t steps = 0;
};

/// Evolves until stationary or t_max; converged=false reports a time-out.
StationaryResult find_stationary(const State& initial, const SolverConfig& cfg, const EnergyModel& model,
                                 const Discretization& disc, double t_max, std::int64_t max_steps = 0);

/// Uniform nodal values in [-amplitude, amplitude] from a seeded engine.
std::vector<double> random_initial_data(std::size_t n, double amplitude, std::uint64_t seed);

} // namespace chfem
