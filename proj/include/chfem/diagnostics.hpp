#pragma once
// Energy, error norms, tanh-profile and bifurcation fits, interface measures.

#include "chfem/assembly.hpp"
#include "chfem/eigensolver.hpp"
#include "chfem/energy_models.hpp"

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chfem {

struct FitResult {
    std::vector<std::pair<std::string, double>> params;
    double residual = 0.0;  // least-squares objective at the optimum
    int n_points = 0;

    /// Throws FitError for an unknown name.
    double get(const std::string& name) const;
    void set(const std::string& name, double value);
};

/// int f(u_h) + eps2/2 |grad u_h|^2. extra_points = 0 uses the scheme's own
/// quadrature (nodal collocation when lumped); otherwise a Gauss rule with
/// degree + 2 + extra_points points per direction.
double total_energy(std::span<const double> u, const EnergyModel& model, const Discretization& disc, double eps2,
                    int extra_points = 0);

/// int u_h (consistent mass).
double total_mass(std::span<const double> u, const Discretization& disc);

/// L2 norm of u_h - reference with 2p + 4 Gauss points per direction.
double l2_error(std::span<const double> u, const std::function<double(double, double)>& reference,
                const Discretization& disc);

/// H1 seminorm of u_h - reference; grad returns {d/dx, d/dy}.
double h1_seminorm_error(std::span<const double> u,
                         const std::function<std::array<double, 2>(double, double)>& grad,
                         const Discretization& disc);

struct InterfacePoint {
    double x = 0.0;
    double slope = 0.0;
};

/// Roots of a 1D u_h (bisection inside each sign-change element) and the
/// derivative of u_h there, ordered by x.
std::vector<InterfacePoint> interface_slope(std::span<const double> u, const Discretization& disc);

/// Fits u_plus * tanh((x - x0) mu) to the nodal values of a single-interface
/// 1D state. u_plus is the mean of |u| at the two ends and x0 the root of u_h.
/// params: u_plus, mu (> 0), x0, orientation (+1 increasing, -1 decreasing),
/// width = 2 / mu.
FitResult fit_tanh_profile(std::span<const double> u, const Discretization& disc);

struct BifurcationSample {
    double eps = 0.0;
    std::vector<double> u;  // stationary state
};

/// Single-mode fit of stationary states beyond the threshold 1/eps^2 = rho.
/// The mode is rescaled to max|v| = 1, and each state is sign-aligned with it.
/// C(eps) = <u, v>_M / (sqrt(1/eps^2 - rho) <v, v>_M); then
///   log10 |u - C sqrt(d) v|_2 against log10 d gives alpha and C_tilde,
///   log10 C against log10 eps gives c_exponent and c_prefactor.
/// params: alpha, C_tilde, alpha_r2, c_exponent, c_prefactor, and eps_k, C_k,
/// misfit_k per sample. alpha and C_tilde are NaN when every misfit vanishes.
FitResult fit_bifurcation(const std::vector<BifurcationSample>& states, const EigenPair& pair,
                          const Discretization& disc);

/// Length of the zero level set of a 2D u_h, by marching squares on a
/// (p+3) x (p+3) cell lattice per element.
double interface_measure_2d(std::span<const double> u, const Discretization& disc);

} // namespace chfem
