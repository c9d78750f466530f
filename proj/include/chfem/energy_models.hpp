#pragma once
// Free-energy densities f, their derivatives psi = f' and psi' = f'', and the
// associated spinodal/binodal points. Physical constants N_m*k_B are 1.

#include <string>

namespace chfem {

enum class ModelKind { logarithmic, scaled_quartic, taylor };

struct EnergyModel {
    ModelKind kind = ModelKind::scaled_quartic;
    int n = 0;         ///< Taylor order (f_{2n}); 0 otherwise
    double T = 1.0;    ///< temperature
    double Tc = 2.0;   ///< critical temperature
    double K = 0.0;    ///< additive constant (taylor only)
    double delta = 1e-9;  ///< logarithmic admissibility margin: |u| < 1 - delta

    double f(double u) const;
    double psi(double u) const;
    double dpsi(double u) const;
    bool admissible(double u) const;
    std::string name() const;
};

EnergyModel logarithmic_model(double T, double Tc);
/// f = (1-u^2)^2/4, psi = u^3 - u.
EnergyModel scaled_quartic_model();
/// Truncated expansion of the logarithmic density up to u^{2n}, shifted so
/// that f vanishes at its own binodal points. Requires n >= 2, 0 < T < Tc.
EnergyModel taylor_model(int n, double T, double Tc);

/// Free functions mirroring the members; they throw DomainError outside the
/// admissible interval.
double eval_f(const EnergyModel& m, double u);
double eval_psi(const EnergyModel& m, double u);
double eval_dpsi(const EnergyModel& m, double u);

struct CriticalPoints {
    double sigma_minus = 0.0;
    double sigma_plus = 0.0;
    double beta_minus = 0.0;
    double beta_plus = 0.0;
};

/// Spinodal points (roots of f'') and binodal points (minima of the symmetric
/// double well). Requires a double well (T < Tc for the temperature models).
CriticalPoints critical_points(const EnergyModel& m);

struct TanhProfile {
    double u_plus = 0.0;
    double mu = 0.0;
    double operator()(double x) const;
    double derivative(double x) const;
};

/// Stationary profile u_plus*tanh(mu*x) of the quartic f_4 model.
TanhProfile tanh_profile(double T, double Tc, double eps);

/// l = 2*eps*sqrt(2)/sqrt(Tc - T)
double interface_length(double T, double Tc, double eps);
/// lambda = 2*eps*sqrt(2)/sqrt(Tc)
double lambda_param(double Tc, double eps);

} // namespace chfem
