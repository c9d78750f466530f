#include "chfem/energy_models.hpp"

#include "chfem/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace chfem {

namespace {

void check_temperatures(double T, double Tc) {
    if (!(T > 0.0) || !(Tc > 0.0)) throw ParameterError("temperatures must be positive");
}

/// Root of an increasing function g on [lo, hi] with g(lo) < 0 < g(hi):
/// bisection until the bracket stops shrinking, then two Newton steps.
template <class G, class DG>
double bracketed_root(G g, DG dg, double lo, double hi) {
    double glo = g(lo), ghi = g(hi);
    if (!(glo < 0.0) || !(ghi > 0.0)) throw NumericError("root bracket does not change sign");
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mid)) * 1e-3) break;
        const double gm = g(mid);
        if (gm < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int k = 0; k < 2; ++k) {
        const double d = dg(x);
        if (d == 0.0 || !std::isfinite(d)) break;
        const double xn = x - g(x) / d;
        if (xn > lo - 1e-10 && xn < hi + 1e-10) x = xn;
    }
    if (!std::isfinite(x)) throw NumericError("root finding failed");
    return x;
}

double taylor_f_unnormalized(int n, double T, double Tc, double u) {
    const double u2 = u * u;
    double s = 0.0, pw = 1.0;
    for (int p = 1; p <= n; ++p) {
        pw *= u2;
        s += pw / (2.0 * p * (2.0 * p - 1.0));
    }
    return 0.5 * Tc * (1.0 - u2) + T * (-std::numbers::ln2 + s);
}

} // namespace

bool EnergyModel::admissible(double u) const {
    if (!std::isfinite(u)) return false;
    if (kind == ModelKind::logarithmic) return std::abs(u) < 1.0 - delta;
    return true;
}

double EnergyModel::f(double u) const {
    switch (kind) {
    case ModelKind::logarithmic: {
        const double a = 0.5 * (1.0 + u), b = 0.5 * (1.0 - u);
        return 0.5 * Tc * (1.0 - u * u) + T * (a * std::log(a) + b * std::log(b));
    }
    case ModelKind::scaled_quartic: {
        const double s = 1.0 - u * u;
        return 0.25 * s * s;
    }
    case ModelKind::taylor: return taylor_f_unnormalized(n, T, Tc, u) + K;
    }
    return 0.0;
}

double EnergyModel::psi(double u) const {
    switch (kind) {
    case ModelKind::logarithmic: return -Tc * u + T * std::atanh(u);
    case ModelKind::scaled_quartic: return u * u * u - u;
    case ModelKind::taylor: {
        const double u2 = u * u;
        double s = 0.0, pw = u;
        for (int p = 1; p <= n; ++p) {
            s += pw / (2.0 * p - 1.0);
            pw *= u2;
        }
        return -Tc * u + T * s;
    }
    }
    return 0.0;
}

double EnergyModel::dpsi(double u) const {
    switch (kind) {
    case ModelKind::logarithmic: return -Tc + T / (1.0 - u * u);
    case ModelKind::scaled_quartic: return 3.0 * u * u - 1.0;
    case ModelKind::taylor: {
        const double u2 = u * u;
        double s = 0.0, pw = 1.0;
        for (int p = 1; p <= n; ++p) {
            s += pw;
            pw *= u2;
        }
        return -Tc + T * s;
    }
    }
    return 0.0;
}

std::string EnergyModel::name() const {
    switch (kind) {
    case ModelKind::logarithmic: return "logarithmic";
    case ModelKind::scaled_quartic: return "scaled_quartic";
    case ModelKind::taylor: return "taylor" + std::to_string(n);
    }
    return "unknown";
}

EnergyModel logarithmic_model(double T, double Tc) {
    check_temperatures(T, Tc);
    EnergyModel m;
    m.kind = ModelKind::logarithmic;
    m.T = T;
    m.Tc = Tc;
    return m;
}

EnergyModel scaled_quartic_model() {
    EnergyModel m;
    m.kind = ModelKind::scaled_quartic;
    m.T = 0.0;
    m.Tc = 0.0;
    return m;
}

EnergyModel taylor_model(int n, double T, double Tc) {
    if (n < 2) throw ParameterError("taylor_model: n must be >= 2");
    check_temperatures(T, Tc);
    if (!(T < Tc)) throw ParameterError("taylor_model: need T < Tc (no binodal point otherwise)");
    EnergyModel m;
    m.kind = ModelKind::taylor;
    m.n = n;
    m.T = T;
    m.Tc = Tc;
    m.K = 0.0;
    const double beta = critical_points(m).beta_plus;
    m.K = -taylor_f_unnormalized(n, T, Tc, beta);
    return m;
}

namespace {

void require_admissible(const EnergyModel& m, double u) {
    if (!m.admissible(u))
        throw DomainError("value " + std::to_string(u) + " outside the admissible interval of " + m.name());
}

} // namespace

double eval_f(const EnergyModel& m, double u) {
    require_admissible(m, u);
    return m.f(u);
}

double eval_psi(const EnergyModel& m, double u) {
    require_admissible(m, u);
    return m.psi(u);
}

double eval_dpsi(const EnergyModel& m, double u) {
    require_admissible(m, u);
    return m.dpsi(u);
}

CriticalPoints critical_points(const EnergyModel& m) {
    if (m.kind == ModelKind::scaled_quartic) {
        const double s = 1.0 / std::sqrt(3.0);
        return {-s, s, -1.0, 1.0};
    }
    if (!(m.T < m.Tc)) throw ParameterError("critical_points: need T < Tc");
    auto g = [&](double u) { return m.psi(u); };
    auto dg = [&](double u) { return m.dpsi(u); };
    auto ddg = [&](double u) {
        // f''' for the Newton polish of the spinodal point
        if (m.kind == ModelKind::logarithmic) return 2.0 * m.T * u / ((1.0 - u * u) * (1.0 - u * u));
        const double u2 = u * u;
        double s = 0.0, pw = u;
        for (int p = 2; p <= m.n; ++p) {
            s += (2.0 * p - 2.0) * pw;
            pw *= u2;
        }
        return m.T * s;
    };
    double hi;
    if (m.kind == ModelKind::logarithmic) {
        hi = 1.0 - m.delta;
    } else {
        hi = 1.0;
        while (m.psi(hi) <= 0.0 || m.dpsi(hi) <= 0.0) hi *= 2.0;
    }
    const double sigma = bracketed_root(dg, ddg, 0.0, hi);
    const double beta = bracketed_root(g, dg, sigma, hi);
    return {-sigma, sigma, -beta, beta};
}

double TanhProfile::operator()(double x) const { return u_plus * std::tanh(mu * x); }

double TanhProfile::derivative(double x) const {
    const double c = std::cosh(mu * x);
    return u_plus * mu / (c * c);
}

TanhProfile tanh_profile(double T, double Tc, double eps) {
    check_temperatures(T, Tc);
    if (!(T < Tc)) throw ParameterError("tanh_profile: need T < Tc");
    if (!(eps > 0.0)) throw ParameterError("tanh_profile: eps must be positive");
    return {std::sqrt(3.0 * (Tc / T - 1.0)), std::sqrt(Tc - T) / (eps * std::numbers::sqrt2)};
}

double interface_length(double T, double Tc, double eps) {
    check_temperatures(T, Tc);
    if (!(T < Tc)) throw ParameterError("interface_length: need T < Tc");
    if (!(eps > 0.0)) throw ParameterError("interface_length: eps must be positive");
    return 2.0 * eps * std::numbers::sqrt2 / std::sqrt(Tc - T);
}

double lambda_param(double Tc, double eps) {
    if (!(Tc > 0.0)) throw ParameterError("lambda_param: Tc must be positive");
    if (!(eps > 0.0)) throw ParameterError("lambda_param: eps must be positive");
    return 2.0 * eps * std::numbers::sqrt2 / std::sqrt(Tc);
}

} // namespace chfem
