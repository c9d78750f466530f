#include "chfem/energy_models.hpp"
#include "chfem/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace chfem;

namespace {

std::vector<EnergyModel> all_models() {
    std::vector<EnergyModel> v{scaled_quartic_model(), logarithmic_model(1.0, 2.0), logarithmic_model(0.8, 1.0)};
    for (int n = 2; n <= 8; ++n) v.push_back(taylor_model(n, 1.0, 2.0));
    return v;
}

/// Plain bisection for an increasing function.
double bisect(double (*g)(double), double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        (g(m) < 0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST(EnergyModels, ScaledQuarticValues) {
    auto m = scaled_quartic_model();
    EXPECT_DOUBLE_EQ(eval_f(m, 0.0), 0.25);
    EXPECT_DOUBLE_EQ(eval_f(m, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(eval_f(m, -1.0), 0.0);
    EXPECT_NEAR(eval_psi(m, 1.0 / std::sqrt(3.0)), -2.0 / (3.0 * std::sqrt(3.0)), 1e-15);
}

TEST(EnergyModels, LogarithmicValueAtZero) {
    auto m = logarithmic_model(1.0, 2.0);
    EXPECT_NEAR(eval_f(m, 0.0), 1.0 - std::numbers::ln2, 1e-15);
    EXPECT_THROW(eval_f(m, 1.0), DomainError);
    EXPECT_THROW(eval_psi(m, -1.0), DomainError);
    EXPECT_THROW(eval_dpsi(m, 1.5), DomainError);
}

TEST(EnergyModels, TaylorTwoMatchesClosedForm) {
    const double T = 1.0, Tc = 2.0;
    auto m = taylor_model(2, T, Tc);
    for (double u : {-1.3, -0.2, 0.0, 0.4, 1.7})
        EXPECT_NEAR(eval_psi(m, u), -Tc * u + T * (u + u * u * u / 3.0), 1e-14);
    // beta = sqrt(3 (Tc/T - 1)) by an independent bisection on psi_4
    static double Tl = T, Tcl = Tc;
    auto psi4 = +[](double u) { return -Tcl * u + Tl * (u + u * u * u / 3.0); };
    const double beta = bisect(psi4, 0.5, 3.0);
    EXPECT_NEAR(beta, std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(critical_points(m).beta_plus, beta, 1e-12);
    const double f_unnorm = 0.5 * Tc * (1 - beta * beta) + T * (-std::numbers::ln2 + beta * beta / 2 + std::pow(beta, 4) / 12);
    EXPECT_NEAR(m.K, -f_unnorm, 1e-12);
    // normalized f_4 is (T/12)(u^2 - beta^2)^2
    for (double u : {0.0, 0.7, 2.1}) EXPECT_NEAR(eval_f(m, u), T / 12.0 * std::pow(u * u - 3.0, 2), 1e-12);
}

TEST(EnergyModels, TaylorRejectsBadParameters) {
    EXPECT_THROW(taylor_model(1, 1.0, 2.0), ParameterError);
    EXPECT_THROW(taylor_model(2, 2.0, 2.0), ParameterError);
    EXPECT_THROW(taylor_model(3, 3.0, 2.0), ParameterError);
}

TEST(EnergyModels, TaylorApproachesLogarithmicPotential) {
    auto t = taylor_model(50, 1.0, 2.0);
    auto l = logarithmic_model(1.0, 2.0);
    // remainder sum_{p>50} 0.5^{2p-1}/(2p-1) < 0.5^101 * 2
    EXPECT_NEAR(t.psi(0.5), l.psi(0.5), 1e-6);
    EXPECT_NEAR(t.psi(-0.3), l.psi(-0.3), 1e-6);
}

TEST(EnergyModels, DerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(9);
    const double h = 1e-6;
    for (const auto& m : all_models()) {
        const double lim = m.kind == ModelKind::logarithmic ? 0.95 : 1.8;
        std::uniform_real_distribution<double> d(-lim, lim);
        for (int k = 0; k < 100; ++k) {
            const double u = d(rng);
            const double fd_f = (m.f(u + h) - m.f(u - h)) / (2 * h);
            const double fd_psi = (m.psi(u + h) - m.psi(u - h)) / (2 * h);
            EXPECT_NEAR(m.psi(u), fd_f, 1e-7) << m.name() << " u=" << u;
            EXPECT_NEAR(m.dpsi(u), fd_psi, 1e-6) << m.name() << " u=" << u;
        }
    }
}

TEST(EnergyModels, SymmetryAndNormalization) {
    for (const auto& m : all_models()) {
        for (double u : {0.1, 0.45, 0.9}) {
            EXPECT_NEAR(m.f(u), m.f(-u), 1e-14);
            EXPECT_NEAR(m.psi(u), -m.psi(-u), 1e-14);
        }
        if (m.kind == ModelKind::taylor) {
            const auto c = critical_points(m);
            EXPECT_NEAR(m.f(c.beta_plus), 0.0, 1e-12);
            EXPECT_NEAR(m.f(c.beta_minus), 0.0, 1e-12);
        }
    }
}

TEST(EnergyModels, CriticalPointExamples) {
    const auto q = critical_points(scaled_quartic_model());
    EXPECT_NEAR(q.sigma_plus, 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(q.beta_plus, 1.0, 1e-15);
    const auto l = critical_points(logarithmic_model(1.0, 2.0));
    EXPECT_NEAR(l.sigma_plus, 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(std::atanh(l.beta_plus), 2.0 * l.beta_plus, 1e-11);
    const auto t2 = critical_points(taylor_model(2, 1.0, 2.0));
    EXPECT_NEAR(t2.sigma_plus, std::sqrt(2.0 / 1.0 - 1.0), 1e-12);
    EXPECT_THROW(critical_points(logarithmic_model(2.0, 1.0)), ParameterError);
}

TEST(EnergyModels, CriticalPointOrderingAndConvergence) {
    const auto l = critical_points(logarithmic_model(1.0, 2.0));
    EXPECT_LT(l.sigma_plus, l.beta_plus);
    double prev_s = 1e9, prev_b = 1e9;
    for (int n = 2; n <= 8; ++n) {
        const auto c = critical_points(taylor_model(n, 1.0, 2.0));
        EXPECT_LT(0.0, c.sigma_plus);
        EXPECT_LT(c.sigma_plus, c.beta_plus);
        EXPECT_DOUBLE_EQ(c.sigma_minus, -c.sigma_plus);
        EXPECT_DOUBLE_EQ(c.beta_minus, -c.beta_plus);
        // truncating the positive series of artanh lowers psi, so the roots
        // lie above the logarithmic ones and decrease towards them
        EXPECT_GT(c.sigma_plus, l.sigma_plus);
        EXPECT_GT(c.beta_plus, l.beta_plus);
        const double es = c.sigma_plus - l.sigma_plus, eb = c.beta_plus - l.beta_plus;
        EXPECT_LT(es, prev_s);
        EXPECT_LT(eb, prev_b);
        prev_s = es;
        prev_b = eb;
    }
}

TEST(EnergyModels, TanhProfileExamples) {
    const auto p = tanh_profile(1.0, 2.0, 1.0 / std::sqrt(2.0));
    EXPECT_NEAR(p.u_plus, std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(p.mu, 1.0, 1e-15);
    EXPECT_EQ(p(0.0), 0.0);
    EXPECT_NEAR(p.derivative(0.0), p.u_plus * p.mu, 1e-15);
    // the profile solves eps^2 u'' = psi_4(u)
    const double eps = 0.05;
    const auto q = tanh_profile(1.0, 2.0, eps);
    auto m = taylor_model(2, 1.0, 2.0);
    for (double x : {-0.03, 0.01, 0.05}) {
        const double h = 1e-4;
        const double upp = (q(x + h) - 2 * q(x) + q(x - h)) / (h * h);
        EXPECT_NEAR(eps * eps * upp, m.psi(q(x)), 1e-6);
    }
    EXPECT_THROW(tanh_profile(2.0, 1.0, 0.1), ParameterError);
    EXPECT_THROW(tanh_profile(1.0, 2.0, 0.0), ParameterError);
}

TEST(EnergyModels, InterfaceLength) {
    const double T = 1.0, Tc = 2.0;
    for (double eps : {0.01, 0.05, 0.2}) {
        const auto p = tanh_profile(T, Tc, eps);
        EXPECT_NEAR(interface_length(T, Tc, eps), 2.0 * p.u_plus / (p.u_plus * p.mu), 1e-14);
        EXPECT_NEAR(interface_length(T, Tc, eps) * std::sqrt(1.0 - T / Tc), lambda_param(Tc, eps), 1e-14);
        EXPECT_NEAR(interface_length(T, Tc, 2 * eps), 2 * interface_length(T, Tc, eps), 1e-14);
    }
    EXPECT_GT(interface_length(1.999999, 2.0, 0.1), 100.0);
    EXPECT_THROW(interface_length(2.0, 2.0, 0.1), ParameterError);
    EXPECT_THROW(lambda_param(2.0, -1.0), ParameterError);
}
