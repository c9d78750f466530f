#include "chfem/ref_element.hpp"

#include "chfem/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace chfem {

LegendreValue legendre(int n, double x) {
    if (n == 0) return {1.0, 0.0};
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    // P_n' from the three-term identity; at the endpoints use n(n+1)/2 * (+-1)^(n-1).
    double dp;
    if (std::abs(1.0 - x * x) < 1e-300)
        dp = (x > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0)) * 0.5 * n * (n + 1.0);
    else
        dp = n * (p0 - x * p1) / (1.0 - x * x);
    return {p1, dp};
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw ParameterError("gauss_legendre: need at least one point");
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(n, x).dp;
        rule.points[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // symmetrize to remove the last ulp of asymmetry
    for (int i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (rule.points[n - 1 - i] - rule.points[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
        rule.points[i] = -x;
        rule.points[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.points[n / 2] = 0.0;
    return rule;
}

std::vector<double> gauss_lobatto_nodes(int p) {
    if (p < 1) throw ParameterError("gauss_lobatto_nodes: degree must be >= 1");
    std::vector<double> x(p + 1);
    x[0] = -1.0;
    x[p] = 1.0;
    // Newton on q(x) = (1-x^2) P_p'(x), whose derivative is -p(p+1) P_p(x).
    for (int i = 1; i < p; ++i) {
        double xi = -std::cos(std::numbers::pi * i / p);
        for (int it = 0; it < 100; ++it) {
            const auto [pp, dp] = legendre(p, xi);
            const double q = (1.0 - xi * xi) * dp;
            const double dq = -p * (p + 1.0) * pp;
            const double dx = q / dq;
            xi -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        x[i] = xi;
    }
    for (int i = 0; i <= p / 2; ++i) {
        const double s = 0.5 * (x[p - i] - x[i]);
        x[i] = -s;
        x[p - i] = s;
    }
    if (p % 2 == 0) x[p / 2] = 0.0;
    return x;
}

LagrangeBasis1D::LagrangeBasis1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    const std::size_t n = nodes_.size();
    weights_.assign(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) weights_[j] /= (nodes_[j] - nodes_[k]);
    diff_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double diag = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = (weights_[j] / weights_[i]) / (nodes_[i] - nodes_[j]);
            diff_[i * n + j] = d;
            diag -= d;
        }
        diff_[i * n + i] = diag;
    }
}

void LagrangeBasis1D::values(double x, std::span<double> out) const {
    const std::size_t n = nodes_.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (x == nodes_[j]) {
            std::fill(out.begin(), out.begin() + n, 0.0);
            out[j] = 1.0;
            return;
        }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = weights_[j] / (x - nodes_[j]);
        sum += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= sum;
}

void LagrangeBasis1D::derivatives(double x, std::span<double> out) const {
    // l_j' has degree n-2 and is reproduced by interpolating its nodal values.
    const std::size_t n = nodes_.size();
    std::vector<double> l(n);
    values(x, l);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += diff_[i * n + j] * l[i];
        out[j] = s;
    }
}

BasisTable::BasisTable(int degree, int dim, int quad_order)
    : degree_(degree), dim_(dim), quad_order_(quad_order),
      basis1d_(gauss_lobatto_nodes(degree)), rule1d_(gauss_legendre(quad_order)) {
    const std::size_t nb1 = degree + 1;
    const std::size_t nq1 = quad_order;
    n_basis_ = dim == 1 ? nb1 : nb1 * nb1;
    n_quad_ = dim == 1 ? nq1 : nq1 * nq1;

    std::vector<double> v1(nq1 * nb1), d1(nq1 * nb1);
    for (std::size_t q = 0; q < nq1; ++q) {
        basis1d_.values(rule1d_.points[q], std::span<double>(v1.data() + q * nb1, nb1));
        basis1d_.derivatives(rule1d_.points[q], std::span<double>(d1.data() + q * nb1, nb1));
    }

    quad_xy_.resize(2 * n_quad_);
    quad_w_.resize(n_quad_);
    phi_.resize(n_quad_ * n_basis_);
    dphi_.resize(n_quad_ * n_basis_ * dim_);
    if (dim == 1) {
        for (std::size_t q = 0; q < nq1; ++q) {
            quad_xy_[2 * q] = rule1d_.points[q];
            quad_xy_[2 * q + 1] = 0.0;
            quad_w_[q] = rule1d_.weights[q];
            for (std::size_t i = 0; i < nb1; ++i) {
                phi_[q * n_basis_ + i] = v1[q * nb1 + i];
                dphi_[q * n_basis_ + i] = d1[q * nb1 + i];
            }
        }
        return;
    }
    for (std::size_t qy = 0; qy < nq1; ++qy) {
        for (std::size_t qx = 0; qx < nq1; ++qx) {
            const std::size_t q = qy * nq1 + qx;
            quad_xy_[2 * q] = rule1d_.points[qx];
            quad_xy_[2 * q + 1] = rule1d_.points[qy];
            quad_w_[q] = rule1d_.weights[qx] * rule1d_.weights[qy];
            for (std::size_t iy = 0; iy < nb1; ++iy) {
                for (std::size_t ix = 0; ix < nb1; ++ix) {
                    const std::size_t i = iy * nb1 + ix;
                    const double vx = v1[qx * nb1 + ix], vy = v1[qy * nb1 + iy];
                    phi_[q * n_basis_ + i] = vx * vy;
                    dphi_[(q * n_basis_ + i) * 2 + 0] = d1[qx * nb1 + ix] * vy;
                    dphi_[(q * n_basis_ + i) * 2 + 1] = vx * d1[qy * nb1 + iy];
                }
            }
        }
    }
}

double BasisTable::node_x(std::size_t i) const {
    const std::size_t nb1 = degree_ + 1;
    return nodes1d()[dim_ == 1 ? i : i % nb1];
}

double BasisTable::node_y(std::size_t i) const {
    const std::size_t nb1 = degree_ + 1;
    return dim_ == 1 ? 0.0 : nodes1d()[i / nb1];
}

void BasisTable::eval(double x, double y, std::span<double> values) const {
    const std::size_t nb1 = degree_ + 1;
    if (dim_ == 1) {
        basis1d_.values(x, values);
        return;
    }
    std::vector<double> vx(nb1), vy(nb1);
    basis1d_.values(x, vx);
    basis1d_.values(y, vy);
    for (std::size_t iy = 0; iy < nb1; ++iy)
        for (std::size_t ix = 0; ix < nb1; ++ix) values[iy * nb1 + ix] = vx[ix] * vy[iy];
}

void BasisTable::eval_grad(double x, double y, std::span<double> grad) const {
    const std::size_t nb1 = degree_ + 1;
    if (dim_ == 1) {
        basis1d_.derivatives(x, grad);
        return;
    }
    std::vector<double> vx(nb1), vy(nb1), dx(nb1), dy(nb1);
    basis1d_.values(x, vx);
    basis1d_.values(y, vy);
    basis1d_.derivatives(x, dx);
    basis1d_.derivatives(y, dy);
    for (std::size_t iy = 0; iy < nb1; ++iy) {
        for (std::size_t ix = 0; ix < nb1; ++ix) {
            const std::size_t i = iy * nb1 + ix;
            grad[2 * i] = dx[ix] * vy[iy];
            grad[2 * i + 1] = vx[ix] * dy[iy];
        }
    }
}

BasisTable build_basis(int degree, int dim, int quad_order) {
    if (degree < 1 || degree > kMaxDegree)
        throw ParameterError("build_basis: degree " + std::to_string(degree) + " outside [1,10]");
    if (dim != 1 && dim != 2)
        throw ParameterError("build_basis: dim " + std::to_string(dim) + " not in {1,2}");
    if (quad_order < degree + 1)
        throw ParameterError("build_basis: quad_order must be >= degree+1");
    return BasisTable(degree, dim, quad_order);
}

double integrate_poly(const BasisTable& table, int k) {
    if (k < 0) throw ParameterError("integrate_poly: exponent must be >= 0");
    double s = 0.0;
    for (std::size_t q = 0; q < table.n_quad(); ++q) s += table.weight(q) * std::pow(table.qx(q), k);
    return s;
}

} // namespace chfem
