#pragma once
// Lagrange nodal bases on [-1,1] and [-1,1]^2 with Gauss-Lobatto nodes,
// tabulated at Gauss-Legendre quadrature points.

#include <cstddef>
#include <span>
#include <vector>

namespace chfem {

inline constexpr int kMaxDegree = 10;

struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1,1], points ascending.
QuadratureRule gauss_legendre(int n);

/// The p+1 Gauss-Lobatto points on [-1,1] (endpoints and roots of P'_p), ascending.
std::vector<double> gauss_lobatto_nodes(int p);

/// Legendre polynomial P_n and its derivative at x.
struct LegendreValue {
    double p;
    double dp;
};
LegendreValue legendre(int n, double x);

/// One-dimensional Lagrange basis on a fixed node set, evaluated in
/// barycentric form.
class LagrangeBasis1D {
public:
    explicit LagrangeBasis1D(std::vector<double> nodes);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }

    /// values[j] = l_j(x)
    void values(double x, std::span<double> out) const;
    /// derivs[j] = l_j'(x)
    void derivatives(double x, std::span<double> out) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> diff_;  // diff_[i*n+j] = l_j'(x_i)
};

/// Basis values and reference gradients at the quadrature points.
///
/// Local numbering in 2D is tensorial: basis (ix, iy) has index iy*(p+1)+ix,
/// quadrature point (qx, qy) has index qy*nq+qx.
class BasisTable {
public:
    int degree() const { return degree_; }
    int dim() const { return dim_; }
    int quad_order() const { return quad_order_; }
    std::size_t n_basis() const { return n_basis_; }
    std::size_t n_quad() const { return n_quad_; }

    const LagrangeBasis1D& basis1d() const { return basis1d_; }
    const std::vector<double>& nodes1d() const { return basis1d_.nodes(); }
    const QuadratureRule& rule1d() const { return rule1d_; }

    /// Reference coordinates of quadrature point q (y = 0 in 1D).
    double qx(std::size_t q) const { return quad_xy_[2 * q]; }
    double qy(std::size_t q) const { return quad_xy_[2 * q + 1]; }
    double weight(std::size_t q) const { return quad_w_[q]; }

    double phi(std::size_t q, std::size_t i) const { return phi_[q * n_basis_ + i]; }
    /// d-th reference derivative of basis i at point q.
    double dphi(std::size_t q, std::size_t i, int d) const {
        return dphi_[(q * n_basis_ + i) * dim_ + d];
    }
    std::span<const double> phi_row(std::size_t q) const {
        return {phi_.data() + q * n_basis_, n_basis_};
    }

    /// Reference coordinates of local node i.
    double node_x(std::size_t i) const;
    double node_y(std::size_t i) const;

    /// Values / reference gradients of all local basis functions at an
    /// arbitrary reference point.
    void eval(double x, double y, std::span<double> values) const;
    void eval_grad(double x, double y, std::span<double> grad) const;  // grad[i*dim+d]

private:
    friend BasisTable build_basis(int degree, int dim, int quad_order);
    BasisTable(int degree, int dim, int quad_order);

    int degree_;
    int dim_;
    int quad_order_;
    std::size_t n_basis_;
    std::size_t n_quad_;
    LagrangeBasis1D basis1d_;
    QuadratureRule rule1d_;
    std::vector<double> quad_xy_;
    std::vector<double> quad_w_;
    std::vector<double> phi_;
    std::vector<double> dphi_;
};

/// quad_order is the number of Gauss points per direction (>= degree+1).
/// Throws ParameterError for degree outside [1,10], dim outside {1,2}.
BasisTable build_basis(int degree, int dim, int quad_order);

/// Default quadrature: degree+2 points per direction.
inline BasisTable build_basis(int degree, int dim) { return build_basis(degree, dim, degree + 2); }

/// Quadrature value of the integral of x^k over the reference element.
double integrate_poly(const BasisTable& table, int monomial_exponent);

} // namespace chfem
