#pragma once
// Mass/stiffness matrices, the nonlinear vector int psi(u_h) phi_i and its
// Jacobian, assembled element by element in a fixed order.

#include "chfem/energy_models.hpp"
#include "chfem/mesh.hpp"
#include "chfem/ref_element.hpp"
#include "chfem/sparse.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace chfem {

/// Matrix with the continuous-Galerkin coupling pattern of dofs (values zero).
SparseMatrix make_pattern(const DofMap& dofs);

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, const BasisTable& basis);
/// Consistent mass, or its row-sum lumped diagonal (stored in the full pattern).
SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs, const BasisTable& basis, bool lumped);
/// int d_dir(phi_i) d_dir(phi_j), dir = 0 (x) or 1 (y).
SparseMatrix assemble_directional_stiffness(const Mesh& mesh, const DofMap& dofs, const BasisTable& basis, int dir);
/// Entries int psi(u_h) phi_i by quadrature. Throws DomainError naming the
/// element when u_h leaves the admissible interval at a quadrature point.
std::vector<double> assemble_nonlinear(std::span<const double> u, const EnergyModel& model, const Mesh& mesh,
                                       const DofMap& dofs, const BasisTable& basis);
/// Entries int psi'(u_h) phi_i phi_j.
SparseMatrix assemble_jacobian_block(std::span<const double> u, const EnergyModel& model, const Mesh& mesh,
                                     const DofMap& dofs, const BasisTable& basis);

struct DiscretizationOptions {
    int degree = 1;
    int quad_order = 0;  ///< points per direction; 0 means degree+2
    bool lumped = false;
};

/// Mesh, DoF map, basis and the constant operators, with cached element
/// geometry. With lumping, the nonlinear terms are evaluated by nodal
/// collocation against the lumped mass so energy, residual and Jacobian stay
/// consistent.
class Discretization {
public:
    Discretization(Mesh mesh, const DiscretizationOptions& opt);

    const Mesh& mesh() const { return mesh_; }
    const DofMap& dofs() const { return dofs_; }
    const BasisTable& basis() const { return basis_; }
    int dim() const { return mesh_.dim; }
    int degree() const { return dofs_.degree; }
    std::size_t n_dofs() const { return dofs_.n_dofs; }
    bool lumped() const { return lumped_; }
    double measure() const { return measure_; }

    const SparseMatrix& stiffness() const { return a_; }
    /// Mass matrix used by the scheme (lumped or consistent).
    const SparseMatrix& mass() const { return lumped_ ? ml_ : m_; }
    const SparseMatrix& consistent_mass() const { return m_; }
    const std::vector<double>& lumped_diagonal() const { return ml_diag_; }

    std::vector<double> nonlinear(std::span<const double> u, const EnergyModel& model) const;
    /// Writes the Jacobian block into out (which must carry the pattern).
    void jacobian_block(std::span<const double> u, const EnergyModel& model, SparseMatrix& out) const;
    SparseMatrix jacobian_block(std::span<const double> u, const EnergyModel& model) const;

    /// int f(u_h) + eps2/2 |grad u_h|^2, with the same quadrature as the residual.
    double energy(std::span<const double> u, const EnergyModel& model, double eps2) const;
    /// 1^T M u
    double mass_of(std::span<const double> u) const;

    std::vector<double> interpolate(const std::function<double(double, double)>& g) const;
    /// u_h at reference point (xi, eta) of element e.
    double evaluate(std::span<const double> u, std::size_t e, double xi, double eta) const;
    /// d u_h / dx at reference point of a 1D element.
    double evaluate_dx(std::span<const double> u, std::size_t e, double xi) const;

    /// |det J| * weight for quadrature point q of element e.
    double jxw(std::size_t e, std::size_t q) const { return jxw_[e * basis_.n_quad() + q]; }

private:
    Mesh mesh_;
    DofMap dofs_;
    BasisTable basis_;
    bool lumped_;
    double measure_;
    std::vector<double> jxw_;
    std::vector<std::uint32_t> scatter_;  // value position of (e, i, j)
    SparseMatrix a_;
    SparseMatrix m_;
    SparseMatrix ml_;
    std::vector<double> ml_diag_;
};

} // namespace chfem
