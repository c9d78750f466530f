#include "chfem/assembly.hpp"

#include "chfem/error.hpp"
#include "chfem/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace chfem {

namespace {

void check_inputs(const Mesh& mesh, const DofMap& dofs, const BasisTable& basis) {
    if (basis.degree() != dofs.degree) throw ParameterError("assembly: basis and DoF map degrees differ");
    if (basis.dim() != mesh.dim) throw ParameterError("assembly: basis and mesh dimensions differ");
    if (dofs.dofs_per_element != basis.n_basis()) throw ParameterError("assembly: local DoF count mismatch");
}

/// det J at quadrature point q of element e (1D: the half length).
double det_at(const Mesh& mesh, const BasisTable& basis, std::size_t e, std::size_t q, std::array<double, 4>& j) {
    j = mesh.jacobian(e, basis.qx(q), basis.qy(q));
    return mesh.dim == 1 ? j[0] : j[0] * j[3] - j[1] * j[2];
}

/// Physical gradients of all basis functions at (e, q): g[i*dim + d].
void physical_gradients(const Mesh& mesh, const BasisTable& basis, std::size_t e, std::size_t q,
                        std::vector<double>& g, double& det) {
    std::array<double, 4> j;
    det = det_at(mesh, basis, e, q, j);
    const std::size_t nb = basis.n_basis();
    if (mesh.dim == 1) {
        for (std::size_t i = 0; i < nb; ++i) g[i] = basis.dphi(q, i, 0) / det;
        return;
    }
    for (std::size_t i = 0; i < nb; ++i) {
        const double a = basis.dphi(q, i, 0), b = basis.dphi(q, i, 1);
        g[2 * i] = (j[3] * a - j[2] * b) / det;
        g[2 * i + 1] = (-j[1] * a + j[0] * b) / det;
    }
}

enum class Form { stiffness, mass, dx, dy };

SparseMatrix assemble_form(const Mesh& mesh, const DofMap& dofs, const BasisTable& basis, Form form) {
    check_inputs(mesh, dofs, basis);
    SparseMatrix mat = make_pattern(dofs);
    const std::size_t nb = basis.n_basis(), nq = basis.n_quad();
    const int dim = mesh.dim;
    std::vector<double> g(nb * dim), local(nb * nb);
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t q = 0; q < nq; ++q) {
            double det;
            physical_gradients(mesh, basis, e, q, g, det);
            if (det <= 0.0) throw GeometryError(e, "non-positive Jacobian at a quadrature point");
            const double jw = det * basis.weight(q);
            for (std::size_t i = 0; i < nb; ++i) {
                for (std::size_t jj = 0; jj < nb; ++jj) {
                    double v = 0.0;
                    switch (form) {
                    case Form::stiffness:
                        for (int d = 0; d < dim; ++d) v += g[i * dim + d] * g[jj * dim + d];
                        break;
                    case Form::mass: v = basis.phi(q, i) * basis.phi(q, jj); break;
                    case Form::dx: v = g[i * dim] * g[jj * dim]; break;
                    case Form::dy: v = dim > 1 ? g[i * dim + 1] * g[jj * dim + 1] : 0.0; break;
                    }
                    local[i * nb + jj] += jw * v;
                }
            }
        }
        const int* gd = dofs.element_dofs(e);
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t jj = 0; jj < nb; ++jj) mat.add(gd[i], gd[jj], local[i * nb + jj]);
    }
    return mat;
}

SparseMatrix lump(const SparseMatrix& m) {
    SparseMatrix l = m;
    const auto s = m.row_sums();
    std::fill(l.values().begin(), l.values().end(), 0.0);
    for (std::size_t r = 0; r < m.n_rows(); ++r) l.add(r, r, s[r]);
    return l;
}

/// u_h at every quadrature point of element e.
void values_at_quad(std::span<const double> u, const int* gd, const BasisTable& basis, std::vector<double>& uq) {
    const std::size_t nb = basis.n_basis(), nq = basis.n_quad();
    for (std::size_t q = 0; q < nq; ++q) {
        const auto row = basis.phi_row(q);
        double s = 0.0;
        for (std::size_t i = 0; i < nb; ++i) s += row[i] * u[gd[i]];
        uq[q] = s;
    }
}

[[noreturn]] void inadmissible(const EnergyModel& model, double v, std::size_t e) {
    throw DomainError("u_h = " + std::to_string(v) + " outside the admissible interval of " + model.name(),
                      static_cast<std::ptrdiff_t>(e));
}

} // namespace

SparseMatrix make_pattern(const DofMap& dofs) {
    const std::size_t n = dofs.n_dofs, nb = dofs.dofs_per_element;
    const std::size_t ne = nb ? dofs.element_to_global.size() / nb : 0;
    std::vector<std::vector<int>> rows(n);
    for (std::size_t e = 0; e < ne; ++e) {
        const int* gd = dofs.element_dofs(e);
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < nb; ++j) rows[gd[i]].push_back(gd[j]);
    }
    std::vector<std::size_t> rp(n + 1, 0);
    std::vector<int> col;
    for (std::size_t r = 0; r < n; ++r) {
        auto& c = rows[r];
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        col.insert(col.end(), c.begin(), c.end());
        rp[r + 1] = col.size();
        std::vector<int>().swap(c);
    }
    return SparseMatrix(n, n, std::move(rp), std::move(col));
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, const BasisTable& basis) {
    return assemble_form(mesh, dofs, basis, Form::stiffness);
}

SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs, const BasisTable& basis, bool lumped) {
    SparseMatrix m = assemble_form(mesh, dofs, basis, Form::mass);
    return lumped ? lump(m) : m;
}

SparseMatrix assemble_directional_stiffness(const Mesh& mesh, const DofMap& dofs, const BasisTable& basis, int dir) {
    if (dir != 0 && dir != 1) throw ParameterError("assemble_directional_stiffness: dir must be 0 or 1");
    return assemble_form(mesh, dofs, basis, dir == 0 ? Form::dx : Form::dy);
}

std::vector<double> assemble_nonlinear(std::span<const double> u, const EnergyModel& model, const Mesh& mesh,
                                       const DofMap& dofs, const BasisTable& basis) {
    check_inputs(mesh, dofs, basis);
    if (u.size() != dofs.n_dofs) throw ParameterError("assemble_nonlinear: vector length mismatch");
    const std::size_t nb = basis.n_basis(), nq = basis.n_quad();
    std::vector<double> out(dofs.n_dofs, 0.0), uq(nq);
    std::array<double, 4> j;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const int* gd = dofs.element_dofs(e);
        values_at_quad(u, gd, basis, uq);
        for (std::size_t q = 0; q < nq; ++q) {
            if (!model.admissible(uq[q])) inadmissible(model, uq[q], e);
            const double c = det_at(mesh, basis, e, q, j) * basis.weight(q) * model.psi(uq[q]);
            for (std::size_t i = 0; i < nb; ++i) out[gd[i]] += c * basis.phi(q, i);
        }
    }
    return out;
}

SparseMatrix assemble_jacobian_block(std::span<const double> u, const EnergyModel& model, const Mesh& mesh,
                                     const DofMap& dofs, const BasisTable& basis) {
    check_inputs(mesh, dofs, basis);
    if (u.size() != dofs.n_dofs) throw ParameterError("assemble_jacobian_block: vector length mismatch");
    SparseMatrix mat = make_pattern(dofs);
    const std::size_t nb = basis.n_basis(), nq = basis.n_quad();
    std::vector<double> uq(nq), local(nb * nb);
    std::array<double, 4> j;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const int* gd = dofs.element_dofs(e);
        values_at_quad(u, gd, basis, uq);
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t q = 0; q < nq; ++q) {
            if (!model.admissible(uq[q])) inadmissible(model, uq[q], e);
            const double c = det_at(mesh, basis, e, q, j) * basis.weight(q) * model.dpsi(uq[q]);
            for (std::size_t a = 0; a < nb; ++a) {
                const double ca = c * basis.phi(q, a);
                for (std::size_t b = 0; b < nb; ++b) local[a * nb + b] += ca * basis.phi(q, b);
            }
        }
        for (std::size_t a = 0; a < nb; ++a)
            for (std::size_t b = 0; b < nb; ++b) mat.add(gd[a], gd[b], local[a * nb + b]);
    }
    return mat;
}

Discretization::Discretization(Mesh mesh, const DiscretizationOptions& opt)
    : mesh_(std::move(mesh)), dofs_(build_dofmap(mesh_, opt.degree)),
      basis_(build_basis(opt.degree, mesh_.dim, opt.quad_order > 0 ? opt.quad_order : opt.degree + 2)),
      lumped_(opt.lumped), measure_(mesh_.measure()) {
    const std::size_t ne = mesh_.n_elements(), nq = basis_.n_quad(), nb = basis_.n_basis();
    jxw_.resize(ne * nq);
    std::array<double, 4> j;
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t q = 0; q < nq; ++q) {
            const double det = det_at(mesh_, basis_, e, q, j);
            if (det <= 0.0) throw GeometryError(e, "non-positive Jacobian at a quadrature point");
            jxw_[e * nq + q] = det * basis_.weight(q);
        }
    a_ = assemble_stiffness(mesh_, dofs_, basis_);
    m_ = assemble_mass(mesh_, dofs_, basis_, false);
    ml_ = lump(m_);
    ml_diag_ = m_.row_sums();
    if (a_.nnz() >= std::numeric_limits<std::uint32_t>::max())
        throw ParameterError("Discretization: matrix too large");
    scatter_.resize(ne * nb * nb);
    for (std::size_t e = 0; e < ne; ++e) {
        const int* gd = dofs_.element_dofs(e);
        for (std::size_t a = 0; a < nb; ++a)
            for (std::size_t b = 0; b < nb; ++b)
                scatter_[(e * nb + a) * nb + b] = static_cast<std::uint32_t>(a_.find(gd[a], gd[b]));
    }
}

std::vector<double> Discretization::nonlinear(std::span<const double> u, const EnergyModel& model) const {
    if (u.size() != n_dofs()) throw ParameterError("nonlinear: vector length mismatch");
    std::vector<double> out(n_dofs(), 0.0);
    if (lumped_) {
        for (std::size_t i = 0; i < n_dofs(); ++i) {
            if (!model.admissible(u[i]))
                throw DomainError("nodal value " + std::to_string(u[i]) + " at DoF " + std::to_string(i) +
                                  " outside the admissible interval of " + model.name());
            out[i] = ml_diag_[i] * model.psi(u[i]);
        }
        return out;
    }
    const std::size_t nb = basis_.n_basis(), nq = basis_.n_quad();
    std::vector<double> uq(nq);
    for (std::size_t e = 0; e < mesh_.n_elements(); ++e) {
        const int* gd = dofs_.element_dofs(e);
        values_at_quad(u, gd, basis_, uq);
        for (std::size_t q = 0; q < nq; ++q) {
            if (!model.admissible(uq[q])) inadmissible(model, uq[q], e);
            const double c = jxw_[e * nq + q] * model.psi(uq[q]);
            const auto row = basis_.phi_row(q);
            for (std::size_t i = 0; i < nb; ++i) out[gd[i]] += c * row[i];
        }
    }
    return out;
}

void Discretization::jacobian_block(std::span<const double> u, const EnergyModel& model, SparseMatrix& out) const {
    if (!out.same_pattern(a_)) out = a_;
    auto& val = out.values();
    std::fill(val.begin(), val.end(), 0.0);
    if (lumped_) {
        for (std::size_t i = 0; i < n_dofs(); ++i) {
            if (!model.admissible(u[i]))
                throw DomainError("nodal value " + std::to_string(u[i]) + " at DoF " + std::to_string(i) +
                                  " outside the admissible interval of " + model.name());
            out.add(i, i, ml_diag_[i] * model.dpsi(u[i]));
        }
        return;
    }
    const std::size_t nb = basis_.n_basis(), nq = basis_.n_quad();
    std::vector<double> uq(nq), local(nb * nb);
    for (std::size_t e = 0; e < mesh_.n_elements(); ++e) {
        const int* gd = dofs_.element_dofs(e);
        values_at_quad(u, gd, basis_, uq);
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t q = 0; q < nq; ++q) {
            if (!model.admissible(uq[q])) inadmissible(model, uq[q], e);
            const double c = jxw_[e * nq + q] * model.dpsi(uq[q]);
            const auto row = basis_.phi_row(q);
            for (std::size_t a = 0; a < nb; ++a) {
                const double ca = c * row[a];
                double* l = local.data() + a * nb;
                for (std::size_t b = 0; b < nb; ++b) l[b] += ca * row[b];
            }
        }
        const std::uint32_t* s = scatter_.data() + e * nb * nb;
        for (std::size_t k = 0; k < nb * nb; ++k) val[s[k]] += local[k];
    }
}

SparseMatrix Discretization::jacobian_block(std::span<const double> u, const EnergyModel& model) const {
    SparseMatrix out = a_;
    jacobian_block(u, model, out);
    return out;
}

double Discretization::energy(std::span<const double> u, const EnergyModel& model, double eps2) const {
    std::vector<double> au(n_dofs());
    a_.multiply(u, au);
    double e = 0.5 * eps2 * kernels::dot(u, au);
    if (lumped_) {
        for (std::size_t i = 0; i < n_dofs(); ++i) {
            if (!model.admissible(u[i]))
                throw DomainError("nodal value outside the admissible interval of " + model.name());
            e += ml_diag_[i] * model.f(u[i]);
        }
        return e;
    }
    const std::size_t nq = basis_.n_quad();
    std::vector<double> uq(nq);
    double bulk = 0.0;
    for (std::size_t el = 0; el < mesh_.n_elements(); ++el) {
        values_at_quad(u, dofs_.element_dofs(el), basis_, uq);
        for (std::size_t q = 0; q < nq; ++q) {
            if (!model.admissible(uq[q])) inadmissible(model, uq[q], el);
            bulk += jxw_[el * nq + q] * model.f(uq[q]);
        }
    }
    return e + bulk;
}

double Discretization::mass_of(std::span<const double> u) const {
    // 1^T M u = sum of row sums times u, for symmetric M
    return kernels::dot(ml_diag_, u);
}

std::vector<double> Discretization::interpolate(const std::function<double(double, double)>& g) const {
    std::vector<double> v(n_dofs());
    for (std::size_t i = 0; i < n_dofs(); ++i) v[i] = g(dofs_.dof_coords[i].x, dofs_.dof_coords[i].y);
    return v;
}

double Discretization::evaluate(std::span<const double> u, std::size_t e, double xi, double eta) const {
    std::vector<double> phi(basis_.n_basis());
    basis_.eval(xi, eta, phi);
    const int* gd = dofs_.element_dofs(e);
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += phi[i] * u[gd[i]];
    return s;
}

double Discretization::evaluate_dx(std::span<const double> u, std::size_t e, double xi) const {
    if (mesh_.dim != 1) throw ParameterError("evaluate_dx: 1D only");
    std::vector<double> d(basis_.n_basis());
    basis_.eval_grad(xi, 0.0, d);
    const int* gd = dofs_.element_dofs(e);
    const double jac = mesh_.jacobian(e, xi, 0.0)[0];
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * u[gd[i]];
    return s / jac;
}

} // namespace chfem
