#include "chfem/linalg.hpp"

#include "chfem/error.hpp"
#include "chfem/kernels.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace chfem {

double norm2(std::span<const double> x) { return std::sqrt(kernels::dot(x, x)); }

BlockOperator::BlockOperator(const SparseMatrix& a, const SparseMatrix& m, const SparseMatrix& jpsi, double tau,
                             double eps2)
    : n_(a.n_rows()), tau_(tau), eps2_(eps2), tau_a_(linear_combination(tau, a, 0.0, a)), m_(m),
      lower_right_(linear_combination(-eps2, a, -1.0, jpsi)) {
    if (!a.same_pattern(m)) throw ParameterError("BlockOperator: A and M patterns differ");
}

void BlockOperator::apply(std::span<const double> x, std::span<double> y) const {
    const auto w = x.subspan(0, n_);
    const auto u = x.subspan(n_, n_);
    auto y1 = y.subspan(0, n_);
    auto y2 = y.subspan(n_, n_);
    std::vector<double> tmp(n_);
    tau_a_.multiply(w, y1);
    m_.multiply(u, tmp);
    kernels::axpy(1.0, tmp, y1);
    m_.multiply(w, y2);
    lower_right_.multiply(u, tmp);
    kernels::axpy(1.0, tmp, y2);
}

SparseMatrix BlockOperator::assemble() const { return block_2x2(tau_a_, m_, m_, lower_right_); }

struct SparseLUPreconditioner::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    std::vector<std::size_t> row_ptr;
    std::vector<int> col;
    bool analyzed = false;
    bool factored = false;
};

SparseLUPreconditioner::SparseLUPreconditioner() : impl_(std::make_unique<Impl>()) {}
SparseLUPreconditioner::~SparseLUPreconditioner() = default;
SparseLUPreconditioner::SparseLUPreconditioner(SparseLUPreconditioner&&) noexcept = default;
SparseLUPreconditioner& SparseLUPreconditioner::operator=(SparseLUPreconditioner&&) noexcept = default;

void SparseLUPreconditioner::factorize(const SparseMatrix& m) {
    Eigen::SparseMatrix<double> e = m.to_eigen();
    e.makeCompressed();
    if (!impl_->analyzed || impl_->row_ptr != m.row_ptr() || impl_->col != m.col()) {
        impl_->lu.analyzePattern(e);
        impl_->row_ptr = m.row_ptr();
        impl_->col = m.col();
        impl_->analyzed = true;
    }
    impl_->lu.factorize(e);
    impl_->factored = impl_->lu.info() == Eigen::Success;
    if (!impl_->factored) throw NumericError("sparse LU factorization failed: " + impl_->lu.lastErrorMessage());
}

bool SparseLUPreconditioner::ready() const { return impl_->factored; }

void SparseLUPreconditioner::solve(std::span<const double> r, std::span<double> z) const {
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
    zv = impl_->lu.solve(rv);
}

DiagonalPreconditioner::DiagonalPreconditioner(std::vector<double> d) : inv_(std::move(d)) {
    for (double& v : inv_) {
        if (!(v > 0.0)) throw ParameterError("DiagonalPreconditioner: entries must be positive");
        v = 1.0 / v;
    }
}

void DiagonalPreconditioner::solve(std::span<const double> r, std::span<double> z) const {
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_[i] * r[i];
}

namespace {

void apply_precond(const Preconditioner* p, std::span<const double> r, std::span<double> z) {
    if (p)
        p->solve(r, z);
    else
        std::copy(r.begin(), r.end(), z.begin());
}

double true_residual(const LinearOperator& op, std::span<const double> b, std::span<const double> x,
                     std::vector<double>& r) {
    op.apply(x, r);
    kernels::axpby(1.0, b, -1.0, r);
    return norm2(r);
}

} // namespace

KrylovResult bicgstab(const LinearOperator& op, std::span<const double> rhs, double tol, int max_iter,
                      const Preconditioner* precond, std::span<const double> x0) {
    const std::size_t n = op.size();
    if (rhs.size() != n) throw ParameterError("bicgstab: rhs size mismatch");
    if (!(tol > 0.0)) throw ParameterError("bicgstab: tol must be positive");
    KrylovResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());
    const double bnorm = norm2(rhs);
    if (bnorm == 0.0) {
        std::fill(res.x.begin(), res.x.end(), 0.0);
        return res;
    }
    const double target = tol * bnorm;

    std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), phat(n), s(n), shat(n), t(n);
    std::vector<double> best = res.x;
    double rnorm = true_residual(op, rhs, res.x, r);
    double best_norm = rnorm;
    if (rnorm <= target) {
        res.relative_residual = rnorm / bnorm;
        return res;
    }
    int it = 0;
    int restarts = 0;
    while (it < max_iter) {
        // (re)start the recursion from the true residual
        rhat = r;
        double rho = 1.0, alpha = 1.0, omega = 1.0;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        bool breakdown = false;
        while (it < max_iter) {
            ++it;
            const double rho_new = kernels::dot(rhat, r);
            if (std::abs(rho_new) < 1e-300 || omega == 0.0) {
                breakdown = true;
                break;
            }
            const double beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            // p = r + beta*(p - omega*v)
            kernels::axpy(-omega, v, p);
            kernels::axpby(1.0, r, beta, p);
            apply_precond(precond, p, phat);
            op.apply(phat, v);
            const double rv = kernels::dot(rhat, v);
            if (std::abs(rv) < 1e-300) {
                breakdown = true;
                break;
            }
            alpha = rho / rv;
            s = r;
            kernels::axpy(-alpha, v, s);
            const double snorm = norm2(s);
            if (snorm <= target) {
                kernels::axpy(alpha, phat, res.x);
                rnorm = snorm;
                break;
            }
            apply_precond(precond, s, shat);
            op.apply(shat, t);
            const double tt = kernels::dot(t, t);
            omega = tt > 0.0 ? kernels::dot(t, s) / tt : 0.0;
            kernels::axpy(alpha, phat, res.x);
            kernels::axpy(omega, shat, res.x);
            r = s;
            kernels::axpy(-omega, t, r);
            rnorm = norm2(r);
            if (rnorm < best_norm) {
                best_norm = rnorm;
                best = res.x;
            }
            if (rnorm <= target) break;
            if (!std::isfinite(rnorm)) {
                breakdown = true;
                break;
            }
        }
        const double tr = true_residual(op, rhs, res.x, r);
        if (std::isfinite(tr) && tr < best_norm) {
            best_norm = tr;
            best = res.x;
        }
        if (tr <= target) {
            res.iterations = it;
            res.relative_residual = tr / bnorm;
            return res;
        }
        if (!std::isfinite(tr)) break;
        if (breakdown && ++restarts > 5) break;
        if (!breakdown && ++restarts > 20) break;
    }
    throw KrylovError("bicgstab: no convergence after " + std::to_string(it) + " iterations (relative residual " +
                          std::to_string(best_norm / bnorm) + ")",
                      std::move(best), it);
}

KrylovResult bicg(const LinearOperator& op, std::span<const double> rhs, double tol, int max_iter,
                  const Preconditioner* precond, const LinearOperator* op_t, const Preconditioner* precond_t,
                  std::span<const double> x0) {
    const std::size_t n = op.size();
    if (rhs.size() != n) throw ParameterError("bicg: rhs size mismatch");
    if (!(tol > 0.0)) throw ParameterError("bicg: tol must be positive");
    if (!op_t) op_t = &op;
    if (!precond_t) precond_t = precond;
    KrylovResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());
    const double bnorm = norm2(rhs);
    if (bnorm == 0.0) {
        std::fill(res.x.begin(), res.x.end(), 0.0);
        return res;
    }
    const double target = tol * bnorm;
    std::vector<double> r(n), rt(n), z(n), zt(n), p(n), pt(n), q(n), qt(n);
    double rnorm = true_residual(op, rhs, res.x, r);
    std::vector<double> best = res.x;
    double best_norm = rnorm;
    if (rnorm <= target) {
        res.relative_residual = rnorm / bnorm;
        return res;
    }
    rt = r;
    apply_precond(precond, r, z);
    apply_precond(precond_t, rt, zt);
    p = z;
    pt = zt;
    double rho = kernels::dot(z, rt);
    int it = 0;
    while (it < max_iter) {
        ++it;
        op.apply(p, q);
        op_t->apply(pt, qt);
        const double pq = kernels::dot(pt, q);
        if (std::abs(pq) < 1e-300 || std::abs(rho) < 1e-300) break;
        const double alpha = rho / pq;
        kernels::axpy(alpha, p, res.x);
        kernels::axpy(-alpha, q, r);
        kernels::axpy(-alpha, qt, rt);
        rnorm = norm2(r);
        if (rnorm < best_norm) {
            best_norm = rnorm;
            best = res.x;
        }
        if (rnorm <= target) {
            const double tr = true_residual(op, rhs, res.x, r);
            if (tr <= target) {
                res.iterations = it;
                res.relative_residual = tr / bnorm;
                return res;
            }
        }
        if (!std::isfinite(rnorm)) break;
        apply_precond(precond, r, z);
        apply_precond(precond_t, rt, zt);
        const double rho_new = kernels::dot(z, rt);
        const double beta = rho_new / rho;
        rho = rho_new;
        kernels::axpby(1.0, z, beta, p);
        kernels::axpby(1.0, zt, beta, pt);
    }
    throw KrylovError("bicg: no convergence after " + std::to_string(it) + " iterations (relative residual " +
                          std::to_string(best_norm / bnorm) + ")",
                      std::move(best), it);
}

std::vector<double> dense_lu_solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw ParameterError("dense_lu_solve: size mismatch");
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (std::abs(a[piv * n + k]) <= 1e-14 * scale || scale == 0.0)
            throw NumericError("dense_lu_solve: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = a[i * n + k] / a[k * n + k];
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= l * a[k * n + j];
            b[i] -= l * b[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= a[k * n + j] * b[j];
        b[k] = s / a[k * n + k];
    }
    return b;
}

Regression linear_regression(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n != ys.size()) throw FitError("linear_regression: length mismatch");
    if (n < 2) throw FitError("linear_regression: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    double span = 0.0;
    for (std::size_t i = 0; i < n; ++i) span = std::max(span, std::abs(xs[i] - mx));
    if (sxx <= 1e-24 * std::max(1.0, mx * mx) || span == 0.0) throw FitError("linear_regression: no spread in x");
    Regression r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return r;
}

Regression linear_regression_loglog(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw FitError("linear_regression_loglog: length mismatch");
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw FitError("linear_regression_loglog: inputs must be positive");
        lx[i] = std::log10(xs[i]);
        ly[i] = std::log10(ys[i]);
    }
    return linear_regression(lx, ly);
}

} // namespace chfem
