#pragma once
// Krylov solvers, the Newton block operator, a small dense LU and
// least-squares regressions.

#include "chfem/sparse.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace chfem {

class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual std::size_t size() const = 0;
    /// y = Op x
    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
};

/// Wraps a square SparseMatrix.
class MatrixOperator final : public LinearOperator {
public:
    explicit MatrixOperator(const SparseMatrix& m) : m_(m) {}
    std::size_t size() const override { return m_.n_rows(); }
    void apply(std::span<const double> x, std::span<double> y) const override { m_.multiply(x, y); }

private:
    const SparseMatrix& m_;
};

/// The Newton matrix [[tau*A, M], [M, -eps2*A - J]] acting on stacked (w, u).
/// A, M and J must share one sparsity pattern.
class BlockOperator final : public LinearOperator {
public:
    BlockOperator(const SparseMatrix& a, const SparseMatrix& m, const SparseMatrix& jpsi, double tau, double eps2);

    std::size_t size() const override { return 2 * n_; }
    void apply(std::span<const double> x, std::span<double> y) const override;

    /// The same matrix assembled explicitly (2n x 2n).
    SparseMatrix assemble() const;

    double tau() const { return tau_; }
    double eps2() const { return eps2_; }

private:
    std::size_t n_;
    double tau_;
    double eps2_;
    SparseMatrix tau_a_;
    const SparseMatrix& m_;
    SparseMatrix lower_right_;
};

/// Preconditioner: z = P^{-1} r.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual void solve(std::span<const double> r, std::span<double> z) const = 0;
};

/// Sparse LU of an explicitly assembled matrix (Eigen::SparseLU). The symbolic
/// analysis is kept across refactorizations of the same pattern.
class SparseLUPreconditioner final : public Preconditioner {
public:
    SparseLUPreconditioner();
    ~SparseLUPreconditioner() override;
    SparseLUPreconditioner(SparseLUPreconditioner&&) noexcept;
    SparseLUPreconditioner& operator=(SparseLUPreconditioner&&) noexcept;

    /// Throws NumericError if the matrix is singular.
    void factorize(const SparseMatrix& m);
    bool ready() const;
    void solve(std::span<const double> r, std::span<double> z) const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Diagonal scaling by the inverse of a positive vector.
class DiagonalPreconditioner final : public Preconditioner {
public:
    explicit DiagonalPreconditioner(std::vector<double> d);
    void solve(std::span<const double> r, std::span<double> z) const override;

private:
    std::vector<double> inv_;
};

struct KrylovResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Right-preconditioned BiCGStab. Stops when ||b - Op x|| <= tol*||b||
/// (true residual). Throws KrylovError on breakdown or when max_iter is
/// reached; the error carries the best iterate.
KrylovResult bicgstab(const LinearOperator& op, std::span<const double> rhs, double tol, int max_iter,
                      const Preconditioner* precond = nullptr, std::span<const double> x0 = {});

/// Classical preconditioned biconjugate gradients. The shadow recursion uses
/// op_t / precond_t; when null the operator (and preconditioner) are taken
/// to be symmetric.
KrylovResult bicg(const LinearOperator& op, std::span<const double> rhs, double tol, int max_iter,
                  const Preconditioner* precond = nullptr, const LinearOperator* op_t = nullptr,
                  const Preconditioner* precond_t = nullptr, std::span<const double> x0 = {});

/// Dense solve by LU with partial pivoting; a is row-major n x n.
/// Throws NumericError if singular.
std::vector<double> dense_lu_solve(std::vector<double> a, std::vector<double> b);

struct Regression {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y = slope*x + intercept.
Regression linear_regression(std::span<const double> xs, std::span<const double> ys);

/// Least squares on (log10 x, log10 y). Throws FitError on non-positive
/// inputs, fewer than two points or no spread in x.
Regression linear_regression_loglog(std::span<const double> xs, std::span<const double> ys);

double norm2(std::span<const double> x);

} // namespace chfem
