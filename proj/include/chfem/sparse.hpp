#pragma once
// Compressed-row sparse matrices with sorted column indices.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <span>
#include <vector>

namespace chfem {

class SparseMatrix {
public:
    SparseMatrix() = default;
    /// Empty matrix with the given sparsity pattern (values zero).
    /// row_ptr has n_rows+1 entries; columns sorted within each row.
    SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
                 std::vector<int> col);

    static SparseMatrix diagonal(std::span<const double> d);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }
    std::size_t nnz() const { return col_.size(); }

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col() const { return col_; }
    const std::vector<double>& values() const { return val_; }
    std::vector<double>& values() { return val_; }

    /// Position of (r, c) in the value array, or -1 if outside the pattern.
    std::ptrdiff_t find(std::size_t r, std::size_t c) const;
    /// Adds v at (r, c); the entry must be in the pattern.
    void add(std::size_t r, std::size_t c, double v);
    double coeff(std::size_t r, std::size_t c) const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> operator*(std::span<const double> x) const;

    bool same_pattern(const SparseMatrix& o) const;
    std::vector<double> row_sums() const;
    std::vector<double> diagonal_values() const;
    double max_abs() const;

    Eigen::MatrixXd to_dense() const;
    Eigen::SparseMatrix<double> to_eigen() const;

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> col_;
    std::vector<double> val_;
};

/// a*X + b*Y for X, Y with identical pattern.
SparseMatrix linear_combination(double a, const SparseMatrix& x, double b, const SparseMatrix& y);

/// Assembles [[B11, B12], [B21, B22]] into one matrix. All blocks square of
/// the same size.
SparseMatrix block_2x2(const SparseMatrix& b11, const SparseMatrix& b12, const SparseMatrix& b21,
                       const SparseMatrix& b22);

} // namespace chfem
