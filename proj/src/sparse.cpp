#include "chfem/sparse.hpp"

#include "chfem/error.hpp"
#include "chfem/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace chfem {

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
                           std::vector<int> col)
    : n_rows_(n_rows), n_cols_(n_cols), row_ptr_(std::move(row_ptr)), col_(std::move(col)) {
    if (row_ptr_.size() != n_rows_ + 1 || row_ptr_.back() != col_.size())
        throw ParameterError("SparseMatrix: inconsistent row pointer");
    val_.assign(col_.size(), 0.0);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
    const std::size_t n = d.size();
    std::vector<std::size_t> rp(n + 1);
    std::vector<int> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        rp[i + 1] = i + 1;
        c[i] = static_cast<int>(i);
    }
    SparseMatrix m(n, n, std::move(rp), std::move(c));
    std::copy(d.begin(), d.end(), m.val_.begin());
    return m;
}

std::ptrdiff_t SparseMatrix::find(std::size_t r, std::size_t c) const {
    const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    const auto it = std::lower_bound(first, last, static_cast<int>(c));
    if (it == last || *it != static_cast<int>(c)) return -1;
    return it - col_.begin();
}

void SparseMatrix::add(std::size_t r, std::size_t c, double v) {
    const auto k = find(r, c);
    if (k < 0) throw ParameterError("SparseMatrix::add: entry outside pattern");
    val_[k] += v;
}

double SparseMatrix::coeff(std::size_t r, std::size_t c) const {
    const auto k = find(r, c);
    return k < 0 ? 0.0 : val_[k];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    kernels::active().csr_spmv(n_rows_, row_ptr_.data(), col_.data(), val_.data(), x.data(), y.data());
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
    std::vector<double> y(n_rows_);
    multiply(x, y);
    return y;
}

bool SparseMatrix::same_pattern(const SparseMatrix& o) const {
    return n_rows_ == o.n_rows_ && n_cols_ == o.n_cols_ && row_ptr_ == o.row_ptr_ && col_ == o.col_;
}

std::vector<double> SparseMatrix::row_sums() const {
    std::vector<double> s(n_rows_, 0.0);
    for (std::size_t r = 0; r < n_rows_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s[r] += val_[k];
    return s;
}

std::vector<double> SparseMatrix::diagonal_values() const {
    std::vector<double> d(n_rows_, 0.0);
    for (std::size_t r = 0; r < n_rows_; ++r) d[r] = coeff(r, r);
    return d;
}

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : val_) m = std::max(m, std::abs(v));
    return m;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows_), static_cast<Eigen::Index>(n_cols_));
    for (std::size_t r = 0; r < n_rows_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, col_[k]) += val_[k];
    return d;
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(col_.size());
    for (std::size_t r = 0; r < n_rows_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            t.emplace_back(static_cast<int>(r), col_[k], val_[k]);
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(n_rows_), static_cast<Eigen::Index>(n_cols_));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseMatrix linear_combination(double a, const SparseMatrix& x, double b, const SparseMatrix& y) {
    if (!x.same_pattern(y)) throw ParameterError("linear_combination: patterns differ");
    SparseMatrix r = x;
    auto& v = r.values();
    const auto& yv = y.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = a * v[k] + b * yv[k];
    return r;
}

SparseMatrix block_2x2(const SparseMatrix& b11, const SparseMatrix& b12, const SparseMatrix& b21,
                       const SparseMatrix& b22) {
    const std::size_t n = b11.n_rows();
    for (const SparseMatrix* b : {&b11, &b12, &b21, &b22})
        if (b->n_rows() != n || b->n_cols() != n) throw ParameterError("block_2x2: block size mismatch");
    std::vector<std::size_t> rp(2 * n + 1, 0);
    std::vector<int> col;
    std::vector<double> val;
    col.reserve(b11.nnz() + b12.nnz() + b21.nnz() + b22.nnz());
    val.reserve(col.capacity());
    auto append = [&](const SparseMatrix& m, std::size_t r, int offset) {
        for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k) {
            col.push_back(m.col()[k] + offset);
            val.push_back(m.values()[k]);
        }
    };
    for (std::size_t r = 0; r < n; ++r) {
        append(b11, r, 0);
        append(b12, r, static_cast<int>(n));
        rp[r + 1] = col.size();
    }
    for (std::size_t r = 0; r < n; ++r) {
        append(b21, r, 0);
        append(b22, r, static_cast<int>(n));
        rp[n + r + 1] = col.size();
    }
    SparseMatrix m(2 * n, 2 * n, std::move(rp), std::move(col));
    m.values() = std::move(val);
    return m;
}

} // namespace chfem
