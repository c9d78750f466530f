#include "chfem/kernels.hpp"

namespace chfem::kernels::detail {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void csr_spmv_scalar(std::size_t rows, const std::size_t* row_ptr, const int* col,
                     const double* val, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{Isa::scalar, dot_scalar, axpy_scalar, axpby_scalar, csr_spmv_scalar};
    return t;
}

} // namespace chfem::kernels::detail
