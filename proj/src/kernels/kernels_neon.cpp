#include "chfem/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace chfem::kernels::detail {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_neon(double a, const double* x, double b, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    const float64x2_t vb = vdupq_n_f64(b);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vmulq_f64(vb, vld1q_f64(y + i)), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void csr_spmv_neon(std::size_t rows, const std::size_t* row_ptr, const int* col,
                   const double* val, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t k = row_ptr[r];
        const std::size_t end = row_ptr[r + 1];
        float64x2_t acc = vdupq_n_f64(0.0);
        for (; k + 2 <= end; k += 2) {
            const double g[2] = {x[col[k]], x[col[k + 1]]};
            acc = vfmaq_f64(acc, vld1q_f64(val + k), vld1q_f64(g));
        }
        double s = vaddvq_f64(acc);
        for (; k < end; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }
}

} // namespace

const KernelTable& neon_table() {
    static const KernelTable t{Isa::neon, dot_neon, axpy_neon, axpby_neon, csr_spmv_neon};
    return t;
}

} // namespace chfem::kernels::detail
#endif
