#pragma once
// Vector kernels used by the sparse solvers.
//
// Every kernel has a scalar reference implementation. Wider variants (AVX2+FMA
// on x86-64, NEON on aarch64) are picked at runtime from the CPU features; the
// CHFEM_SIMD environment variable (scalar | avx2 | neon | auto) overrides the
// choice. Results of the wide variants differ from the scalar ones only by
// floating-point reassociation; for a fixed variant they are deterministic.

#include <cstddef>
#include <span>
#include <string_view>

namespace chfem::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
    Isa isa;
    double (*dot)(const double* x, const double* y, std::size_t n);
    /// y += a*x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    /// y = a*x + b*y
    void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
    /// y = A*x for A in CSR form.
    void (*csr_spmv)(std::size_t rows, const std::size_t* row_ptr, const int* col,
                     const double* val, const double* x, double* y);
};

std::string_view isa_name(Isa isa);

/// True when the variant is compiled in and supported by this CPU.
bool available(Isa isa);

/// Table for a specific variant; throws ParameterError if unavailable.
const KernelTable& table(Isa isa);

/// Table selected for this process.
const KernelTable& active();

namespace detail {
const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif
} // namespace detail

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), x.size());
}

inline void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
    active().axpby(a, x.data(), b, y.data(), x.size());
}

} // namespace chfem::kernels
