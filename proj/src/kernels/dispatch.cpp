#include "chfem/error.hpp"
#include "chfem/kernels.hpp"

#include <cstdlib>
#include <string>

namespace chfem::kernels {

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "unknown";
}

bool available(Isa isa) {
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
        return true;
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!available(isa))
        throw ParameterError("SIMD variant '" + std::string(isa_name(isa)) + "' is not available");
    switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2: return detail::avx2_table();
#endif
#if defined(__aarch64__)
    case Isa::neon: return detail::neon_table();
#endif
    default: return detail::scalar_table();
    }
}

namespace {

const KernelTable& select_from_environment() {
    const char* env = std::getenv("CHFEM_SIMD");
    const std::string want = env ? env : "auto";
    if (want == "scalar") return table(Isa::scalar);
    if (want == "avx2") return table(Isa::avx2);
    if (want == "neon") return table(Isa::neon);
    if (available(Isa::avx2)) return table(Isa::avx2);
    if (available(Isa::neon)) return table(Isa::neon);
    return table(Isa::scalar);
}

} // namespace

const KernelTable& active() {
    static const KernelTable& t = select_from_environment();
    return t;
}

} // namespace chfem::kernels
