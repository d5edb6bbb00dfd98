#pragma once

#include <cstddef>
#include <string_view>

namespace ldesim::kernels {

/// Dense and sparse vector primitives used by the interior-point solver.
/// Two implementations exist: a scalar reference and an AVX2 variant.
/// The active backend is picked once at startup (CPUID, overridable via
/// the LDESIM_KERNELS environment variable) and both are equivalence-tested
/// against each other.
struct Backend {
    const char* name;

    double (*dot)(const double* x, const double* y, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x *= a
    void (*scale)(double* x, double a, std::size_t n);
    // z = x .* y
    void (*hadamard)(const double* x, const double* y, double* z, std::size_t n);
    double (*norm_inf)(const double* x, std::size_t n);
    // largest alpha >= 0 with x + alpha*dx >= 0; +inf when dx >= 0 everywhere
    double (*step_ratio)(const double* x, const double* dx, std::size_t n);
    // y = A x for a CSR matrix
    void (*spmv)(int rows, const int* row_ptr, const int* col, const double* val,
                 const double* x, double* y);
};

const Backend& active();

bool avx2_supported();

/// Force a backend by name ("scalar" or "avx2"); used by the equivalence
/// tests. Returns false if the request cannot be honored.
bool force_backend(std::string_view name);

inline double dot(const double* x, const double* y, std::size_t n) { return active().dot(x, y, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { active().axpy(a, x, y, n); }
inline void scale(double* x, double a, std::size_t n) { active().scale(x, a, n); }
inline void hadamard(const double* x, const double* y, double* z, std::size_t n) { active().hadamard(x, y, z, n); }
inline double norm_inf(const double* x, std::size_t n) { return active().norm_inf(x, n); }
inline double step_ratio(const double* x, const double* dx, std::size_t n) { return active().step_ratio(x, dx, n); }
inline void spmv(int rows, const int* row_ptr, const int* col, const double* val,
                 const double* x, double* y) { active().spmv(rows, row_ptr, col, val, x, y); }

namespace detail {
extern const Backend scalar_backend;
#if defined(__x86_64__) || defined(_M_X64)
extern const Backend avx2_backend;
#endif
}

} // namespace ldesim::kernels
