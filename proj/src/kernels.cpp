#include "ldesim/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace ldesim::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void hadamard_scalar(const double* x, const double* y, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

double norm_inf_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = x[i] < 0 ? -x[i] : x[i];
        if (a > m) m = a;
    }
    return m;
}

double step_ratio_scalar(const double* x, const double* dx, std::size_t n) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (dx[i] < 0.0) {
            double r = -x[i] / dx[i];
            if (r < alpha) alpha = r;
        }
    }
    return alpha;
}

void spmv_scalar(int rows, const int* row_ptr, const int* col, const double* val,
                 const double* x, double* y) {
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += val[k] * x[col[k]];
        y[r] = acc;
    }
}

const Backend* select_default() {
    const char* env = std::getenv("LDESIM_KERNELS");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return &detail::scalar_backend;
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return &detail::avx2_backend;
#endif
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) return &detail::avx2_backend;
#endif
    return &detail::scalar_backend;
}

std::atomic<const Backend*> g_active{nullptr};

} // namespace

namespace detail {
const Backend scalar_backend = {
    "scalar",
    dot_scalar, axpy_scalar, scale_scalar, hadamard_scalar,
    norm_inf_scalar, step_ratio_scalar, spmv_scalar,
};
}

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Backend& active() {
    const Backend* b = g_active.load(std::memory_order_acquire);
    if (b == nullptr) {
        b = select_default();
        g_active.store(b, std::memory_order_release);
    }
    return *b;
}

bool force_backend(std::string_view name) {
    if (name == "scalar") {
        g_active.store(&detail::scalar_backend, std::memory_order_release);
        return true;
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2" && avx2_supported()) {
        g_active.store(&detail::avx2_backend, std::memory_order_release);
        return true;
    }
#endif
    return false;
}

} // namespace ldesim::kernels
