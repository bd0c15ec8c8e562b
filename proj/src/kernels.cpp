#include "melab/kernels.hpp"

namespace melab::kernels {

namespace {

struct Table {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*squared_l2)(const double*, const double*, std::size_t);
};

constexpr Table kScalar{Backend::scalar, detail::dot_scalar, detail::axpy_scalar,
                        detail::squared_l2_scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{Backend::avx2, detail::dot_avx2, detail::axpy_avx2,
                      detail::squared_l2_avx2};

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}
#endif

Table detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) return kAvx2;
#endif
    return kScalar;
}

Table g_table = detect();

}  // namespace

Backend active_backend() { return g_table.backend; }

std::string_view backend_name() {
    return g_table.backend == Backend::avx2 ? "avx2" : "scalar";
}

Backend force_backend(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::avx2 && cpu_has_avx2()) {
        g_table = kAvx2;
        return Backend::avx2;
    }
#else
    (void)b;
#endif
    g_table = kScalar;
    return Backend::scalar;
}

double dot(const double* a, const double* b, std::size_t n) { return g_table.dot(a, b, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    g_table.axpy(alpha, x, y, n);
}

double squared_l2(const double* a, const double* b, std::size_t n) {
    return g_table.squared_l2(a, b, n);
}

}  // namespace melab::kernels
