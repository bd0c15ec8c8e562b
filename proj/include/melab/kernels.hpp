#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by the MLP, KMeans and GMM code paths.
// Scalar reference kernels always exist; an AVX2 variant is selected at
// startup when the CPU supports it. Both variants are equivalence-tested
// against each other.
namespace melab::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
std::string_view backend_name();

// Test hook: force a backend (falls back to scalar if unavailable).
// Returns the backend actually selected.
Backend force_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

double squared_l2(const double* a, const double* b, std::size_t n);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
double squared_l2_scalar(const double* a, const double* b, std::size_t n);
#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
double squared_l2_avx2(const double* a, const double* b, std::size_t n);
#endif
}  // namespace detail

}  // namespace melab::kernels
