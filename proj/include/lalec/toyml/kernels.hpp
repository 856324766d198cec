#pragma once

#include <cstddef>

namespace lalec::toyml::kernels {

// Dense double-precision kernels used by the toy estimators. The scalar
// versions are the reference; the AVX2 versions are selected at runtime
// when the CPU supports AVX2 and FMA. Results agree up to summation order.

enum class Backend { Scalar, Avx2 };

bool avx2_supported();
Backend active_backend();
/// Throws Error(InvalidArgument) when the backend is not supported here.
void set_backend(Backend b);
const char* backend_name(Backend b);

double squared_l2(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

namespace scalar {
double squared_l2(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
// Callers must check avx2_supported() first.
double squared_l2(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace lalec::toyml::kernels
