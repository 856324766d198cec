#include "lalec/toyml/kernels.hpp"

#include <atomic>

#include "lalec/error.hpp"

namespace lalec::toyml::kernels {

namespace scalar {

double squared_l2(const double* a, const double* b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace scalar

namespace {

Backend detect() { return avx2_supported() ? Backend::Avx2 : Backend::Scalar; }

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_supported()) {
    throw Error(ErrorCode::InvalidArgument, "AVX2 is not available on this CPU");
  }
  current().store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

double squared_l2(const double* a, const double* b, std::size_t n) {
  return active_backend() == Backend::Avx2 ? avx2::squared_l2(a, b, n)
                                           : scalar::squared_l2(a, b, n);
}

double dot(const double* a, const double* b, std::size_t n) {
  return active_backend() == Backend::Avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  if (active_backend() == Backend::Avx2) {
    avx2::axpy(alpha, x, y, n);
  } else {
    scalar::axpy(alpha, x, y, n);
  }
}

}  // namespace lalec::toyml::kernels
