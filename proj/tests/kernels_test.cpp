#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lalec/error.hpp"
#include "lalec/rng.hpp"
#include "lalec/toyml/kernels.hpp"

namespace lalec::toyml::kernels {
namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() * 10;
  return v;
}

double tol(double ref) { return 1e-12 * std::max(1.0, std::fabs(ref)) * 8; }

class Avx2 : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!avx2_supported()) GTEST_SKIP() << "CPU lacks AVX2/FMA";
  }
};

// Lengths cover empty, sub-vector, exact multiples and ragged tails.
const std::size_t kLengths[] = {0, 1, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 100, 1023};

TEST_F(Avx2, SquaredL2MatchesScalar) {
  Rng rng(1);
  for (auto n : kLengths) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    double ref = scalar::squared_l2(a.data(), b.data(), n);
    EXPECT_NEAR(avx2::squared_l2(a.data(), b.data(), n), ref, tol(ref)) << n;
  }
}

TEST_F(Avx2, DotMatchesScalar) {
  Rng rng(2);
  for (auto n : kLengths) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    double ref = scalar::dot(a.data(), b.data(), n);
    EXPECT_NEAR(avx2::dot(a.data(), b.data(), n), ref, tol(std::fabs(ref) + 1e3)) << n;
  }
}

TEST_F(Avx2, AxpyMatchesScalar) {
  Rng rng(3);
  for (auto n : kLengths) {
    auto x = random_vec(rng, n), y = random_vec(rng, n);
    auto y2 = y;
    scalar::axpy(0.37, x.data(), y.data(), n);
    avx2::axpy(0.37, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y2[i], y[i], tol(y[i])) << n;
  }
}

TEST_F(Avx2, UnalignedOffsets) {
  Rng rng(4);
  auto a = random_vec(rng, 40), b = random_vec(rng, 40);
  for (std::size_t off = 1; off < 4; ++off) {
    double ref = scalar::dot(a.data() + off, b.data() + off, 33);
    EXPECT_NEAR(avx2::dot(a.data() + off, b.data() + off, 33), ref, tol(std::fabs(ref) + 1e3));
  }
}

TEST(Dispatch, BackendSelection) {
  auto original = active_backend();
  set_backend(Backend::Scalar);
  EXPECT_EQ(active_backend(), Backend::Scalar);
  double a[] = {1, 2, 3}, b[] = {4, 6, 3};
  EXPECT_EQ(squared_l2(a, b, 3), 9 + 16 + 0);
  EXPECT_EQ(dot(a, b, 3), 4 + 12 + 9);
  if (avx2_supported()) {
    set_backend(Backend::Avx2);
    EXPECT_EQ(active_backend(), Backend::Avx2);
    EXPECT_EQ(squared_l2(a, b, 3), 25);
  } else {
    EXPECT_THROW(set_backend(Backend::Avx2), Error);
  }
  set_backend(original);
  EXPECT_STREQ(backend_name(Backend::Scalar), "scalar");
}

}  // namespace
}  // namespace lalec::toyml::kernels
