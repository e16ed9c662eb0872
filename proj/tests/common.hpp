#pragma once

#include <cmath>
#include <random>

#include "doctest.h"
#include "gradhom/rve.hpp"

namespace gtest {

using namespace gradhom;

inline Mat3 bench_F() { return Mat3{0.897, 0.5, -0.4, -0.07, 1.001, -0.1, 0.082, 0.02, 0.997}; }

// symmetric in the last two indices, 1/mm
inline Tensor<3> bench_FF() {
  return Tensor<3>{-0.033, 0.015, -0.020, 0.015, 0.013, 0.043, -0.020, 0.043, 0.029,
                   0.015,  -0.005, 0.024, -0.005, 0.028, 0.028, 0.024, 0.028, 0.014,
                   0.023,  0.005, -0.031, 0.005, -0.042, -0.001, -0.031, -0.001, -0.012};
}

inline MacroDrive drive(const Mat3& F, const Tensor<3>& FF = {}) {
  MacroDrive d;
  d.F = F;
  d.FF = FF;
  return d;
}

constexpr double kBenchVonMises = 6132.725158303244;

struct Rng {
  std::mt19937_64 g;
  explicit Rng(std::uint64_t seed = 7) : g(seed) {}
  double operator()(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(g); }
  template <int R>
  Tensor<R> tensor(double amp = 1.0) {
    Tensor<R> t;
    for (auto& v : t.data) v = amp * (*this)();
    return t;
  }
  // F near identity with positive determinant
  Mat3 deformation(double amp = 0.2) {
    Mat3 F = identity2();
    for (auto& v : F.data) v += amp * (*this)();
    return F;
  }
  Tensor<3> second_gradient(double amp) {
    Tensor<3> t;
    for (int i = 0; i < 3; ++i)
      for (int J = 0; J < 3; ++J)
        for (int K = J; K < 3; ++K) t(i, J, K) = t(i, K, J) = amp * (*this)();
    return t;
  }
};

// part symmetric in the last two indices
inline Tensor<3> sym23(const Tensor<3>& t) {
  Tensor<3> s;
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int K = 0; K < 3; ++K) s(i, J, K) = 0.5 * (t(i, J, K) + t(i, K, J));
  return s;
}

template <int R>
double rel_max(const Tensor<R>& a, const Tensor<R>& b) {
  double n = norm(a);
  return max_abs(a - b) / (n > 0.0 ? n : 1.0);
}

}  // namespace gtest
