#include "common.hpp"
#include "gradhom/tensor.hpp"

using namespace gtest;

TEST_CASE("contract with the identity returns the vector") {
  Rng rng;
  for (int k = 0; k < 5; ++k) {
    const Vec3 v = rng.tensor<1>();
    CHECK(contract<1>(identity2(), v) == v);
  }
  CHECK(contract<2>(Mat3{}, Mat3{}).data[0] == 0.0);
}

TEST_CASE("double contraction of rank 4 and rank 2 matches index loops") {
  Rng rng(11);
  const auto A = rng.tensor<4>();
  const auto B = rng.tensor<2>();
  const Mat3 C = contract<2>(A, B);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += A(i, j, k, l) * B(k, l);
      CHECK(C(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("contraction over three indices") {
  Rng rng(12);
  const auto A = rng.tensor<5>();
  const auto B = rng.tensor<3>();
  const Mat3 C = contract<3>(A, B);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          for (int m = 0; m < 3; ++m) s += A(i, j, k, l, m) * B(k, l, m);
      CHECK(C(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("dyadic products") {
  const Mat3 e12 = dyad(unit_vector(0), unit_vector(1));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(e12(i, j) == (i == 0 && j == 1 ? 1.0 : 0.0));
  Rng rng(3);
  const auto B = rng.tensor<2>();
  CHECK(max_abs(dyad(Tensor<0>{}, B)) == 0.0);

  const Vec3 a = rng.tensor<1>(), b = rng.tensor<1>(), c = rng.tensor<1>();
  const Tensor<3> abc = dyad(dyad(a, b), c);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) CHECK(abc(i, j, k) == a[i] * b[j] * c[k]);
}

TEST_CASE("transpose_shift") {
  Rng rng(4);
  const auto A2 = rng.tensor<2>();
  CHECK(transpose_shift(A2, 1) == transpose(A2));
  const Mat3 S = A2 + transpose(A2);
  CHECK(transpose_shift(S, 1) == S);

  const auto A3 = rng.tensor<3>();
  CHECK(transpose_shift(transpose_shift(transpose_shift(A3, 1), 1), 1) == A3);

  const auto A4 = rng.tensor<4>();
  const auto T4 = transpose_shift(A4, 2);
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int K = 0; K < 3; ++K)
        for (int L = 0; L < 3; ++L) CHECK(T4(i, J, K, L) == A4(K, L, i, J));

  CHECK_THROWS_AS(transpose_shift(A3, 3), std::invalid_argument);
}

TEST_CASE("exchange_indices") {
  Rng rng(5);
  const auto A = rng.tensor<4>();
  CHECK(exchange_indices(exchange_indices(A, 2, 4), 2, 4) == A);

  Tensor<3> S;
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int K = J; K < 3; ++K) S(i, J, K) = S(i, K, J) = rng();
  CHECK(exchange_indices(S, 2, 3) == S);

  const auto B = rng.tensor<5>();
  const auto E = exchange_indices(B, 1, 4);
  for (std::size_t f = 0; f < Tensor<5>::size; ++f) {
    const auto idx = unflatten<5>(f);
    CHECK(E(idx[0], idx[1], idx[2], idx[3], idx[4]) == B(idx[3], idx[1], idx[2], idx[0], idx[4]));
  }
  CHECK_THROWS_AS(exchange_indices(B, 3, 3), std::invalid_argument);
}

TEST_CASE("second-order helpers") {
  const Mat3 F = bench_F();
  const Mat3 I = matmul(F, inverse(F));
  CHECK(rel_max(identity2(), I) < 1e-14);
  CHECK(det(transpose(F)) == doctest::Approx(det(F)).epsilon(1e-15));
  // hydrostatic stress has no deviator
  CHECK(von_mises(identity2() * 42.0) == doctest::Approx(0.0).epsilon(1e-12));
  // uniaxial stress: von Mises equals the axial value
  Mat3 s;
  s(0, 0) = 5.0;
  CHECK(von_mises(s) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(!all_finite(Mat3{std::nan(""), 0, 0, 0, 0, 0, 0, 0, 0}));
}
