#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>

namespace gradhom {

/// Number of components of a rank-R tensor over 3-dimensional indices.
constexpr std::size_t pow3(int rank) {
  std::size_t n = 1;
  for (int i = 0; i < rank; ++i) n *= 3;
  return n;
}

constexpr int kMaxRank = 6;

/// Dense tensor of fixed rank R (0..6), every index ranging over {0,1,2}.
///
/// Components are stored in row-major order: the last index varies fastest,
/// so A(i,j,k) lives at 9*i + 3*j + k.  Rank 0 holds a single scalar.
template <int R>
struct Tensor {
  static_assert(R >= 0 && R <= kMaxRank, "tensor rank must lie in 0..6");
  static constexpr int rank = R;
  static constexpr std::size_t size = pow3(R);

  std::array<double, size> data{};

  Tensor() = default;
  Tensor(std::initializer_list<double> values) {
    if (values.size() != size) throw std::invalid_argument("Tensor: wrong component count");
    std::size_t i = 0;
    for (double v : values) data[i++] = v;
  }

  template <class... I>
  double& operator()(I... idx) {
    static_assert(sizeof...(I) == R, "index count must equal rank");
    return data[flat(idx...)];
  }
  template <class... I>
  double operator()(I... idx) const {
    static_assert(sizeof...(I) == R, "index count must equal rank");
    return data[flat(idx...)];
  }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  template <class... I>
  static constexpr std::size_t flat(I... idx) {
    std::size_t f = 0;
    ((f = 3 * f + static_cast<std::size_t>(idx)), ...);
    return f;
  }

  static Tensor zero() { return Tensor{}; }

  Tensor& operator+=(const Tensor& o) {
    for (std::size_t i = 0; i < size; ++i) data[i] += o.data[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    for (std::size_t i = 0; i < size; ++i) data[i] -= o.data[i];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (auto& v : data) v *= s;
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }
  bool operator==(const Tensor&) const = default;
};

using Vec3 = Tensor<1>;
using Mat3 = Tensor<2>;

/// Multi-index of a flat component position (most significant index first).
template <int R>
std::array<int, R> unflatten(std::size_t f) {
  std::array<int, R> idx{};
  for (int d = R - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(f % 3);
    f /= 3;
  }
  return idx;
}

template <int R>
std::size_t flatten(const std::array<int, R>& idx) {
  std::size_t f = 0;
  for (int d = 0; d < R; ++d) f = 3 * f + static_cast<std::size_t>(idx[d]);
  return f;
}

/// True when contracting the last K indices of a rank-N tensor with the first
/// K indices of a rank-M tensor is well formed.
template <int N, int M, int K>
concept Contractible = (K >= 1) && (K <= N) && (K <= M) && (N + M - 2 * K <= kMaxRank);

template <int N, int M>
concept DyadCompatible = (N + M <= kMaxRank);

/// Sum over the last K indices of A paired in order with the first K indices of B.
/// Covers the scalar products (.), (:), (three dots), (::) and all mixed products.
template <int K, int N, int M>
  requires Contractible<N, M, K>
Tensor<N + M - 2 * K> contract(const Tensor<N>& a, const Tensor<M>& b) {
  constexpr std::size_t inner = pow3(K);
  constexpr std::size_t outer_a = pow3(N - K);
  constexpr std::size_t outer_b = pow3(M - K);
  Tensor<N + M - 2 * K> out;
  for (std::size_t i = 0; i < outer_a; ++i)
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a.data[i * inner + k];
      if (aik == 0.0) continue;
      const double* brow = &b.data[k * outer_b];
      double* orow = &out.data[i * outer_b];
      for (std::size_t j = 0; j < outer_b; ++j) orow[j] += aik * brow[j];
    }
  return out;
}

/// result_{I,J} = a_I b_J.
template <int N, int M>
  requires DyadCompatible<N, M>
Tensor<N + M> dyad(const Tensor<N>& a, const Tensor<M>& b) {
  Tensor<N + M> out;
  for (std::size_t i = 0; i < Tensor<N>::size; ++i)
    for (std::size_t j = 0; j < Tensor<M>::size; ++j)
      out.data[i * Tensor<M>::size + j] = a.data[i] * b.data[j];
  return out;
}

/// Shifted transpose (.)^{Ts}: result_{I1..In} = a_{I(n-s+1)..In, I1..I(n-s)}.
/// For rank 2 and s = 1 this is the ordinary transpose; [A^{T1}]_{iJK} = A_{KiJ}.
template <int N>
Tensor<N> transpose_shift(const Tensor<N>& a, int s) {
  if (s < 1 || s > N - 1) throw std::invalid_argument("transpose_shift: shift must lie in 1..rank-1");
  Tensor<N> out;
  for (std::size_t f = 0; f < Tensor<N>::size; ++f) {
    const auto idx = unflatten<N>(f);
    std::array<int, N> src{};
    for (int d = 0; d < s; ++d) src[d] = idx[N - s + d];
    for (int d = 0; d < N - s; ++d) src[s + d] = idx[d];
    out.data[f] = a.data[flatten<N>(src)];
  }
  return out;
}

/// Interchange of index positions i < j (1-based, as in C^{ij}).
template <int N>
Tensor<N> exchange_indices(const Tensor<N>& a, int i, int j) {
  if (!(1 <= i && i < j && j <= N)) throw std::invalid_argument("exchange_indices: need 1 <= i < j <= rank");
  Tensor<N> out;
  for (std::size_t f = 0; f < Tensor<N>::size; ++f) {
    auto idx = unflatten<N>(f);
    std::swap(idx[i - 1], idx[j - 1]);
    out.data[f] = a.data[flatten<N>(idx)];
  }
  return out;
}

template <int N>
double norm(const Tensor<N>& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

template <int N>
double max_abs(const Tensor<N>& a) {
  double m = 0.0;
  for (double v : a.data) m = std::max(m, std::abs(v));
  return m;
}

template <int N>
bool all_finite(const Tensor<N>& a) {
  for (double v : a.data)
    if (!std::isfinite(v)) return false;
  return true;
}

Mat3 identity2();
Vec3 unit_vector(int i);
double det(const Mat3& a);
Mat3 inverse(const Mat3& a);
Mat3 transpose(const Mat3& a);
Mat3 matmul(const Mat3& a, const Mat3& b);
Vec3 matvec(const Mat3& a, const Vec3& v);

/// Cauchy stress J^{-1} P F^T and its von Mises measure sqrt(3/2 dev s : dev s).
Mat3 cauchy_stress(const Mat3& P, const Mat3& F);
double von_mises(const Mat3& sigma);

}  // namespace gradhom
