#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

namespace gradhom {

/// Forward-mode number carrying a value and N first derivatives.
template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> g{};

  Dual() = default;
  Dual(double x) : v(x) {}
  static Dual variable(double x, int i) {
    Dual d(x);
    d.g[static_cast<std::size_t>(i)] = 1.0;
    return d;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) g[i] += o.g[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) g[i] -= o.g[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) g[i] = g[i] * o.v + v * o.g[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    for (int i = 0; i < N; ++i) g[i] = (g[i] - v * inv * o.g[i]) * inv;
    v *= inv;
    return *this;
  }
  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
  friend Dual operator-(Dual a) {
    a.v = -a.v;
    for (auto& x : a.g) x = -x;
    return a;
  }
};

template <int N>
Dual<N> chain(const Dual<N>& a, double f, double df) {
  Dual<N> r(f);
  for (int i = 0; i < N; ++i) r.g[i] = df * a.g[i];
  return r;
}

template <int N>
Dual<N> log(const Dual<N>& a) {
  return chain(a, std::log(a.v), 1.0 / a.v);
}

/// Forward-mode number carrying a value, N first derivatives and the packed
/// symmetric Hessian (upper triangle, row by row).
template <int N>
struct HyperDual {
  static constexpr int nh = N * (N + 1) / 2;
  double v = 0.0;
  std::array<double, N> g{};
  std::array<double, nh> h{};

  HyperDual() = default;
  HyperDual(double x) : v(x) {}
  static HyperDual variable(double x, int i) {
    HyperDual d(x);
    d.g[static_cast<std::size_t>(i)] = 1.0;
    return d;
  }

  static constexpr int hidx(int i, int j) {
    if (i > j) std::swap(i, j);
    return i * N - i * (i - 1) / 2 + (j - i);
  }
  double hess(int i, int j) const { return h[static_cast<std::size_t>(hidx(i, j))]; }

  HyperDual& operator+=(const HyperDual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) g[i] += o.g[i];
    for (int i = 0; i < nh; ++i) h[i] += o.h[i];
    return *this;
  }
  HyperDual& operator-=(const HyperDual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) g[i] -= o.g[i];
    for (int i = 0; i < nh; ++i) h[i] -= o.h[i];
    return *this;
  }
  HyperDual& operator*=(double s) {
    v *= s;
    for (auto& x : g) x *= s;
    for (auto& x : h) x *= s;
    return *this;
  }
  HyperDual& operator*=(const HyperDual& o) {
    int k = 0;
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j, ++k)
        h[k] = v * o.h[k] + o.v * h[k] + g[i] * o.g[j] + o.g[i] * g[j];
    for (int i = 0; i < N; ++i) g[i] = g[i] * o.v + v * o.g[i];
    v *= o.v;
    return *this;
  }
  HyperDual& operator/=(const HyperDual& o);

  friend HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
  friend HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
  friend HyperDual operator*(HyperDual a, const HyperDual& b) { return a *= b; }
  friend HyperDual operator*(HyperDual a, double s) { return a *= s; }
  friend HyperDual operator*(double s, HyperDual a) { return a *= s; }
  friend HyperDual operator/(HyperDual a, const HyperDual& b) { return a /= b; }
  friend HyperDual operator/(HyperDual a, double s) { return a *= 1.0 / s; }
  friend HyperDual operator+(HyperDual a, double s) { return a.v += s, a; }
  friend HyperDual operator+(double s, HyperDual a) { return a.v += s, a; }
  friend HyperDual operator-(HyperDual a, double s) { return a.v -= s, a; }
  friend HyperDual operator-(double s, HyperDual a) { return (a *= -1.0).v += s, a; }
  friend HyperDual operator-(HyperDual a) { return a *= -1.0; }
};

/// f(a) given f, f', f'' at a.v.
template <int N>
HyperDual<N> chain(const HyperDual<N>& a, double f, double df, double ddf) {
  HyperDual<N> r(f);
  int k = 0;
  for (int i = 0; i < N; ++i) {
    r.g[i] = df * a.g[i];
    for (int j = i; j < N; ++j, ++k) r.h[k] = df * a.h[k] + ddf * a.g[i] * a.g[j];
  }
  return r;
}

template <int N>
HyperDual<N>& HyperDual<N>::operator/=(const HyperDual& o) {
  const double inv = 1.0 / o.v;
  return *this *= chain(o, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <int N>
HyperDual<N> sqrt(const HyperDual<N>& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

template <int N>
HyperDual<N> log(const HyperDual<N>& a) {
  return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}

template <int N>
HyperDual<N> tan(const HyperDual<N>& a) {
  const double t = std::tan(a.v);
  const double d = 1.0 + t * t;
  return chain(a, t, d, 2.0 * t * d);
}

/// acos with derivatives; the caller guarantees |a.v| < 1.
template <int N>
HyperDual<N> acos(const HyperDual<N>& a) {
  const double s = 1.0 - a.v * a.v;
  const double r = std::sqrt(s);
  return chain(a, std::acos(a.v), -1.0 / r, -a.v / (s * r));
}

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) { return x.v; }
template <int N>
double value_of(const HyperDual<N>& x) { return x.v; }

}  // namespace gradhom
