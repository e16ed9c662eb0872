#include "gradhom/tensor.hpp"

namespace gradhom {

Mat3 identity2() {
  Mat3 I;
  I(0, 0) = I(1, 1) = I(2, 2) = 1.0;
  return I;
}

Vec3 unit_vector(int i) {
  Vec3 e;
  e[static_cast<std::size_t>(i)] = 1.0;
  return e;
}

double det(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Mat3 inverse(const Mat3& a) {
  const double d = det(a);
  if (d == 0.0) throw std::domain_error("inverse: singular 3x3 matrix");
  Mat3 r;
  r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
  r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
  r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
  r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
  r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
  r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
  r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
  r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
  r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
  return r;
}

Mat3 transpose(const Mat3& a) { return transpose_shift(a, 1); }

Mat3 matmul(const Mat3& a, const Mat3& b) { return contract<1>(a, b); }

Vec3 matvec(const Mat3& a, const Vec3& v) { return contract<1>(a, v); }

Mat3 cauchy_stress(const Mat3& P, const Mat3& F) {
  return matmul(P, transpose(F)) * (1.0 / det(F));
}

double von_mises(const Mat3& s) {
  const double tr = (s(0, 0) + s(1, 1) + s(2, 2)) / 3.0;
  Mat3 dev = s;
  for (int i = 0; i < 3; ++i) dev(i, i) -= tr;
  double dd = 0.0;
  for (double v : dev.data) dd += v * v;
  return std::sqrt(1.5 * dd);
}

}  // namespace gradhom
