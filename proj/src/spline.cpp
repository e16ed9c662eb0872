#include "gradhom/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gradhom/errors.hpp"

namespace gradhom {

void KnotVector::validate() const {
  if (p < 1) throw ValidationError("knot vector: degree must be >= 1");
  const int m = static_cast<int>(knots.size());
  if (m < 2 * (p + 1)) throw ValidationError("knot vector: too few knots");
  for (int i = 1; i < m; ++i)
    if (knots[i] < knots[i - 1]) throw ValidationError("knot vector: knots must be nondecreasing");
  for (int i = 1; i <= p; ++i)
    if (knots[i] != knots[0] || knots[m - 1 - i] != knots[m - 1])
      throw ValidationError("knot vector: ends must be repeated p+1 times");
  if (!(hi() > lo())) throw ValidationError("knot vector: empty domain");
}

int KnotVector::find_span(double x) const {
  const int n = n_basis();
  if (x < lo() || x > hi()) throw ValidationError("eval_basis: parameter " + std::to_string(x) + " outside knot domain");
  if (x >= knots[static_cast<std::size_t>(n)]) {
    int s = n - 1;
    while (knots[s] == knots[s + 1]) --s;
    return s;
  }
  auto it = std::upper_bound(knots.begin() + p, knots.begin() + n + 1, x);
  return static_cast<int>(it - knots.begin()) - 1;
}

std::vector<std::pair<double, double>> KnotVector::elements() const {
  std::vector<std::pair<double, double>> out;
  for (int s = p; s < n_basis(); ++s)
    if (knots[s + 1] > knots[s]) out.emplace_back(knots[s], knots[s + 1]);
  return out;
}

std::vector<double> KnotVector::greville() const {
  std::vector<double> g(static_cast<std::size_t>(n_basis()));
  for (int i = 0; i < n_basis(); ++i) {
    double s = 0.0;
    for (int j = 1; j <= p; ++j) s += knots[i + j];
    g[i] = s / p;
  }
  return g;
}

KnotVector uniform_open(int nel, int p) {
  if (nel < 1) throw ValidationError("uniform_open: need at least one element");
  if (p < 1) throw ValidationError("uniform_open: degree must be >= 1");
  KnotVector kv;
  kv.p = p;
  for (int i = 0; i < p; ++i) kv.knots.push_back(0.0);
  for (int i = 0; i <= nel; ++i) kv.knots.push_back(static_cast<double>(i) / nel);
  for (int i = 0; i < p; ++i) kv.knots.push_back(1.0);
  return kv;
}

BasisEval eval_basis(const KnotVector& kv, double x, int nd) {
  const int p = kv.p;
  const int span = kv.find_span(x);
  const auto& U = kv.knots;
  nd = std::min(nd, p);

  std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
  std::vector<double> left(p + 1), right(p + 1);
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - U[span + 1 - j];
    right[j] = U[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }

  BasisEval out;
  out.first = span - p;
  out.ders.assign(4, std::vector<double>(p + 1, 0.0));
  for (int j = 0; j <= p; ++j) out.ders[0][j] = ndu[j][p];

  std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      out.ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  int fac = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) out.ders[k][j] *= fac;
    fac *= (p - k);
  }
  return out;
}

int SplinePatch::n_ctrl() const {
  const auto nn = n();
  return nn[0] * nn[1] * nn[2];
}

int SplinePatch::index(int i, int j, int k) const {
  const auto nn = n();
  return i + nn[0] * (j + nn[1] * k);
}

std::array<int, 3> SplinePatch::nel() const {
  return {static_cast<int>(kv[0].elements().size()), static_cast<int>(kv[1].elements().size()),
          static_cast<int>(kv[2].elements().size())};
}

int SplinePatch::n_elements() const {
  const auto e = nel();
  return e[0] * e[1] * e[2];
}

std::array<int, 3> SplinePatch::element_ijk(int e) const {
  const auto ne = nel();
  return {e % ne[0], (e / ne[0]) % ne[1], e / (ne[0] * ne[1])};
}

namespace {

// 3x3 inverse, row-major.
void inv3(const std::array<double, 9>& a, std::array<double, 9>& r, double& d) {
  d = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) + a[2] * (a[3] * a[7] - a[4] * a[6]);
  const double id = 1.0 / d;
  r[0] = (a[4] * a[8] - a[5] * a[7]) * id;
  r[1] = (a[2] * a[7] - a[1] * a[8]) * id;
  r[2] = (a[1] * a[5] - a[2] * a[4]) * id;
  r[3] = (a[5] * a[6] - a[3] * a[8]) * id;
  r[4] = (a[0] * a[8] - a[2] * a[6]) * id;
  r[5] = (a[2] * a[3] - a[0] * a[5]) * id;
  r[6] = (a[3] * a[7] - a[4] * a[6]) * id;
  r[7] = (a[1] * a[6] - a[0] * a[7]) * id;
  r[8] = (a[0] * a[4] - a[1] * a[3]) * id;
}

}  // namespace

PointEval SplinePatch::eval(const Point3& xi, int nd) const {
  if (nd < 1 || nd > 3) throw ValidationError("SplinePatch::eval: derivative order must be 1..3");
  if (nd == 3 && !affine) throw ValidationError("SplinePatch::eval: third derivatives need an affine patch");
  const int p = degree();
  const int q = p + 1;
  const int nb = q * q * q;
  std::array<BasisEval, 3> b;
  for (int d = 0; d < 3; ++d) b[d] = eval_basis(kv[d], xi[d], nd);

  PointEval pe;
  pe.xi = xi;
  pe.ids.resize(nb);
  // parametric derivatives: value, grad (3), hessian (9), third (27)
  std::vector<double> R(nb), G(3 * nb), H(9 * nb), T3(nd == 3 ? 27 * nb : 0);
  int a = 0;
  for (int k = 0; k < q; ++k)
    for (int j = 0; j < q; ++j)
      for (int i = 0; i < q; ++i, ++a) {
        pe.ids[a] = index(b[0].first + i, b[1].first + j, b[2].first + k);
        const int idx[3] = {i, j, k};
        auto f = [&](int d, int order) { return b[d].ders[order][idx[d]]; };
        R[a] = f(0, 0) * f(1, 0) * f(2, 0);
        for (int u = 0; u < 3; ++u) {
          int o[3] = {0, 0, 0};
          o[u] = 1;
          G[3 * a + u] = f(0, o[0]) * f(1, o[1]) * f(2, o[2]);
          for (int v = 0; v < 3; ++v) {
            int o2[3] = {0, 0, 0};
            o2[u]++;
            o2[v]++;
            H[9 * a + 3 * u + v] = f(0, o2[0]) * f(1, o2[1]) * f(2, o2[2]);
            if (nd == 3)
              for (int w = 0; w < 3; ++w) {
                int o3[3] = {o2[0], o2[1], o2[2]};
                o3[w]++;
                T3[27 * a + 9 * u + 3 * v + w] = (o3[0] > 3 || o3[1] > 3 || o3[2] > 3)
                                                     ? 0.0
                                                     : f(0, o3[0]) * f(1, o3[1]) * f(2, o3[2]);
              }
          }
        }
      }

  // geometry X, J = dX/dxi, second derivatives of X
  std::array<double, 9> J{};
  std::array<double, 27> HX{};  // HX[c*9 + u*3 + v]
  Point3 X{0, 0, 0};
  for (int A = 0; A < nb; ++A) {
    const Point3& P = ctrl[pe.ids[A]];
    for (int c = 0; c < 3; ++c) {
      X[c] += R[A] * P[c];
      for (int u = 0; u < 3; ++u) {
        J[3 * c + u] += G[3 * A + u] * P[c];
        for (int v = 0; v < 3; ++v) HX[9 * c + 3 * u + v] += H[9 * A + 3 * u + v] * P[c];
      }
    }
  }
  std::array<double, 9> Ji{};
  double dJ = 0.0;
  inv3(J, Ji, dJ);
  pe.X = X;
  pe.jac = J;
  pe.detJ = dJ;
  if (!(dJ > 0.0)) return pe;  // caller reports the element

  pe.R = R;
  pe.dR.assign(3 * nb, 0.0);
  pe.d2R.assign(9 * nb, 0.0);
  if (nd == 3) pe.d3R.assign(27 * nb, 0.0);
  // Ji[u*3 + i] = d xi_u / d X_i
  for (int A = 0; A < nb; ++A) {
    for (int i = 0; i < 3; ++i) {
      double s = 0.0;
      for (int u = 0; u < 3; ++u) s += Ji[3 * u + i] * G[3 * A + u];
      pe.dR[3 * A + i] = s;
    }
    // corrected parametric hessian
    double Hc[9];
    for (int u = 0; u < 3; ++u)
      for (int v = 0; v < 3; ++v) {
        double s = H[9 * A + 3 * u + v];
        for (int c = 0; c < 3; ++c) s -= pe.dR[3 * A + c] * HX[9 * c + 3 * u + v];
        Hc[3 * u + v] = s;
      }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int u = 0; u < 3; ++u)
          for (int v = 0; v < 3; ++v) s += Ji[3 * u + i] * Ji[3 * v + j] * Hc[3 * u + v];
        pe.d2R[9 * A + 3 * i + j] = s;
      }
    if (nd == 3)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            double s = 0.0;
            for (int u = 0; u < 3; ++u)
              for (int v = 0; v < 3; ++v)
                for (int w = 0; w < 3; ++w)
                  s += Ji[3 * u + i] * Ji[3 * v + j] * Ji[3 * w + k] * T3[27 * A + 9 * u + 3 * v + w];
            pe.d3R[27 * A + 9 * i + 3 * j + k] = s;
          }
  }
  return pe;
}

Point3 SplinePatch::map(const Point3& xi) const {
  const int p = degree();
  std::array<BasisEval, 3> b;
  for (int d = 0; d < 3; ++d) b[d] = eval_basis(kv[d], xi[d], 0);
  Point3 X{0, 0, 0};
  for (int k = 0; k <= p; ++k)
    for (int j = 0; j <= p; ++j)
      for (int i = 0; i <= p; ++i) {
        const double r = b[0].ders[0][i] * b[1].ders[0][j] * b[2].ders[0][k];
        const Point3& P = ctrl[index(b[0].first + i, b[1].first + j, b[2].first + k)];
        for (int c = 0; c < 3; ++c) X[c] += r * P[c];
      }
  return X;
}

double SplinePatch::volume(int n_per_dir) const {
  double v = 0.0;
  for (const auto& qp : quadrature(*this, n_per_dir, 1)) v += qp.w;
  return v;
}

SplinePatch build_patch(std::array<int, 3> nel, int p, std::array<double, 3> lengths, bool center_origin) {
  for (int d = 0; d < 3; ++d)
    if (!(lengths[d] > 0.0)) throw ValidationError("build_patch: lengths must be positive");
  SplinePatch patch = build_mapped_patch(nel, p, [&](const Point3& xi) {
    Point3 X;
    for (int d = 0; d < 3; ++d) X[d] = lengths[d] * (xi[d] - (center_origin ? 0.5 : 0.0));
    return X;
  });
  patch.affine = true;
  return patch;
}

SplinePatch build_mapped_patch(std::array<int, 3> nel, int p, const std::function<Point3(const Point3&)>& map) {
  SplinePatch patch;
  for (int d = 0; d < 3; ++d) patch.kv[d] = uniform_open(nel[d], p);
  const auto n = patch.n();
  std::array<std::vector<double>, 3> g{patch.kv[0].greville(), patch.kv[1].greville(), patch.kv[2].greville()};
  patch.ctrl.resize(static_cast<std::size_t>(n[0] * n[1] * n[2]));
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) patch.ctrl[patch.index(i, j, k)] = map({g[0][i], g[1][j], g[2][k]});
  return patch;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw ValidationError("gauss_legendre: need at least one point");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

std::vector<QuadraturePoint> element_quadrature(const SplinePatch& patch, int element, int n_per_dir, int nd) {
  std::vector<double> gx, gw;
  gauss_legendre(n_per_dir, gx, gw);
  const auto ijk = patch.element_ijk(element);
  std::array<std::pair<double, double>, 3> span;
  for (int d = 0; d < 3; ++d) span[d] = patch.kv[d].elements()[static_cast<std::size_t>(ijk[d])];
  std::vector<QuadraturePoint> out;
  out.reserve(static_cast<std::size_t>(n_per_dir * n_per_dir * n_per_dir));
  for (int c = 0; c < n_per_dir; ++c)
    for (int b = 0; b < n_per_dir; ++b)
      for (int a = 0; a < n_per_dir; ++a) {
        const int gi[3] = {a, b, c};
        Point3 xi;
        double w = 1.0;
        for (int d = 0; d < 3; ++d) {
          const double h = span[d].second - span[d].first;
          xi[d] = span[d].first + 0.5 * h * (gx[gi[d]] + 1.0);
          w *= 0.5 * h * gw[gi[d]];
        }
        QuadraturePoint qp;
        static_cast<PointEval&>(qp) = patch.eval(xi, nd);
        if (!(qp.detJ > 0.0))
          throw NonPositiveJacobian("quadrature: non-positive geometry Jacobian in element " + std::to_string(element));
        qp.w = w * qp.detJ;
        qp.element = element;
        out.push_back(std::move(qp));
      }
  return out;
}

std::vector<QuadraturePoint> quadrature(const SplinePatch& patch, int n_per_dir, int nd) {
  std::vector<QuadraturePoint> out;
  for (int e = 0; e < patch.n_elements(); ++e) {
    auto pts = element_quadrature(patch, e, n_per_dir, nd);
    for (auto& q : pts) out.push_back(std::move(q));
  }
  return out;
}

std::vector<FacePoint> face_quadrature(const SplinePatch& patch, int face, int n_per_dir, int nd) {
  const int dir = face / 2, side = face % 2;
  const int t1 = (dir + 1) % 3, t2 = (dir + 2) % 3;
  std::vector<double> gx, gw;
  gauss_legendre(n_per_dir, gx, gw);
  const auto e1 = patch.kv[t1].elements();
  const auto e2 = patch.kv[t2].elements();
  const double xd = side ? patch.kv[dir].hi() : patch.kv[dir].lo();
  std::vector<FacePoint> out;
  for (const auto& s2 : e2)
    for (const auto& s1 : e1)
      for (int b = 0; b < n_per_dir; ++b)
        for (int a = 0; a < n_per_dir; ++a) {
          Point3 xi;
          xi[dir] = xd;
          const double h1 = s1.second - s1.first, h2 = s2.second - s2.first;
          xi[t1] = s1.first + 0.5 * h1 * (gx[a] + 1.0);
          xi[t2] = s2.first + 0.5 * h2 * (gx[b] + 1.0);
          FacePoint fp;
          static_cast<PointEval&>(fp) = patch.eval(xi, nd);
          if (!(fp.detJ > 0.0)) throw NonPositiveJacobian("face_quadrature: non-positive geometry Jacobian");
          // area vector from the two tangent columns of J
          const auto& J = fp.jac;
          const double u[3] = {J[t1], J[3 + t1], J[6 + t1]};
          const double v[3] = {J[t2], J[3 + t2], J[6 + t2]};
          double n[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
          const double area = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
          // (t1, t2, dir) is a cyclic order, so u x v points along increasing xi_dir
          const double sgn = side ? 1.0 : -1.0;
          for (int c = 0; c < 3; ++c) fp.normal[c] = sgn * n[c] / area;
          fp.w = 0.25 * h1 * h2 * gw[a] * gw[b] * area;
          fp.face = face;
          out.push_back(std::move(fp));
        }
  return out;
}

Eigen::MatrixXd knot_refinement_1d(const KnotVector& coarse, const std::vector<double>& new_knots, KnotVector& fine) {
  KnotVector cur = coarse;
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(coarse.n_basis(), coarse.n_basis());
  const int p = coarse.p;
  for (double u : new_knots) {
    const int n = cur.n_basis();
    const int k = cur.find_span(u);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + 1, n);
    for (int i = 0; i <= n; ++i) {
      if (i <= k - p) {
        S(i, i) = 1.0;
      } else if (i >= k + 1) {
        S(i, i - 1) = 1.0;
      } else {
        const double alpha = (u - cur.knots[i]) / (cur.knots[i + p] - cur.knots[i]);
        S(i, i) = alpha;
        S(i, i - 1) = 1.0 - alpha;
      }
    }
    cur.knots.insert(cur.knots.begin() + k + 1, u);
    T = S * T;
  }
  fine = cur;
  return T;
}

Refinement knot_insert(const SplinePatch& patch) {
  Refinement out;
  std::array<Eigen::MatrixXd, 3> T;
  for (int d = 0; d < 3; ++d) {
    std::vector<double> mids;
    for (const auto& e : patch.kv[d].elements()) mids.push_back(0.5 * (e.first + e.second));
    T[d] = knot_refinement_1d(patch.kv[d], mids, out.fine.kv[d]);
  }
  out.fine.affine = patch.affine;
  const auto nc = patch.n();
  const auto nf = out.fine.n();
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < nf[2]; ++k)
    for (int j = 0; j < nf[1]; ++j)
      for (int i = 0; i < nf[0]; ++i)
        for (int c = 0; c < nc[2]; ++c) {
          const double tk = T[2](k, c);
          if (tk == 0.0) continue;
          for (int b = 0; b < nc[1]; ++b) {
            const double tj = T[1](j, b);
            if (tj == 0.0) continue;
            for (int a = 0; a < nc[0]; ++a) {
              const double ti = T[0](i, a);
              if (ti == 0.0) continue;
              trip.emplace_back(out.fine.index(i, j, k), patch.index(a, b, c), ti * tj * tk);
            }
          }
        }
  out.prolongation.resize(out.fine.n_ctrl(), patch.n_ctrl());
  out.prolongation.setFromTriplets(trip.begin(), trip.end());
  out.fine.ctrl = prolong(out.prolongation, patch.ctrl);
  return out;
}

std::vector<Point3> prolong(const SparseMatrix& T, const std::vector<Point3>& coarse) {
  if (static_cast<std::size_t>(T.cols()) != coarse.size()) throw ValidationError("prolong: size mismatch");
  std::vector<Point3> fine(static_cast<std::size_t>(T.rows()), Point3{0, 0, 0});
  for (int r = 0; r < T.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(T, r); it; ++it)
      for (int c = 0; c < 3; ++c) fine[r][c] += it.value() * coarse[it.col()][c];
  return fine;
}

}  // namespace gradhom
