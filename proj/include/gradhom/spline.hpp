#pragma once

#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <vector>

namespace gradhom {

using Point3 = std::array<double, 3>;

/// Open knot vector of degree p.
struct KnotVector {
  int p = 2;
  std::vector<double> knots;

  int n_basis() const { return static_cast<int>(knots.size()) - p - 1; }
  double lo() const { return knots[static_cast<std::size_t>(p)]; }
  double hi() const { return knots[knots.size() - static_cast<std::size_t>(p) - 1]; }
  /// Index s with knots[s] <= x < knots[s+1]; the right end maps to the last non-empty span.
  int find_span(double x) const;
  /// Distinct non-empty spans as (start, end) knot values.
  std::vector<std::pair<double, double>> elements() const;
  std::vector<double> greville() const;
  void validate() const;
};

KnotVector uniform_open(int nel, int p);

/// Nonzero basis functions on a span: index of the first one, then ders[k][j]
/// is the k-th derivative of basis (first + j).
struct BasisEval {
  int first = 0;
  std::vector<std::vector<double>> ders;
};

/// Values and derivatives up to order nd (at most 3) at x.
BasisEval eval_basis(const KnotVector& kv, double x, int nd = 2);

/// Basis data of all supported functions of a patch at one point.
/// dR holds 3 entries per function, d2R 9 (row-major J,K), d3R 27.
struct PointEval {
  Point3 xi{};
  Point3 X{};
  double detJ = 0.0;
  std::array<double, 9> jac{};
  std::vector<int> ids;
  std::vector<double> R, dR, d2R, d3R;
  int n() const { return static_cast<int>(ids.size()); }
};

struct QuadraturePoint : PointEval {
  double w = 0.0;  // Gauss weight times Jacobian determinant
  int element = 0;
};

struct FacePoint : PointEval {
  double w = 0.0;       // Gauss weight times area element
  Point3 normal{};      // outward unit normal
  int face = 0;         // 2*dir + side
};

/// Trivariate tensor-product B-spline patch with equal degree in all directions.
struct SplinePatch {
  std::array<KnotVector, 3> kv;
  std::vector<Point3> ctrl;  // index i + n0*(j + n1*k)
  bool affine = false;       // geometry is an affine map of the parameters

  int degree() const { return kv[0].p; }
  std::array<int, 3> n() const { return {kv[0].n_basis(), kv[1].n_basis(), kv[2].n_basis()}; }
  int n_ctrl() const;
  int index(int i, int j, int k) const;
  std::array<int, 3> nel() const;
  int n_elements() const;
  std::array<int, 3> element_ijk(int e) const;

  /// Basis data at parameter xi; nd is the highest physical derivative order (1..3).
  PointEval eval(const Point3& xi, int nd = 2) const;
  Point3 map(const Point3& xi) const;
  double volume(int n_per_dir = 3) const;
};

/// Axis-aligned box with uniform open knots and Greville control layout.
SplinePatch build_patch(std::array<int, 3> nel, int p, std::array<double, 3> lengths, bool center_origin);

/// Uniform open knots with control points placed at the image of the Greville
/// abscissae; exact for maps that are multilinear in the parameters.
SplinePatch build_mapped_patch(std::array<int, 3> nel, int p, const std::function<Point3(const Point3&)>& map);

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

std::vector<QuadraturePoint> quadrature(const SplinePatch& patch, int n_per_dir = 3, int nd = 2);
std::vector<QuadraturePoint> element_quadrature(const SplinePatch& patch, int element, int n_per_dir, int nd);

/// Gauss points on one face (face = 2*dir + side, side 0 at the low parameter end).
std::vector<FacePoint> face_quadrature(const SplinePatch& patch, int face, int n_per_dir = 3, int nd = 2);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Refinement matrix of one knot vector: fine coefficients = T * coarse coefficients.
Eigen::MatrixXd knot_refinement_1d(const KnotVector& coarse, const std::vector<double>& new_knots, KnotVector& fine);

struct Refinement {
  SplinePatch fine;
  SparseMatrix prolongation;  // n_ctrl(fine) x n_ctrl(coarse)
};

/// Inserts the midpoint of every non-empty span in every direction.
Refinement knot_insert(const SplinePatch& patch);

/// Applies a scalar prolongation to each of the 3 components of a point list.
std::vector<Point3> prolong(const SparseMatrix& T, const std::vector<Point3>& coarse);

}  // namespace gradhom
