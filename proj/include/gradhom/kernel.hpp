#pragma once

#include <Eigen/Dense>

#include "gradhom/materials.hpp"
#include "gradhom/spline.hpp"

namespace gradhom {

/// Packs the basis data of a point into b[12*A + a]: gradient in slots 0..2,
/// second gradient (row-major) in slots 3..11.
void pack_basis(const PointEval& pe, std::vector<double>& b);

/// Element-level accumulators of the generalized B-vector assembly.  Local dofs
/// are ordered (A, i) -> 3*A + i.  Drive columns: 0..8 are (s,T), 9..35 (s,T,U).
struct ElementAccumulator {
  int nb = 0;
  Eigen::MatrixXd K;  // 3nb x 3nb
  Eigen::VectorXd r;  // 3nb
  Eigen::MatrixXd L;  // 3nb x 36, sensitivity of r to the drive
  Eigen::MatrixXd N;  // 36 x 3nb, sensitivity of the stress moments to the dofs
  void reset(int n_basis, bool stiffness, bool drive);
  /// Moves the component-major working sums into K, r, L, N.
  void finalize();

  // working sums, local dofs ordered i*nb + A
  bool has_K = false, has_drive = false;
  Eigen::MatrixXd Kc, Lc, Nc;
  Eigen::VectorXd rc;
};

enum KernelFlags : unsigned { kResidual = 1u, kStiffness = 2u, kDrive = 4u };

/// Adds one quadrature point to the working sums.  X is the point location used for the drive
/// moments; V (36x36) receives w * g_r . T . g_c when kDrive is set.
void kernel_point(const double* b, int nb, const Point3& X, const PackedResponse& resp, double w, unsigned flags,
                  ElementAccumulator& acc, Eigen::Matrix<double, 36, 36>* V);

/// Drive moment vectors: stress slot weights of row r (0..35) at location X.
/// Fills g (36 x 36, column r = weights over packed slots 12*i + a).
void drive_moments(const Point3& X, Eigen::Matrix<double, 36, 36>& g);

}  // namespace gradhom
