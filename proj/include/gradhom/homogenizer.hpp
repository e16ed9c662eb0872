#pragma once

#include <Eigen/Dense>
#include <utility>

#include "gradhom/rve.hpp"

namespace gradhom {

/// Homogenized stresses and condensed tangents.  Packed 36-row ordering: rows
/// 0..8 are P_{iJ} at 3i+J, rows 9..35 the hyperstress (iJK) at 9+9i+3J+K; the
/// columns follow the same ordering for (F, FF).
struct HomogenizedResponse {
  double psi = 0.0;
  Mat3 P;
  Tensor<3> PP_P;   // first moment of P
  Tensor<3> PP_PP;  // average hyperstress
  Tensor<3> PP;     // sum of both
  Tensor<4> G_P, G_PP;
  bool has_tangents = false;
  Tensor<4> A_FF;   // dP/dF
  Tensor<5> A_FG;   // dP/dFF
  Tensor<5> A_GF;   // dPP/dF
  Tensor<6> A_GG;   // dPP/dFF
  Eigen::Matrix<double, 36, 36> A = Eigen::Matrix<double, 36, 36>::Zero();

  std::array<double, 36> stress_packed() const;
};

std::pair<Mat3, Tensor<3>> average_kinematics(const RveSolution& sol);
HomogenizedResponse homogenized_stress(const RveSolution& sol);
std::pair<Tensor<4>, Tensor<4>> homogenized_stress_third(const RveSolution& sol);
double hill_mandel_gap(const RveSolution& sol, const Mat3& dF, const Tensor<3>& dFF);
/// P and PP recomputed from boundary tractions.  Only the part of PP symmetric in
/// its last two indices has a surface form, so the returned PP is that part.
std::pair<Mat3, Tensor<3>> boundary_stress_check(const RveSolution& sol);
HomogenizedResponse condensed_tangents(const RveSolution& sol);

/// Stresses and tangents in the 12-slot layout consumed by the assembly kernel.
PackedResponse to_packed(const HomogenizedResponse& h);

inline int stress_row(int i, int a) { return a < 3 ? 3 * i + a : 9 + 9 * i + (a - 3); }

}  // namespace gradhom
