#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gradhom/homogenizer.hpp"

namespace gradhom {

/// Condensed tangents against central differences of the homogenized stresses.
/// Blocks: dP/dF, dP/dFF, dPP/dF, dPP/dFF.  Each block error is max|A_fd - A|
/// over max(max|A_block|, 1e-6 max|A|).  F components are stepped by step,
/// FF components by step / edge.
struct TangentCheck {
  std::array<double, 4> block{};
  double max() const;
};

TangentCheck tangent_fd_check(const RveSolution& sol, const HomogenizedResponse& h, double step, double edge);

/// |work gap| / (|P| |dF| + |PP| |dFF|); the absolute gap when both stresses vanish.
double hill_mandel_relative(const RveSolution& sol, const HomogenizedResponse& h, const Mat3& dF,
                            const Tensor<3>& dFF);

/// Largest relative gap over n random variations (dFF symmetric in its last two
/// indices and scaled by 1 / edge).
double hill_mandel_max(const RveSolution& sol, const HomogenizedResponse& h, int n, double edge,
                       std::uint64_t seed = 1);

/// max of |avg grad w| and |avg grad grad w| (absolute).
double admissibility_error(const RveSolution& sol);

/// max|G_P - 1/2 P (x) (l^2/12) I| / |G_P| for the volume-averaged P.
double constant_p_oracle_error(const RveSolution& sol, double edge);

struct CheckRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass() const { return value <= threshold; }
};

}  // namespace gradhom
