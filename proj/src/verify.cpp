#include "gradhom/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gradhom {

double TangentCheck::max() const { return *std::max_element(block.begin(), block.end()); }

TangentCheck tangent_fd_check(const RveSolution& sol, const HomogenizedResponse& h, double step, double edge) {
  Eigen::Matrix<double, 36, 36> fd;
  const auto base = sol.drive.packed();
  for (int c = 0; c < 36; ++c) {
    const double hc = c < 9 ? step : step / edge;
    std::array<double, 36> s[2];
    for (int k = 0; k < 2; ++k) {
      auto d = base;
      d[static_cast<std::size_t>(c)] += k == 0 ? hc : -hc;
      const RveSolution ps = solve(sol.model, MacroDrive::unpack(d), &sol.q);
      s[k] = homogenized_stress(ps).stress_packed();
    }
    for (int r = 0; r < 36; ++r) fd(r, c) = (s[0][r] - s[1][r]) / (2.0 * hc);
  }
  const double amax = h.A.cwiseAbs().maxCoeff();
  TangentCheck out;
  const int r0[4] = {0, 0, 9, 9}, nr[4] = {9, 9, 27, 27}, c0[4] = {0, 9, 0, 9}, nc[4] = {9, 27, 9, 27};
  for (int b = 0; b < 4; ++b) {
    const auto a = h.A.block(r0[b], c0[b], nr[b], nc[b]);
    const auto f = fd.block(r0[b], c0[b], nr[b], nc[b]);
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-6 * amax);
    out.block[b] = scale > 0.0 ? (f - a).cwiseAbs().maxCoeff() / scale : (f - a).cwiseAbs().maxCoeff();
  }
  return out;
}

double hill_mandel_relative(const RveSolution& sol, const HomogenizedResponse& h, const Mat3& dF,
                            const Tensor<3>& dFF) {
  const double gap = std::abs(hill_mandel_gap(sol, dF, dFF));
  const double den = norm(h.P) * norm(dF) + norm(h.PP) * norm(dFF);
  return den > 0.0 ? gap / den : gap;
}

double hill_mandel_max(const RveSolution& sol, const HomogenizedResponse& h, int n, double edge,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    Mat3 dF;
    Tensor<3> dFF;
    for (auto& v : dF.data) v = u(rng);
    for (int i = 0; i < 3; ++i)
      for (int J = 0; J < 3; ++J)
        for (int K = J; K < 3; ++K) {
          const double v = u(rng) / edge;
          dFF(i, J, K) = v;
          dFF(i, K, J) = v;
        }
    worst = std::max(worst, hill_mandel_relative(sol, h, dF, dFF));
  }
  return worst;
}

double admissibility_error(const RveSolution& sol) {
  return std::max(max_abs(sol.avg.grad_w), max_abs(sol.avg.hess_w));
}

double constant_p_oracle_error(const RveSolution& sol, double edge) {
  Tensor<4> ref;
  const double m = edge * edge / 12.0;
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int K = 0; K < 3; ++K) ref(i, J, K, K) = 0.5 * sol.avg.P(i, J) * m;
  const double n = norm(sol.avg.G_P);
  return n > 0.0 ? max_abs(sol.avg.G_P - ref) / n : max_abs(sol.avg.G_P - ref);
}

}  // namespace gradhom
