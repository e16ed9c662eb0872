#include "gradhom/homogenizer.hpp"

#include "gradhom/errors.hpp"

namespace gradhom {

std::array<double, 36> HomogenizedResponse::stress_packed() const {
  std::array<double, 36> s{};
  for (int i = 0; i < 9; ++i) s[i] = P[i];
  for (int i = 0; i < 27; ++i) s[9 + i] = PP[i];
  return s;
}

std::pair<Mat3, Tensor<3>> average_kinematics(const RveSolution& sol) { return {sol.avg.F, sol.avg.FF}; }

HomogenizedResponse homogenized_stress(const RveSolution& sol) {
  HomogenizedResponse h;
  h.psi = sol.avg.psi;
  h.P = sol.avg.P;
  h.PP_P = sol.avg.PP_P;
  h.PP_PP = sol.avg.PP_PP;
  h.PP = h.PP_P + h.PP_PP;
  h.G_P = sol.avg.G_P;
  h.G_PP = sol.avg.G_PP;
  return h;
}

std::pair<Tensor<4>, Tensor<4>> homogenized_stress_third(const RveSolution& sol) { return {sol.avg.G_P, sol.avg.G_PP}; }

HomogenizedResponse condensed_tangents(const RveSolution& sol) {
  HomogenizedResponse h = homogenized_stress(sol);
  if (!sol.factor) throw SolverError("condensed_tangents: solution carries no factorization");
  h.A = sol.avg.V;
  if (sol.model->n_free() > 0) {
    const Eigen::MatrixXd KinvL = sol.factor->solve(sol.L);
    h.A.noalias() -= sol.N * KinvL;
  }
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) h.A_FF[static_cast<std::size_t>(9 * r + c)] = h.A(r, c);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 27; ++c) h.A_FG[static_cast<std::size_t>(27 * r + c)] = h.A(r, 9 + c);
  for (int r = 0; r < 27; ++r)
    for (int c = 0; c < 9; ++c) h.A_GF[static_cast<std::size_t>(9 * r + c)] = h.A(9 + r, c);
  for (int r = 0; r < 27; ++r)
    for (int c = 0; c < 27; ++c) h.A_GG[static_cast<std::size_t>(27 * r + c)] = h.A(9 + r, 9 + c);
  h.has_tangents = true;
  return h;
}

PackedResponse to_packed(const HomogenizedResponse& h) {
  PackedResponse p;
  p.psi = h.psi;
  p.second_gradient = true;
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 12; ++a) {
      const int r = stress_row(i, a);
      p.S[12 * i + a] = r < 9 ? h.P[r] : h.PP[r - 9];
      for (int s = 0; s < 3; ++s)
        for (int b = 0; b < 12; ++b) p.T[(12 * i + a) * 36 + 12 * s + b] = h.A(r, stress_row(s, b));
    }
  return p;
}

namespace {

// Micro fields at a point with basis data pe (dR, d2R, optional d3R) and full dofs q.
struct MicroFields {
  double F[9], FF[27], gF[27], gFF[81];  // gF[(sT)*3 + K] = dF_sT/dX_K, gFF[(sTU)*3 + K]
};

void micro_fields(const PointEval& pe, const Eigen::VectorXd& q, const MacroDrive& d, bool third, MicroFields& m) {
  for (int i = 0; i < 9; ++i) m.F[i] = d.F[i];
  for (int i = 0; i < 27; ++i) {
    m.FF[i] = d.FF[i];
    m.gF[i] = d.FF[i];
  }
  for (int i = 0; i < 81; ++i) m.gFF[i] = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int K = 0; K < 3; ++K) m.F[3 * i + J] += d.FF(i, J, K) * pe.X[K];
  for (int A = 0; A < pe.n(); ++A) {
    const int id = pe.ids[A];
    for (int i = 0; i < 3; ++i) {
      const double qa = q[3 * id + i];
      if (qa == 0.0) continue;
      for (int J = 0; J < 3; ++J) m.F[3 * i + J] += qa * pe.dR[3 * A + J];
      for (int JK = 0; JK < 9; ++JK) {
        m.FF[9 * i + JK] += qa * pe.d2R[9 * A + JK];
        m.gF[9 * i + JK] += qa * pe.d2R[9 * A + JK];
      }
      if (third)
        for (int JKL = 0; JKL < 27; ++JKL) m.gFF[27 * i + JKL] += qa * pe.d3R[27 * A + JKL];
    }
  }
}

int element_of(const SplinePatch& patch, const Point3& xi) {
  const auto ne = patch.nel();
  int e[3];
  for (int d = 0; d < 3; ++d) {
    const int span = patch.kv[d].find_span(xi[d]);
    // count non-empty spans before this one
    int c = 0;
    for (int s = patch.kv[d].p; s < span; ++s)
      if (patch.kv[d].knots[s + 1] > patch.kv[d].knots[s]) ++c;
    e[d] = c;
  }
  return e[0] + ne[0] * (e[1] + ne[1] * e[2]);
}

}  // namespace

double hill_mandel_gap(const RveSolution& sol, const Mat3& dF, const Tensor<3>& dFF) {
  const RveModel& model = *sol.model;
  MacroDrive dd;
  dd.F = dF;
  dd.FF = dFF;
  const auto dp = dd.packed();
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(model.n_free());
  if (model.n_free() > 0) {
    Eigen::VectorXd rhs = sol.L * Eigen::Map<const Eigen::VectorXd>(dp.data(), 36);
    dq = -sol.factor->solve(rhs);
  }
  const Eigen::VectorXd q = sol.q_full();
  const Eigen::VectorXd dqf = model.cmap.expand(dq);
  double work = 0.0;
  PackedResponse resp;
  for (int e = 0; e < model.problem.patch.n_elements(); ++e) {
    const Material& mat = model.problem.materials[static_cast<std::size_t>(model.problem.element_material[e])];
    for (int iq = model.elem_first_qp[e]; iq < model.elem_first_qp[e + 1]; ++iq) {
      const auto& qp = model.qps[iq];
      const double* b = model.bvec[iq].data();
      double F[9], FF[27], dFm[9], dFFm[27];
      for (int i = 0; i < 3; ++i)
        for (int J = 0; J < 3; ++J) {
          F[3 * i + J] = sol.drive.F(i, J);
          dFm[3 * i + J] = dF(i, J);
          for (int K = 0; K < 3; ++K) {
            F[3 * i + J] += sol.drive.FF(i, J, K) * qp.X[K];
            dFm[3 * i + J] += dFF(i, J, K) * qp.X[K];
            FF[9 * i + 3 * J + K] = sol.drive.FF(i, J, K);
            dFFm[9 * i + 3 * J + K] = dFF(i, J, K);
          }
        }
      for (int A = 0; A < qp.n(); ++A) {
        const int id = qp.ids[A];
        for (int i = 0; i < 3; ++i) {
          const double qa = q[3 * id + i], da = dqf[3 * id + i];
          for (int J = 0; J < 3; ++J) {
            F[3 * i + J] += qa * b[12 * A + J];
            dFm[3 * i + J] += da * b[12 * A + J];
          }
          for (int JK = 0; JK < 9; ++JK) {
            FF[9 * i + JK] += qa * b[12 * A + 3 + JK];
            dFFm[9 * i + JK] += da * b[12 * A + 3 + JK];
          }
        }
      }
      mat.evaluate(F, FF, resp, false);
      double s = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int J = 0; J < 3; ++J) s += resp.S[12 * i + J] * dFm[3 * i + J];
        for (int JK = 0; JK < 9; ++JK) s += resp.S[12 * i + 3 + JK] * dFFm[9 * i + JK];
      }
      work += qp.w * s;
    }
  }
  work /= model.volume;
  const HomogenizedResponse h = homogenized_stress(sol);
  double macro = 0.0;
  for (int i = 0; i < 9; ++i) macro += h.P[i] * dF[i];
  for (int i = 0; i < 27; ++i) macro += h.PP[i] * dFF[i];
  return work - macro;
}

std::pair<Mat3, Tensor<3>> boundary_stress_check(const RveSolution& sol) {
  const RveModel& model = *sol.model;
  const auto& patch = model.problem.patch;
  const Eigen::VectorXd q = sol.q_full();
  Mat3 Ps;
  Tensor<3> PPs;
  PackedResponse resp;
  MicroFields m;
  for (int face = 0; face < 6; ++face)
    for (const auto& fp : face_quadrature(patch, face, model.problem.quad_n, 3)) {
      const int e = element_of(patch, fp.xi);
      const Material& mat = model.problem.materials[static_cast<std::size_t>(model.problem.element_material[e])];
      micro_fields(fp, q, sol.drive, true, m);
      mat.evaluate(m.F, m.FF, resp, mat.second_gradient());
      double div[9] = {0};
      if (resp.second_gradient)
        for (int i = 0; i < 3; ++i)
          for (int J = 0; J < 3; ++J)
            for (int K = 0; K < 3; ++K) {
              const double* Trow = &resp.T[static_cast<std::size_t>((12 * i + 3 + 3 * J + K) * 36)];
              double v = 0.0;
              for (int s = 0; s < 3; ++s)
                for (int T = 0; T < 3; ++T) {
                  v += Trow[12 * s + T] * m.gF[3 * (3 * s + T) + K];
                  for (int U = 0; U < 3; ++U) v += Trow[12 * s + 3 + 3 * T + U] * m.gFF[3 * (9 * s + 3 * T + U) + K];
                }
              div[3 * i + J] += v;
            }
      const auto& N = fp.normal;
      const auto& X = fp.X;
      for (int i = 0; i < 3; ++i) {
        double t = 0.0, pn[3] = {0, 0, 0};
        for (int J = 0; J < 3; ++J) {
          t += (resp.S[12 * i + J] - div[3 * i + J]) * N[J];
          for (int K = 0; K < 3; ++K) pn[J] += resp.S[12 * i + 3 + 3 * J + K] * N[K];
        }
        for (int J = 0; J < 3; ++J) {
          Ps(i, J) += fp.w * (pn[J] + t * X[J]);
          for (int K = 0; K < 3; ++K)
            PPs(i, J, K) += fp.w * (0.5 * (pn[J] * X[K] + pn[K] * X[J]) + 0.5 * t * X[J] * X[K]);
        }
      }
    }
  Ps *= 1.0 / model.volume;
  PPs *= 1.0 / model.volume;
  return {Ps, PPs};
}

}  // namespace gradhom
