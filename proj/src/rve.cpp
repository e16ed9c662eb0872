#include "gradhom/rve.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "gradhom/errors.hpp"

namespace gradhom {

std::array<double, 36> MacroDrive::packed() const {
  std::array<double, 36> d{};
  for (int i = 0; i < 9; ++i) d[i] = F[i];
  for (int i = 0; i < 27; ++i) d[9 + i] = FF[i];
  return d;
}

MacroDrive MacroDrive::unpack(const std::array<double, 36>& d) {
  MacroDrive m;
  for (int i = 0; i < 9; ++i) m.F[i] = d[i];
  for (int i = 0; i < 27; ++i) m.FF[i] = d[9 + i];
  return m;
}

std::vector<bool> cross_void_elements(const SplinePatch& patch, double edge) {
  const double a = edge / 12.0;             // half of the short edge l/6
  const double reach = edge / 12.0 + edge / 4.0;  // arm end measured from the center
  std::vector<bool> out(static_cast<std::size_t>(patch.n_elements()), false);
  for (int e = 0; e < patch.n_elements(); ++e) {
    const auto ijk = patch.element_ijk(e);
    Point3 xi;
    for (int d = 0; d < 3; ++d) {
      const auto span = patch.kv[d].elements()[static_cast<std::size_t>(ijk[d])];
      xi[d] = 0.5 * (span.first + span.second);
    }
    const Point3 c = patch.map(xi);
    for (int d = 0; d < 3; ++d) {
      const int u = (d + 1) % 3, v = (d + 2) % 3;
      if (std::abs(c[d]) < reach && std::abs(c[u]) < a && std::abs(c[v]) < a) out[e] = true;
    }
  }
  return out;
}

RveProblem rve_on_patch(SplinePatch patch, double edge, const Material& mat, BcKind bc, bool with_void,
                        double void_factor) {
  RveProblem prob;
  prob.patch = std::move(patch);
  prob.materials = {mat};
  prob.element_material.assign(static_cast<std::size_t>(prob.patch.n_elements()), 0);
  prob.bc = bc;
  if (with_void) {
    prob.materials.push_back(mat.scaled(void_factor));
    const auto v = cross_void_elements(prob.patch, edge);
    for (std::size_t e = 0; e < v.size(); ++e)
      if (v[e]) prob.element_material[e] = 1;
  }
  return prob;
}

RveProblem make_cube_rve(double edge, int nel, int p, const Material& mat, BcKind bc, bool with_void,
                         double void_factor) {
  return rve_on_patch(build_patch({nel, nel, nel}, p, {edge, edge, edge}, true), edge, mat, bc, with_void,
                      void_factor);
}

namespace {

ConstraintMap from_ctrl_map(const Eigen::SparseMatrix<double, Eigen::RowMajor>& Tc) {
  // lift a control-point map to dofs 3*A + i
  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < Tc.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Tc, r); it; ++it)
      for (int i = 0; i < 3; ++i) trip.emplace_back(3 * r + i, 3 * static_cast<int>(it.col()) + i, it.value());
  ConstraintMap cm;
  cm.T.resize(3 * Tc.rows(), 3 * Tc.cols());
  cm.T.setFromTriplets(trip.begin(), trip.end());
  cm.g = Eigen::VectorXd::Zero(3 * Tc.rows());
  return cm;
}

}  // namespace

ConstraintMap dirichlet_constraints(const RveProblem& problem, const MacroDrive&) {
  const auto& patch = problem.patch;
  const auto n = patch.n();
  std::vector<Eigen::Triplet<double>> trip;
  int f = 0;
  // value and normal-gradient rows pin the two outer control layers of every face
  for (int k = 2; k < n[2] - 2; ++k)
    for (int j = 2; j < n[1] - 2; ++j)
      for (int i = 2; i < n[0] - 2; ++i) trip.emplace_back(patch.index(i, j, k), f++, 1.0);
  Eigen::SparseMatrix<double, Eigen::RowMajor> Tc(patch.n_ctrl(), f);
  Tc.setFromTriplets(trip.begin(), trip.end());
  return from_ctrl_map(Tc);
}

ConstraintMap periodic_constraints(const RveProblem& problem, const MacroDrive&) {
  const auto& patch = problem.patch;
  const auto n = patch.n();
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 4) throw ValidationError("periodic constraints: need at least 2 elements per direction for p = 2");
  }
  // per direction: the last layer repeats the first, the second to last is set so
  // that the normal derivatives at both ends agree (uniform end spans)
  std::array<Eigen::MatrixXd, 3> P;
  for (int d = 0; d < 3; ++d) {
    const auto& U = patch.kv[d].knots;
    const int p = patch.kv[d].p;
    const double h0 = U[static_cast<std::size_t>(p + 1)] - U[static_cast<std::size_t>(p)];
    const double h1 = U[U.size() - static_cast<std::size_t>(p) - 1] - U[U.size() - static_cast<std::size_t>(p) - 2];
    if (std::abs(h0 - h1) > 1e-14) throw ValidationError("periodic constraints: non-conforming end spans");
    const int m = n[d] - 2;
    P[d] = Eigen::MatrixXd::Zero(n[d], m);
    for (int r = 0; r < m; ++r) P[d](r, r) = 1.0;
    P[d](n[d] - 2, 0) = 2.0;
    P[d](n[d] - 2, 1) = -1.0;
    P[d](n[d] - 1, 0) = 1.0;
  }
  const int m0 = n[0] - 2, m1 = n[1] - 2, m2 = n[2] - 2;
  // free classes: all reduced indices except the corner value/gradient pins
  std::vector<int> col_of(static_cast<std::size_t>(m0 * m1 * m2), -1);
  int f = 0;
  for (int k = 0; k < m2; ++k)
    for (int j = 0; j < m1; ++j)
      for (int i = 0; i < m0; ++i) {
        const bool pinned = (i + j + k <= 1);
        if (!pinned) col_of[static_cast<std::size_t>(i + m0 * (j + m1 * k))] = f++;
      }
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i)
        for (int c = 0; c < m2; ++c) {
          const double tk = P[2](k, c);
          if (tk == 0.0) continue;
          for (int b = 0; b < m1; ++b) {
            const double tj = P[1](j, b);
            if (tj == 0.0) continue;
            for (int a = 0; a < m0; ++a) {
              const double ti = P[0](i, a);
              if (ti == 0.0) continue;
              const int col = col_of[static_cast<std::size_t>(a + m0 * (b + m1 * c))];
              if (col >= 0) trip.emplace_back(patch.index(i, j, k), col, ti * tj * tk);
            }
          }
        }
  Eigen::SparseMatrix<double, Eigen::RowMajor> Tc(patch.n_ctrl(), f);
  Tc.setFromTriplets(trip.begin(), trip.end());
  return from_ctrl_map(Tc);
}

ConstraintMap build_constraints(const RveProblem& problem, const MacroDrive& drive) {
  return problem.bc == BcKind::Dirichlet ? dirichlet_constraints(problem, drive) : periodic_constraints(problem, drive);
}

BoundaryFit fit_boundary(const RveProblem& problem, const MacroDrive& drive) {
  const auto& patch = problem.patch;
  const int p = patch.degree();
  const auto n = patch.n();
  // columns: control points in the two outer layers
  std::vector<int> col_of(static_cast<std::size_t>(patch.n_ctrl()), -1);
  std::vector<int> face_of_col;
  BoundaryFit fit;
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        const int ijk[3] = {i, j, k};
        int face = -1;
        for (int d = 0; d < 3 && face < 0; ++d) {
          if (ijk[d] <= 1) face = 2 * d;
          else if (ijk[d] >= n[d] - 2) face = 2 * d + 1;
        }
        if (face < 0) continue;
        const int A = patch.index(i, j, k);
        col_of[A] = static_cast<int>(fit.ctrl.size());
        fit.ctrl.push_back(A);
        face_of_col.push_back(face);
      }
  const int ncol = static_cast<int>(fit.ctrl.size());
  const double h = std::min({patch.ctrl[patch.index(n[0] - 1, 0, 0)][0] - patch.ctrl[0][0],
                             patch.ctrl[patch.index(0, n[1] - 1, 0)][1] - patch.ctrl[0][1],
                             patch.ctrl[patch.index(0, 0, n[2] - 1)][2] - patch.ctrl[0][2]}) /
                   std::max({patch.nel()[0], patch.nel()[1], patch.nel()[2]});

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::array<double, 3>> rhs;
  std::vector<char> is_grad;
  int row = 0;
  for (int face = 0; face < 6; ++face) {
    for (const auto& fp : face_quadrature(patch, face, p + 1, 1)) {
      const auto& X = fp.X;
      std::array<double, 3> val{}, dn{};
      for (int i = 0; i < 3; ++i) {
        double v = 0.0, g = 0.0;
        for (int J = 0; J < 3; ++J) {
          v += drive.F(i, J) * X[J];
          double gij = drive.F(i, J);
          for (int K = 0; K < 3; ++K) {
            v += 0.5 * drive.FF(i, J, K) * X[J] * X[K];
            gij += 0.5 * (drive.FF(i, J, K) + drive.FF(i, K, J)) * X[K];
          }
          g += gij * fp.normal[J];
        }
        val[i] = v;
        dn[i] = g * h;
      }
      for (int A = 0; A < fp.n(); ++A) {
        const int c = col_of[fp.ids[A]];
        double dR = 0.0;
        for (int J = 0; J < 3; ++J) dR += fp.dR[3 * A + J] * fp.normal[J];
        if (c < 0) {
          if (std::abs(fp.R[A]) > 0.0 || std::abs(dR) > 1e-12 / h)
            throw ValidationError("fit_boundary: interior control point influences the boundary");
          continue;
        }
        if (fp.R[A] != 0.0) trip.emplace_back(row, c, fp.R[A]);
        if (dR != 0.0) trip.emplace_back(row + 1, c, dR * h);
      }
      rhs.push_back(val);
      rhs.push_back(dn);
      is_grad.push_back(0);
      is_grad.push_back(1);
      row += 2;
    }
  }
  Eigen::SparseMatrix<double> A(row, ncol);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::MatrixXd b(row, 3);
  for (int r = 0; r < row; ++r)
    for (int i = 0; i < 3; ++i) b(r, i) = rhs[r][i];
  Eigen::SparseMatrix<double> AtA = A.transpose() * A;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(AtA);
  if (ldlt.info() != Eigen::Success) throw RankDeficient("fit_boundary: factorization failed");
  const Eigen::VectorXd D = ldlt.vectorD();
  const double dmax = D.cwiseAbs().maxCoeff();
  for (int i = 0; i < D.size(); ++i)
    if (!(std::abs(D[i]) > 1e-12 * dmax)) {
      // the pivot order is permuted; report the face of the column with the smallest pivot
      const int col = ldlt.permutationPinv().indices()[i];
      throw RankDeficient("fit_boundary: rank-deficient least-squares system on face " +
                          std::to_string(face_of_col[static_cast<std::size_t>(col)]));
    }
  const Eigen::MatrixXd Atb = A.transpose() * b;
  const Eigen::MatrixXd x = ldlt.solve(Atb);
  const Eigen::MatrixXd res = A * x - b;
  for (int r = 0; r < row; ++r) {
    const double e = res.row(r).cwiseAbs().maxCoeff();
    if (is_grad[r])
      fit.gradient_residual = std::max(fit.gradient_residual, e / h);
    else
      fit.value_residual = std::max(fit.value_residual, e);
  }
  fit.values.resize(fit.ctrl.size());
  for (int c = 0; c < ncol; ++c) fit.values[c] = {x(c, 0), x(c, 1), x(c, 2)};
  return fit;
}

std::shared_ptr<const RveModel> make_rve_model(const RveProblem& problem) {
  auto m = std::make_shared<RveModel>();
  m->problem = problem;
  const auto& patch = m->problem.patch;
  if (patch.degree() < 2) throw ValidationError("RVE: spline degree must be >= 2 for second-gradient problems");
  if (static_cast<int>(problem.element_material.size()) != patch.n_elements())
    throw ValidationError("RVE: element material table size mismatch");
  for (int id : problem.element_material)
    if (id < 0 || id >= static_cast<int>(problem.materials.size())) throw ValidationError("RVE: unknown material id");
  m->cmap = build_constraints(m->problem, MacroDrive{});

  const int ne = patch.n_elements();
  m->elem_first_qp.assign(static_cast<std::size_t>(ne + 1), 0);
  for (int e = 0; e < ne; ++e) {
    auto pts = element_quadrature(patch, e, problem.quad_n, 2);
    m->elem_first_qp[e + 1] = m->elem_first_qp[e] + static_cast<int>(pts.size());
    for (auto& q : pts) {
      std::vector<double> b;
      pack_basis(q, b);
      m->bvec.push_back(std::move(b));
      m->volume += q.w;
      // values are not needed by the hot loops; keep R for field sampling
      q.d2R.clear();
      q.d2R.shrink_to_fit();
      q.dR.clear();
      q.dR.shrink_to_fit();
      m->qps.push_back(std::move(q));
    }
  }
  m->elem_active.assign(static_cast<std::size_t>(ne), 0);
  const auto& T = m->cmap.T;
  for (int e = 0; e < ne; ++e) {
    const auto& ids = m->qps[m->elem_first_qp[e]].ids;
    for (int A : ids)
      for (int i = 0; i < 3; ++i)
        if (T.outerIndexPtr()[3 * A + i + 1] > T.outerIndexPtr()[3 * A + i]) m->elem_active[e] = 1;
  }
  return m;
}

Assembly assemble(const RveModel& model, const MacroDrive& drive, const Eigen::VectorXd& q_free, unsigned what) {
  const auto& T = model.cmap.T;
  const int nf = model.n_free();
  const Eigen::VectorXd q = model.cmap.expand(q_free);
  const bool want_K = what & kAsmStiffness;
  const bool want_drive = what & kAsmDrive;
  const bool want_avg = what & kAsmAverages;

  Assembly out;
  out.r = Eigen::VectorXd::Zero(nf);
  if (want_drive) {
    out.L = Eigen::MatrixXd::Zero(nf, 36);
    out.N = Eigen::MatrixXd::Zero(36, nf);
  }
  std::vector<Eigen::Triplet<double>> trip;
  ElementAccumulator acc;
  PackedResponse resp;
  Eigen::Matrix<double, 36, 36> V = Eigen::Matrix<double, 36, 36>::Zero();
  RveAverages& avg = out.avg;
  const int* Tptr = T.outerIndexPtr();
  const int* Tidx = T.innerIndexPtr();
  const double* Tval = T.valuePtr();

  for (int e = 0; e < model.problem.patch.n_elements(); ++e) {
    const bool active = model.elem_active[e];
    if (!active && !want_avg && !want_drive) continue;
    const Material& mat = model.problem.materials[static_cast<std::size_t>(model.problem.element_material[e])];
    const int q0 = model.elem_first_qp[e], q1 = model.elem_first_qp[e + 1];
    const auto& ids = model.qps[q0].ids;
    const int nb = static_cast<int>(ids.size());
    unsigned flags = kResidual;
    if (want_K && active) flags |= kStiffness;
    if (want_drive) flags |= kDrive;
    acc.reset(nb, flags & kStiffness, want_drive);
    const bool tangents = (flags & (kStiffness | kDrive)) != 0;

    for (int iq = q0; iq < q1; ++iq) {
      const auto& qp = model.qps[iq];
      const double* b = model.bvec[iq].data();
      double F[9], FF[27], gw[9] = {0}, hw[27] = {0};
      for (int A = 0; A < nb; ++A) {
        const int id = ids[A];
        for (int i = 0; i < 3; ++i) {
          const double qa = q[3 * id + i];
          if (qa == 0.0) continue;
          for (int J = 0; J < 3; ++J) gw[3 * i + J] += qa * b[12 * A + J];
          for (int JK = 0; JK < 9; ++JK) hw[9 * i + JK] += qa * b[12 * A + 3 + JK];
        }
      }
      for (int i = 0; i < 3; ++i)
        for (int J = 0; J < 3; ++J) {
          double f = drive.F(i, J) + gw[3 * i + J];
          for (int K = 0; K < 3; ++K) {
            f += drive.FF(i, J, K) * qp.X[K];
            FF[9 * i + 3 * J + K] = drive.FF(i, J, K) + hw[9 * i + 3 * J + K];
          }
          F[3 * i + J] = f;
        }
      mat.evaluate(F, FF, resp, tangents);
      kernel_point(b, nb, qp.X, resp, qp.w, flags, acc, want_drive ? &V : nullptr);

      if (want_avg) {
        const double w = qp.w;
        avg.psi += w * resp.psi;
        for (int i = 0; i < 9; ++i) {
          avg.F[i] += w * F[i];
          avg.grad_w[i] += w * gw[i];
        }
        for (int i = 0; i < 27; ++i) {
          avg.FF[i] += w * FF[i];
          avg.hess_w[i] += w * hw[i];
        }
        for (int i = 0; i < 3; ++i)
          for (int J = 0; J < 3; ++J) {
            const double P = resp.S[12 * i + J];
            avg.P(i, J) += w * P;
            for (int K = 0; K < 3; ++K) {
              const double H = resp.S[12 * i + 3 + 3 * J + K];
              avg.PP_P(i, J, K) += w * P * qp.X[K];
              avg.PP_PP(i, J, K) += w * H;
              for (int L = 0; L < 3; ++L) {
                avg.G_P(i, J, K, L) += w * 0.5 * P * qp.X[K] * qp.X[L];
                avg.G_PP(i, J, K, L) += w * H * qp.X[L];
              }
            }
          }
      }
    }
    if (!active) continue;
    acc.finalize();

    // scatter through the constraint rows
    for (int A = 0; A < nb; ++A)
      for (int i = 0; i < 3; ++i) {
        const int l = 3 * A + i, gdof = 3 * ids[A] + i;
        for (int p = Tptr[gdof]; p < Tptr[gdof + 1]; ++p) {
          const int fcol = Tidx[p];
          const double c = Tval[p];
          out.r[fcol] += c * acc.r[l];
          if (want_drive) {
            out.L.row(fcol) += c * acc.L.row(l);
            out.N.col(fcol) += c * acc.N.col(l);
          }
          if (flags & kStiffness)
            for (int B = 0; B < nb; ++B)
              for (int s = 0; s < 3; ++s) {
                const int l2 = 3 * B + s, g2 = 3 * ids[B] + s;
                const double kv = acc.K(l, l2);
                if (kv == 0.0) continue;
                for (int p2 = Tptr[g2]; p2 < Tptr[g2 + 1]; ++p2) trip.emplace_back(fcol, Tidx[p2], c * Tval[p2] * kv);
              }
        }
      }
  }

  if (want_K) {
    out.K.resize(nf, nf);
    out.K.setFromTriplets(trip.begin(), trip.end());
  }
  const double iv = 1.0 / model.volume;
  if (want_drive) {
    avg.V = V * iv;
    out.N *= iv;
  }
  if (want_avg) {
    avg.psi *= iv;
    avg.F *= iv;
    avg.grad_w *= iv;
    avg.FF *= iv;
    avg.hess_w *= iv;
    avg.P *= iv;
    avg.PP_P *= iv;
    avg.PP_PP *= iv;
    avg.G_P *= iv;
    avg.G_PP *= iv;
  }
  return out;
}

RveSolution solve(std::shared_ptr<const RveModel> model, const MacroDrive& drive, const Eigen::VectorXd* q0) {
  if (!(det(drive.F) > 0.0)) throw ValidationError("RVE drive: det F must be positive");
  RveSolution sol;
  sol.model = model;
  sol.drive = drive;
  const int nf = model->n_free();
  sol.q = (q0 && q0->size() == nf) ? *q0 : Eigen::VectorXd::Zero(nf);
  const auto& opt = model->problem.newton;
  auto factor = std::make_shared<SparseSolver>();
  double r0 = -1.0;
  Assembly a;
  for (int it = 0;; ++it) {
    a = assemble(*model, drive, sol.q, kAsmResidual | kAsmStiffness);
    const double rn = a.r.norm();
    sol.residuals.push_back(rn);
    if (!std::isfinite(rn)) throw NonConvergence("RVE Newton: non-finite residual", sol.residuals);
    if (r0 < 0.0) r0 = rn;
    if (rn <= opt.atol || (it > 0 && rn <= opt.rtol * r0)) break;
    if (it >= opt.max_iter)
      throw NonConvergence("RVE Newton: no convergence after " + std::to_string(opt.max_iter) + " iterations",
                           sol.residuals);
    factor->factorize(a.K);
    sol.q -= factor->solve(a.r);
    ++sol.iterations;
  }
  factor->factorize(a.K);
  sol.K = a.K;
  sol.factor = factor;
  Assembly d = assemble(*model, drive, sol.q, kAsmDrive | kAsmAverages);
  sol.L = std::move(d.L);
  sol.N = std::move(d.N);
  sol.avg = d.avg;
  return sol;
}

RveSolution solve(const RveProblem& problem, const MacroDrive& drive) { return solve(make_rve_model(problem), drive); }

}  // namespace gradhom
