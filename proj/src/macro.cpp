#include "gradhom/macro.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "gradhom/errors.hpp"
#include "gradhom/kernel.hpp"

namespace gradhom {

double CookGeometry::volume() const {
  const double left = left_height_mm, right = right_high_mm - right_low_mm;
  return 0.5 * (left + right) * length_mm * thickness_mm;
}

double CookGeometry::right_face_area() const { return (right_high_mm - right_low_mm) * thickness_mm; }

double MacroState::balance_error() const {
  const double a = norm(applied);
  Vec3 d;
  for (int i = 0; i < 3; ++i) d[i] = reaction[i] - applied[i];
  return a > 0.0 ? norm(d) / a : norm(d);
}

MacroProblem cooks_on_patch(SplinePatch patch, const Vec3& resultant_N) {
  MacroProblem prob;
  const int p = patch.degree();
  if (p < 2) throw ValidationError("macro: spline degree must be >= 2");
  prob.patch = std::move(patch);
  prob.quad_n = p + 1;
  const auto n = prob.patch.n();
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < 2; ++i) prob.clamped.push_back(prob.patch.index(i, j, k));
  prob.traction_face = 1;
  double area = 0.0;
  for (const auto& fp : face_quadrature(prob.patch, prob.traction_face, prob.quad_n, 1)) area += fp.w;
  for (int i = 0; i < 3; ++i) prob.traction[i] = resultant_N[i] / area;
  return prob;
}

MacroProblem build_cooks(std::array<int, 3> nel, int p, const CookGeometry& g, const Vec3& resultant_N) {
  if (p < 2) throw ValidationError("build_cooks: degree must be >= 2");
  for (int d = 0; d < 3; ++d)
    if (nel[d] < 1) throw ValidationError("build_cooks: element counts must be positive");
  if (!(g.length_mm > 0.0 && g.left_height_mm > 0.0 && g.right_high_mm > g.right_low_mm && g.thickness_mm > 0.0))
    throw ValidationError("build_cooks: degenerate geometry");
  auto map = [g](const Point3& xi) -> Point3 {
    const double lo = g.right_low_mm * xi[0];
    const double hi = g.left_height_mm + (g.right_high_mm - g.left_height_mm) * xi[0];
    return {g.length_mm * xi[0], lo + xi[1] * (hi - lo), g.thickness_mm * xi[2]};
  };
  return cooks_on_patch(build_mapped_patch(nel, p, map), resultant_N);
}

std::shared_ptr<const MacroModel> make_macro_model(const MacroProblem& problem) {
  if (!problem.rve && !problem.material) throw ValidationError("macro: no constitutive model");
  auto m = std::make_shared<MacroModel>();
  m->problem = problem;
  const auto& patch = m->problem.patch;
  if (patch.degree() < 2) throw ValidationError("macro: spline degree must be >= 2");
  const int ne = patch.n_elements();
  m->elem_first_qp.assign(static_cast<std::size_t>(ne + 1), 0);
  for (int e = 0; e < ne; ++e) {
    auto pts = element_quadrature(patch, e, problem.quad_n, 2);
    m->elem_first_qp[e + 1] = m->elem_first_qp[e] + static_cast<int>(pts.size());
    for (auto& q : pts) {
      if (!(q.detJ > 0.0)) throw ValidationError("macro: non-positive geometry Jacobian in element " + std::to_string(e));
      std::vector<double> b;
      pack_basis(q, b);
      m->bvec.push_back(std::move(b));
      m->volume += q.w;
      m->qps.push_back(std::move(q));
    }
  }
  const int nc = patch.n_ctrl();
  m->free_index.assign(static_cast<std::size_t>(3 * nc), 0);
  for (int A : problem.clamped) {
    if (A < 0 || A >= nc) throw ValidationError("macro: clamped control point out of range");
    for (int i = 0; i < 3; ++i) m->free_index[3 * A + i] = -1;
  }
  for (auto& f : m->free_index)
    if (f == 0) f = m->n_free++;
  m->f_ext = Eigen::VectorXd::Zero(3 * nc);
  for (const auto& fp : face_quadrature(patch, problem.traction_face, problem.quad_n, 1))
    for (int A = 0; A < fp.n(); ++A)
      for (int i = 0; i < 3; ++i) m->f_ext[3 * fp.ids[A] + i] += fp.w * fp.R[A] * problem.traction[i];
  for (int A : problem.clamped)
    for (int i = 0; i < 3; ++i)
      if (m->f_ext[3 * A + i] != 0.0) throw ValidationError("macro: traction boundary touches the clamped boundary");
  return m;
}

MacroDrive macro_kinematics(const PointEval& pe, const std::vector<Point3>& u) {
  MacroDrive d;
  for (int A = 0; A < pe.n(); ++A) {
    const Point3& ua = u[static_cast<std::size_t>(pe.ids[A])];
    for (int i = 0; i < 3; ++i) {
      if (ua[i] == 0.0) continue;
      for (int J = 0; J < 3; ++J) {
        d.F(i, J) += ua[i] * pe.dR[3 * A + J];
        for (int K = 0; K < 3; ++K) d.FF(i, J, K) += ua[i] * pe.d2R[9 * A + 3 * J + K];
      }
    }
  }
  return d;
}

namespace {

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  const int nt = std::max(1, std::min(threads, n));
  if (nt == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

void update_points(const MacroModel& model, const std::vector<Point3>& u, std::vector<GaussPointState>& gp,
                   int threads) {
  const int nq = static_cast<int>(model.qps.size());
  gp.resize(static_cast<std::size_t>(nq));
  std::vector<std::string> errors(static_cast<std::size_t>(nq));
  const auto& prob = model.problem;
  parallel_for(nq, threads, [&](int g) {
    auto& st = gp[static_cast<std::size_t>(g)];
    const MacroDrive d = macro_kinematics(model.qps[static_cast<std::size_t>(g)], u);
    if (st.valid && st.drive.packed() == d.packed()) {
      st.rve_iterations = 0;
      return;
    }
    st.valid = false;
    try {
      if (!(det(d.F) > 0.0)) throw NonPositiveJacobian("det F <= 0");
      if (prob.rve) {
        const RveSolution sol = solve(prob.rve, d, st.q.size() ? &st.q : nullptr);
        st.response = to_packed(condensed_tangents(sol));
        st.q = sol.q;
        st.rve_iterations = sol.iterations;
      } else {
        prob.material->evaluate(d.F.data.data(), d.FF.data.data(), st.response, true);
        st.rve_iterations = 0;
      }
      st.drive = d;
      st.valid = true;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(g)] = e.what();
    }
  });
  for (int g = 0; g < nq; ++g)
    if (!errors[static_cast<std::size_t>(g)].empty()) {
      const int e = model.qps[static_cast<std::size_t>(g)].element;
      const int k = g - model.elem_first_qp[static_cast<std::size_t>(e)];
      throw RveFailure("material point failure at element " + std::to_string(e) + ", point " + std::to_string(k) +
                           ": " + errors[static_cast<std::size_t>(g)],
                       e, k);
    }
}

MacroAssembly macro_assemble(const MacroModel& model, const std::vector<GaussPointState>& gp, double load,
                             bool tangent) {
  if (gp.size() != model.qps.size()) throw ValidationError("macro_assemble: missing Gauss point data");
  const int nc = model.problem.patch.n_ctrl();
  MacroAssembly out;
  out.f_int = Eigen::VectorXd::Zero(3 * nc);
  std::vector<Eigen::Triplet<double>> trip;
  ElementAccumulator acc;
  const int ne = model.problem.patch.n_elements();
  const unsigned flags = kResidual | (tangent ? kStiffness : 0u);
  for (int e = 0; e < ne; ++e) {
    const int q0 = model.elem_first_qp[e], q1 = model.elem_first_qp[e + 1];
    const auto& ids = model.qps[q0].ids;
    const int nb = static_cast<int>(ids.size());
    acc.reset(nb, tangent, false);
    for (int iq = q0; iq < q1; ++iq) {
      if (!gp[iq].valid) throw ValidationError("macro_assemble: Gauss point without converged response");
      kernel_point(model.bvec[iq].data(), nb, model.qps[iq].X, gp[iq].response, model.qps[iq].w, flags, acc, nullptr);
    }
    acc.finalize();
    for (int A = 0; A < nb; ++A)
      for (int i = 0; i < 3; ++i) {
        const int gA = 3 * ids[A] + i;
        out.f_int[gA] += acc.r[3 * A + i];
        if (!tangent) continue;
        const int fr = model.free_index[gA];
        if (fr < 0) continue;
        for (int B = 0; B < nb; ++B)
          for (int s = 0; s < 3; ++s) {
            const int fc = model.free_index[3 * ids[B] + s];
            if (fc >= 0) trip.emplace_back(fr, fc, acc.K(3 * A + i, 3 * B + s));
          }
      }
  }
  out.r.resize(model.n_free);
  for (int g = 0; g < 3 * nc; ++g) {
    const int f = model.free_index[g];
    if (f >= 0) out.r[f] = out.f_int[g] - load * model.f_ext[g];
  }
  if (tangent) {
    out.K.resize(model.n_free, model.n_free);
    out.K.setFromTriplets(trip.begin(), trip.end());
  }
  return out;
}

namespace {

int total_rve_iterations(const std::vector<GaussPointState>& gp) {
  int n = 0;
  for (const auto& g : gp) n += g.rve_iterations;
  return n;
}

void record_balance(const MacroModel& model, MacroState& state, const Eigen::VectorXd& f_int) {
  state.reaction = Vec3{};
  state.applied = Vec3{};
  for (int A : model.problem.clamped)
    for (int i = 0; i < 3; ++i) state.reaction[i] -= f_int[3 * A + i];
  for (int g = 0; g < static_cast<int>(model.f_ext.size()); ++g) state.applied[g % 3] += state.load * model.f_ext[g];
}

}  // namespace

void newton_at_load(const MacroModel& model, MacroState& state, double load, StepRecord& rec,
                    const IterationCallback& cb, int step_index) {
  const auto& opt = model.problem.load;
  SparseSolver solver;
  for (int it = 0;; ++it) {
    update_points(model, state.u, state.gp, model.problem.threads);
    rec.rve_iterations += total_rve_iterations(state.gp);
    const bool last_check = it >= opt.max_iter;
    MacroAssembly a = macro_assemble(model, state.gp, load, true);
    const double rn = a.r.norm();
    rec.residuals.push_back(rn);
    if (cb) cb(step_index, it, rn);
    if (!std::isfinite(rn)) throw NonConvergence("macro Newton: non-finite residual", rec.residuals);
    if (rn <= opt.tol) {
      state.load = load;
      record_balance(model, state, a.f_int);
      return;
    }
    if (last_check)
      throw NonConvergence("macro Newton: no convergence after " + std::to_string(opt.max_iter) + " iterations",
                           rec.residuals);
    solver.factorize(a.K);
    const Eigen::VectorXd du = solver.solve(a.r);
    for (int A = 0; A < static_cast<int>(state.u.size()); ++A)
      for (int i = 0; i < 3; ++i) {
        const int f = model.free_index[3 * A + i];
        if (f >= 0) state.u[static_cast<std::size_t>(A)][i] -= du[f];
      }
  }
}

MacroState solve_two_scale(std::shared_ptr<const MacroModel> model, const MacroState* initial,
                           const IterationCallback& cb) {
  const auto& opt = model->problem.load;
  if (opt.steps < 1) throw ValidationError("macro: at least one load step required");
  MacroState state;
  if (initial) {
    state = *initial;
    if (state.u.size() != static_cast<std::size_t>(model->problem.patch.n_ctrl()))
      throw ValidationError("macro: initial state does not match the patch");
  } else {
    state.u.assign(static_cast<std::size_t>(model->problem.patch.n_ctrl()), Point3{0.0, 0.0, 0.0});
  }
  const double lam0 = state.load;
  const int nsteps = lam0 >= 1.0 ? 1 : opt.steps;
  for (int k = 1; k <= nsteps; ++k) {
    const double target = k == nsteps ? 1.0 : lam0 + (1.0 - lam0) * k / nsteps;
    double lam = state.load;
    double inc = target - lam;
    int halvings = 0;
    do {
      const double next = (lam + inc >= target - 1e-14 * std::max(1.0, std::abs(target))) ? target : lam + inc;
      MacroState backup = state;
      StepRecord rec;
      rec.halvings = halvings;
      try {
        newton_at_load(*model, state, next, rec, cb, static_cast<int>(state.steps.size()));
        rec.load = next;
        state.steps.push_back(std::move(rec));
        lam = next;
      } catch (const SolverError& e) {
        state = std::move(backup);
        if (++halvings > opt.max_halvings)
          throw SolverError("macro: load step to " + std::to_string(next) + " failed after " +
                            std::to_string(opt.max_halvings) + " halvings: " + e.what());
        inc *= 0.5;
      }
    } while (lam < target);
  }
  return state;
}

MacroState solve_two_scale(const MacroProblem& problem, const MacroState* initial, const IterationCallback& cb) {
  return solve_two_scale(make_macro_model(problem), initial, cb);
}

}  // namespace gradhom
