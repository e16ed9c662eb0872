#include "gradhom/multigrid.hpp"

#include <string>

#include "gradhom/errors.hpp"

namespace gradhom {

namespace {

SplinePatch cook_patch(const TwoScaleSpec& spec) {
  return build_cooks(spec.macro_nel, spec.macro_p, spec.cook, spec.resultant_N).patch;
}

SplinePatch refined(SplinePatch patch, int levels) {
  for (int l = 0; l < levels; ++l) patch = knot_insert(patch).fine;
  return patch;
}

}  // namespace

MacroProblem make_level_problem(const TwoScaleSpec& spec, int macro_level, int rve_level) {
  if (macro_level < 0 || rve_level < 0) throw ValidationError("schedule: mesh levels must be nonnegative");
  MacroProblem prob = cooks_on_patch(refined(cook_patch(spec), macro_level), spec.resultant_N);
  prob.load = spec.load;
  prob.threads = spec.threads;
  if (spec.direct_material) {
    prob.material = spec.direct_material;
    return prob;
  }
  const int n = spec.rve_nel;
  SplinePatch rp = build_patch({n, n, n}, spec.rve_p, {spec.rve_edge_mm, spec.rve_edge_mm, spec.rve_edge_mm}, true);
  rp = refined(std::move(rp), rve_level);
  rp.affine = true;
  RveProblem rve = rve_on_patch(std::move(rp), spec.rve_edge_mm, spec.rve_material, spec.rve_bc, spec.rve_void,
                                spec.void_factor);
  rve.newton = spec.rve_newton;
  prob.rve = make_rve_model(rve);
  return prob;
}

void Schedule::validate() const {
  if (levels.empty()) throw ValidationError("schedule: no levels");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const Level& l = levels[k];
    const std::string at = "schedule.levels[" + std::to_string(k) + "]";
    if (l.steps < 1) throw ValidationError(at + ".steps: must be >= 1");
    if (k == 0) {
      if (l.how != Prolongation::None) throw ValidationError(at + ".prolongation: first level takes none");
      continue;
    }
    const Level& p = levels[k - 1];
    const int dm = l.macro - p.macro, dr = l.rve - p.rve;
    if (dm == 1 && dr == 0 && l.how == Prolongation::MacroRefine) continue;
    if (dm == 0 && dr == 1 && l.how == Prolongation::RveRefine) continue;
    throw ValidationError(at + ": must refine exactly one mesh by one level, matching its prolongation");
  }
}

Schedule standard_schedule(int first_level_steps) {
  Schedule s;
  s.levels = {{0, 0, Prolongation::None, first_level_steps},
              {1, 0, Prolongation::MacroRefine, 1},
              {1, 1, Prolongation::RveRefine, 1},
              {2, 1, Prolongation::MacroRefine, 1}};
  return s;
}

double cold_start_residual(const MacroModel& model) {
  std::vector<Point3> u(static_cast<std::size_t>(model.problem.patch.n_ctrl()), Point3{0.0, 0.0, 0.0});
  std::vector<GaussPointState> gp;
  update_points(model, u, gp, model.problem.threads);
  return macro_assemble(model, gp, 1.0, false).r.norm();
}

std::vector<Point3> prolong_displacements(const TwoScaleSpec& spec, int coarse_level, const std::vector<Point3>& u) {
  const Refinement ref = knot_insert(refined(cook_patch(spec), coarse_level));
  return prolong(ref.prolongation, u);
}

ScheduleResult run_schedule(const TwoScaleSpec& spec, const Schedule& schedule, const LevelCallback& cb) {
  schedule.validate();
  ScheduleResult res;
  for (std::size_t k = 0; k < schedule.levels.size(); ++k) {
    const Level& lv = schedule.levels[k];
    MacroProblem prob = make_level_problem(spec, lv.macro, lv.rve);
    prob.load.steps = lv.steps;
    auto model = make_macro_model(prob);
    const int li = static_cast<int>(k);
    IterationCallback icb;
    if (cb) icb = [&cb, li](int s, int it, double r) { cb(li, s, it, r); };

    LevelRecord rec;
    rec.level = lv;
    if (k == 0) {
      res.state = solve_two_scale(model, nullptr, icb);
    } else {
      MacroState warm;
      warm.load = 1.0;
      if (lv.how == Prolongation::MacroRefine)
        warm.u = prolong_displacements(spec, schedule.levels[k - 1].macro, res.state.u);
      else
        warm.u = res.state.u;  // RVE fluctuations are re-solved cold on the finer RVE mesh
      try {
        res.state = solve_two_scale(model, &warm, icb);
      } catch (const SolverError& e) {
        rec.fell_back = true;
        rec.fallback_reason = "level " + std::to_string(k) + ": " + e.what();
        MacroProblem again = prob;
        again.load.steps = std::max(spec.load.steps, schedule.levels.front().steps);
        model = make_macro_model(again);
        res.state = solve_two_scale(model, nullptr, icb);
      }
    }
    rec.steps = res.state.steps;
    rec.initial_residual = rec.steps.empty() || rec.steps.front().residuals.empty()
                               ? 0.0
                               : rec.steps.front().residuals.front();
    for (const auto& s : rec.steps) rec.newton_iterations += static_cast<int>(s.residuals.size()) - 1;
    res.levels.push_back(std::move(rec));
    res.model = model;
  }
  return res;
}

}  // namespace gradhom
