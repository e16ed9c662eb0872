#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gradhom/macro.hpp"

namespace gradhom {

/// Level-0 description of a two-scale Cook problem.  Finer meshes are produced
/// by repeated knot insertion from these.
struct TwoScaleSpec {
  CookGeometry cook;
  std::array<int, 3> macro_nel{2, 2, 1};
  int macro_p = 2;
  Vec3 resultant_N{0.0, 100.0, 0.0};
  LoadStepping load;
  int threads = 1;

  double rve_edge_mm = 0.1;
  int rve_nel = 4;
  int rve_p = 2;
  Material rve_material = Material::mooney_rivlin({});
  BcKind rve_bc = BcKind::Periodic;
  bool rve_void = false;
  double void_factor = 1e-8;
  NewtonOptions rve_newton;

  /// When set, the macro solve evaluates this material directly (no RVEs).
  std::optional<Material> direct_material;
};

/// Problem on macro mesh level m and RVE mesh level r (each level one knot insertion).
MacroProblem make_level_problem(const TwoScaleSpec& spec, int macro_level, int rve_level);

enum class Prolongation { None, MacroRefine, RveRefine };

struct Level {
  int macro = 0;
  int rve = 0;
  Prolongation how = Prolongation::None;
  int steps = 1;  // load steps when solved from scratch
};

struct Schedule {
  std::vector<Level> levels;
  /// Throws ValidationError unless level 0 has no prolongation and every later
  /// level refines exactly one mesh by one level, as named by its prolongation.
  void validate() const;
};

/// {M1|R1} -> {M2|R1} -> {M2|R2} -> {M3|R2}, the first level load-stepped.
Schedule standard_schedule(int first_level_steps = 10);

struct LevelRecord {
  Level level;
  double initial_residual = 0.0;  // first residual after prolongation (or from scratch at level 0)
  int newton_iterations = 0;      // macro updates over all steps of the level
  bool fell_back = false;         // warm start failed; level re-solved with load stepping
  std::string fallback_reason;
  std::vector<StepRecord> steps;
};

struct ScheduleResult {
  MacroState state;               // final level
  std::shared_ptr<const MacroModel> model;
  std::vector<LevelRecord> levels;
};

/// Callback receives (level index, step, iteration, residual).
using LevelCallback = std::function<void(int, int, int, double)>;

ScheduleResult run_schedule(const TwoScaleSpec& spec, const Schedule& schedule, const LevelCallback& cb = {});

/// Residual norm of the zero-displacement state at full load on a model.
double cold_start_residual(const MacroModel& model);

/// Macro displacements carried to the next macro level.
std::vector<Point3> prolong_displacements(const TwoScaleSpec& spec, int coarse_level, const std::vector<Point3>& u);

}  // namespace gradhom
