#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gradhom/errors.hpp"
#include "gradhom/homogenizer.hpp"
#include "gradhom/rve.hpp"
#include "gradhom/sparse_solver.hpp"
#include "gradhom/spline.hpp"

namespace gradhom {

/// Standard Cook trapezoid extruded in z: left edge [0, left_height] at x = 0,
/// right edge [right_low, right_high] at x = length.
struct CookGeometry {
  double length_mm = 48.0;
  double left_height_mm = 44.0;
  double right_low_mm = 44.0;
  double right_high_mm = 60.0;
  double thickness_mm = 10.0;
  double volume() const;
  double right_face_area() const;
};

struct LoadStepping {
  int steps = 1;
  int max_halvings = 4;
  double tol = 1e-6;  // residual norm (N)
  int max_iter = 20;
};

/// Macroscopic boundary value problem.  The clamp pins the first two control
/// layers at the low end of parameter direction 0 (value and normal gradient).
struct MacroProblem {
  SplinePatch patch;
  std::vector<int> clamped;      // clamped control points
  int traction_face = 1;         // face = 2*dir + side
  Vec3 traction;                 // MPa, uniform on traction_face
  int quad_n = 3;
  LoadStepping load;
  int threads = 1;
  // constitutive response: an RVE template shared by all Gauss points, or a direct material
  std::shared_ptr<const RveModel> rve;
  std::optional<Material> material;
};

/// Clamp and traction data for an arbitrary patch of the Cook domain, with the
/// traction scaled to the given resultant over the reference traction face.
MacroProblem cooks_on_patch(SplinePatch patch, const Vec3& resultant_N);
MacroProblem build_cooks(std::array<int, 3> nel, int p, const CookGeometry& geom = {},
                         const Vec3& resultant_N = Vec3{0.0, 100.0, 0.0});

/// Per-Gauss-point cache.
struct GaussPointState {
  MacroDrive drive;
  Eigen::VectorXd q;  // converged RVE fluctuation (free dofs), empty for direct materials
  PackedResponse response;
  int rve_iterations = 0;
  bool valid = false;
};

struct StepRecord {
  double load = 0.0;               // load factor reached
  std::vector<double> residuals;   // residual norm before each update and at exit
  int halvings = 0;
  int rve_iterations = 0;          // total RVE Newton updates in this step
};

struct MacroState {
  std::vector<Point3> u;           // control point displacements (mm)
  std::vector<GaussPointState> gp;
  std::vector<StepRecord> steps;
  double load = 0.0;
  Vec3 reaction;                   // force transmitted to the clamp: minus the internal forces there (N)
  Vec3 applied;                    // applied resultant at the current load (N)
  double balance_error() const;    // |reaction - applied| / |applied|
};

/// Fixed per-problem data: quadrature cache, dof numbering, external load.
struct MacroModel {
  MacroProblem problem;
  std::vector<QuadraturePoint> qps;
  std::vector<std::vector<double>> bvec;
  std::vector<int> elem_first_qp;
  std::vector<int> free_index;     // full dof -> free index, -1 when clamped
  int n_free = 0;
  Eigen::VectorXd f_ext;           // full external force at load factor 1
  double volume = 0.0;
};

std::shared_ptr<const MacroModel> make_macro_model(const MacroProblem& problem);

/// Thrown when an RVE fails; names the Gauss point.
struct RveFailure : SolverError {
  RveFailure(const std::string& what, int element, int point) : SolverError(what), element(element), point(point) {}
  int element, point;
};

/// Kinematics and constitutive update at every Gauss point for displacements u.
/// Existing converged RVE fluctuations in gp serve as initial guesses.
void update_points(const MacroModel& model, const std::vector<Point3>& u, std::vector<GaussPointState>& gp,
                   int threads);

struct MacroAssembly {
  Eigen::VectorXd r;        // free residual (internal - load * external)
  SpMat K;                  // free tangent
  Eigen::VectorXd f_int;    // full internal force
};

MacroAssembly macro_assemble(const MacroModel& model, const std::vector<GaussPointState>& gp, double load,
                             bool tangent = true);

/// Invoked after each Newton iterate: (step index, iteration, residual norm).
using IterationCallback = std::function<void(int, int, double)>;

/// Load-stepped Newton solve from state (zero state when null).  Each step ends at
/// the target load; failed steps are retried with halved increments.
MacroState solve_two_scale(const MacroProblem& problem, const MacroState* initial = nullptr,
                           const IterationCallback& cb = {});
MacroState solve_two_scale(std::shared_ptr<const MacroModel> model, const MacroState* initial,
                           const IterationCallback& cb = {});

/// Newton iterations at a fixed load starting from state (used by steps and levels).
void newton_at_load(const MacroModel& model, MacroState& state, double load, StepRecord& rec,
                    const IterationCallback& cb, int step_index);

/// Deformation measures at a parameter point for displacements u.
MacroDrive macro_kinematics(const PointEval& pe, const std::vector<Point3>& u);

}  // namespace gradhom
