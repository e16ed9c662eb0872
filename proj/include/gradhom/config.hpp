#pragma once

#include <string>
#include <vector>

#include "gradhom/multigrid.hpp"

namespace gradhom {

struct MaterialConfig {
  std::string model = "mooney-rivlin";  // mooney-rivlin | fiber
  double c1_MPa = 2000.0;
  double c2_MPa = 1000.0;
  double zeta = 0.5;
  double a_F_MPa = 15000.0;
  double b_F_MPa = 3000.0;
  double c_F_N = 1.25;
  std::array<double, 3> L1{-1.0 / 2.0615528128088303, -1.0 / 2.0615528128088303, 1.5 / 2.0615528128088303};
  std::array<double, 3> L2{-1.0 / 2.0615528128088303, -1.0 / 2.0615528128088303, -1.5 / 2.0615528128088303};
  Material build() const;
};

struct RveConfig {
  double edge_mm = 0.1;
  int elements = 4;
  int degree = 2;
  MaterialConfig material;
  std::string bc = "dirichlet";  // dirichlet | periodic
  bool void_cross = false;
  double void_stiffness_factor = 1e-8;
  std::vector<double> first_gradient_scales;  // empty: a single run with the material as given
};

struct DriveConfig {
  std::array<double, 9> F{1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 27> FF_per_mm{};
};

struct MacroConfig {
  double length_mm = 48.0;
  double left_height_mm = 44.0;
  double right_low_mm = 44.0;
  double right_high_mm = 60.0;
  double thickness_mm = 10.0;
  std::array<int, 3> elements{2, 2, 1};
  int degree = 2;
  std::array<double, 3> resultant_N{0.0, 100.0, 0.0};
  int steps = 1;
  int max_halvings = 4;
  bool single_scale = false;  // evaluate the RVE material directly at macro points
};

struct LevelConfig {
  int macro = 0;
  int rve = 0;
  std::string prolongation = "none";  // none | macro-refine | rve-refine
  int steps = 1;
};

struct ToleranceConfig {
  double rve_atol_N = 1e-10;
  double rve_rtol = 1e-12;
  int rve_max_iter = 20;
  double macro_tol_N = 1e-6;
  int macro_max_iter = 20;
  double report_threshold = 1e-12;  // pass limit for error rows of the rve report
  double fd_step = 1e-5;            // FD step on F components, step / edge_mm on FF
  double fd_threshold = 1e-4;
  double hill_mandel_threshold = 1e-10;
  double admissibility_threshold = 1e-10;
};

struct OutputConfig {
  std::string directory = "out";
  int vtk_lattice = 3;  // samples per element edge
  bool fields = true;
};

struct RunConfig {
  std::string command = "rve";  // rve | two-scale | verify
  RveConfig rve;
  DriveConfig drive;
  MacroConfig macro;
  std::vector<LevelConfig> schedule;  // empty: single level solve
  ToleranceConfig tolerances;
  OutputConfig output;
};

/// Parses a JSON document.  Missing fields take defaults; unknown fields, wrong
/// types and invalid values raise ValidationError naming the field path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical JSON with every field, fixed order, two-space indent and a final newline.
std::string emit_config(const RunConfig& cfg);
void validate(const RunConfig& cfg);

RveProblem rve_problem(const RunConfig& cfg, double first_gradient_scale = 1.0);
MacroDrive drive_of(const RunConfig& cfg);
TwoScaleSpec two_scale_spec(const RunConfig& cfg);
Schedule schedule_of(const RunConfig& cfg);

}  // namespace gradhom
