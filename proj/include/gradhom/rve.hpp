#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

#include "gradhom/kernel.hpp"
#include "gradhom/materials.hpp"
#include "gradhom/sparse_solver.hpp"
#include "gradhom/spline.hpp"
#include "gradhom/tensor.hpp"

namespace gradhom {

/// Macroscopic deformation measures driving an RVE.  FF need not be symmetric in
/// its last two indices inside the solver; inputs from configuration are checked.
struct MacroDrive {
  Mat3 F = identity2();
  Tensor<3> FF;
  std::array<double, 36> packed() const;
  static MacroDrive unpack(const std::array<double, 36>& d);
};

enum class BcKind { Dirichlet, Periodic };

struct NewtonOptions {
  double atol = 1e-10;
  double rtol = 1e-12;
  int max_iter = 20;
};

struct RveProblem {
  SplinePatch patch;
  std::vector<Material> materials;
  std::vector<int> element_material;  // one entry per element
  BcKind bc = BcKind::Dirichlet;
  int quad_n = 3;
  NewtonOptions newton;
};

/// Elements whose centroid lies inside the centered 3D cross: a central cube of
/// edge l/6 with six arms of cross-section l/6 x l/6 and length l/4.
std::vector<bool> cross_void_elements(const SplinePatch& patch, double edge);

/// Homogeneous or void-carrying cube RVE centered at the origin.
RveProblem make_cube_rve(double edge, int nel, int p, const Material& mat, BcKind bc, bool with_void,
                         double void_factor = 1e-8);
/// Same material layout on a given centered cube patch (e.g. a refined one).
RveProblem rve_on_patch(SplinePatch patch, double edge, const Material& mat, BcKind bc, bool with_void,
                        double void_factor = 1e-8);

/// Affine reduction q_full = T q_free + g over dofs 3*A + i.
struct ConstraintMap {
  Eigen::SparseMatrix<double, Eigen::RowMajor> T;
  Eigen::VectorXd g;
  int n_full() const { return static_cast<int>(T.rows()); }
  int n_free() const { return static_cast<int>(T.cols()); }
  Eigen::VectorXd expand(const Eigen::VectorXd& q_free) const { return T * q_free + g; }
};

ConstraintMap dirichlet_constraints(const RveProblem& problem, const MacroDrive& drive);
ConstraintMap periodic_constraints(const RveProblem& problem, const MacroDrive& drive);
ConstraintMap build_constraints(const RveProblem& problem, const MacroDrive& drive);

/// Least-squares fit of the boundary control values of the total placement
/// F X + 1/2 FF:(X x X) using value and normal-gradient rows at the face Gauss grid.
struct BoundaryFit {
  std::vector<int> ctrl;              // fitted control points (two boundary layers)
  std::vector<Point3> values;         // fitted placements, same order
  double value_residual = 0.0;        // max |fitted - target| over evaluation points (mm)
  double gradient_residual = 0.0;     // max normal-gradient misfit
};
BoundaryFit fit_boundary(const RveProblem& problem, const MacroDrive& drive);

/// Problem data shared by every solve on the same RVE template: quadrature cache,
/// packed basis vectors, constraints.  Immutable after construction.
struct RveModel {
  RveProblem problem;
  ConstraintMap cmap;
  std::vector<QuadraturePoint> qps;
  std::vector<std::vector<double>> bvec;  // per quadrature point, 12 per basis
  std::vector<int> elem_first_qp;         // qps of element e: [first[e], first[e+1])
  std::vector<char> elem_active;          // element touches a free dof
  double volume = 0.0;
  int n_free() const { return cmap.n_free(); }
};

std::shared_ptr<const RveModel> make_rve_model(const RveProblem& problem);

/// Volume averages collected during an assembly pass.
struct RveAverages {
  double psi = 0.0;
  Mat3 F, P;
  Tensor<3> FF, PP_P, PP_PP;     // hyperstress split: first moment of P, average of hyperstress
  Tensor<4> G_P, G_PP;           // third-gradient averages
  Mat3 grad_w;                   // average of the fluctuation gradient
  Tensor<3> hess_w;              // average of the fluctuation second gradient
  Eigen::Matrix<double, 36, 36> V = Eigen::Matrix<double, 36, 36>::Zero();
};

struct Assembly {
  Eigen::VectorXd r;           // free residual
  SpMat K;                     // free x free
  Eigen::MatrixXd L;           // free x 36 drive sensitivity (L columns 0..8, M columns 9..35)
  Eigen::MatrixXd N;           // 36 x free
  RveAverages avg;
};

enum AssembleWhat : unsigned { kAsmResidual = 1u, kAsmStiffness = 2u, kAsmDrive = 4u, kAsmAverages = 8u };

Assembly assemble(const RveModel& model, const MacroDrive& drive, const Eigen::VectorXd& q_free, unsigned what);

struct RveSolution {
  std::shared_ptr<const RveModel> model;
  MacroDrive drive;
  Eigen::VectorXd q;              // free fluctuation values (mm)
  std::vector<double> residuals;  // residual norm before each Newton update and at exit
  int iterations = 0;             // number of Newton updates
  SpMat K;
  Eigen::MatrixXd L;              // free x 36
  Eigen::MatrixXd N;              // 36 x free
  std::shared_ptr<SparseSolver> factor;
  RveAverages avg;
  Eigen::VectorXd q_full() const { return model->cmap.expand(q); }
};

/// Newton solve; q0 (optional, free size) is the initial guess.
RveSolution solve(std::shared_ptr<const RveModel> model, const MacroDrive& drive, const Eigen::VectorXd* q0 = nullptr);
RveSolution solve(const RveProblem& problem, const MacroDrive& drive);

}  // namespace gradhom
