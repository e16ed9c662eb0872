#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>

namespace gradhom {

using SpMat = Eigen::SparseMatrix<double>;

/// Direct sparse solver: symmetric LDL^T first, sparse LU when a pivot vanishes
/// or the symmetric solve is inaccurate.
class SparseSolver {
 public:
  SparseSolver();
  ~SparseSolver();
  SparseSolver(SparseSolver&&) noexcept;
  SparseSolver& operator=(SparseSolver&&) noexcept;

  /// Throws SingularMatrix when both factorizations fail.
  void factorize(const SpMat& K);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;
  bool used_lu() const;
  int rows() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gradhom
