#include "gradhom/sparse_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>

#include "gradhom/errors.hpp"

namespace gradhom {

struct SparseSolver::Impl {
  SpMat K;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  Eigen::SparseLU<SpMat> lu;
  bool use_lu = false;
  int n = 0;
};

SparseSolver::SparseSolver() : impl_(std::make_unique<Impl>()) {}
SparseSolver::~SparseSolver() = default;
SparseSolver::SparseSolver(SparseSolver&&) noexcept = default;
SparseSolver& SparseSolver::operator=(SparseSolver&&) noexcept = default;

namespace {

bool ldlt_ok(const Eigen::SimplicialLDLT<SpMat>& f, const SpMat& K) {
  if (f.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = f.vectorD();
  double dmax = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) return false;
    dmax = std::max(dmax, std::abs(d[i]));
  }
  for (int i = 0; i < d.size(); ++i)
    if (std::abs(d[i]) <= 1e-14 * dmax) return false;
  // probe the accuracy with a fixed right-hand side
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(K.rows(), 1.0, 2.0);
  const Eigen::VectorXd x = f.solve(b);
  const double err = (K * x - b).norm();
  return std::isfinite(err) && err <= 1e-8 * b.norm();
}

}  // namespace

void SparseSolver::factorize(const SpMat& K) {
  impl_->n = static_cast<int>(K.rows());
  impl_->use_lu = false;
  if (K.rows() == 0) return;
  impl_->K = K;
  impl_->ldlt.compute(impl_->K);
  if (ldlt_ok(impl_->ldlt, impl_->K)) return;
  impl_->use_lu = true;
  impl_->lu.analyzePattern(impl_->K);
  impl_->lu.factorize(impl_->K);
  if (impl_->lu.info() != Eigen::Success)
    throw SingularMatrix("sparse solver: singular stiffness matrix (consider a small first-gradient stabilization)");
}

Eigen::VectorXd SparseSolver::solve(const Eigen::VectorXd& b) const {
  if (impl_->n == 0) return Eigen::VectorXd(0);
  Eigen::VectorXd x = impl_->use_lu ? Eigen::VectorXd(impl_->lu.solve(b)) : Eigen::VectorXd(impl_->ldlt.solve(b));
  if (!x.allFinite()) throw SingularMatrix("sparse solver: non-finite solution");
  return x;
}

Eigen::MatrixXd SparseSolver::solve(const Eigen::MatrixXd& B) const {
  if (impl_->n == 0) return Eigen::MatrixXd(0, B.cols());
  Eigen::MatrixXd X = impl_->use_lu ? Eigen::MatrixXd(impl_->lu.solve(B)) : Eigen::MatrixXd(impl_->ldlt.solve(B));
  if (!X.allFinite()) throw SingularMatrix("sparse solver: non-finite solution");
  return X;
}

bool SparseSolver::used_lu() const { return impl_->use_lu; }
int SparseSolver::rows() const { return impl_->n; }

}  // namespace gradhom
