#include "gradhom/kernel.hpp"

namespace gradhom {

void pack_basis(const PointEval& pe, std::vector<double>& b) {
  const int nb = pe.n();
  b.resize(static_cast<std::size_t>(12 * nb));
  for (int A = 0; A < nb; ++A) {
    for (int a = 0; a < 3; ++a) b[12 * A + a] = pe.dR[3 * A + a];
    for (int a = 0; a < 9; ++a) b[12 * A + 3 + a] = pe.d2R[9 * A + a];
  }
}

void ElementAccumulator::reset(int n_basis, bool stiffness, bool drive) {
  nb = n_basis;
  const int n = 3 * nb;
  has_K = stiffness;
  has_drive = drive;
  rc.setZero(n);
  if (stiffness) Kc.setZero(n, n);
  if (drive) {
    Lc.setZero(n, 36);
    Nc.setZero(36, n);
  }
}

void ElementAccumulator::finalize() {
  const int n = 3 * nb;
  auto perm = [this](int l) { return (l % nb) * 3 + l / nb; };  // component-major -> 3*A + i
  r.resize(n);
  for (int l = 0; l < n; ++l) r[perm(l)] = rc[l];
  if (has_K) {
    K.resize(n, n);
    for (int c = 0; c < n; ++c) {
      const int pc = perm(c);
      for (int l = 0; l < n; ++l) K(perm(l), pc) = Kc(l, c);
    }
  }
  if (has_drive) {
    L.resize(n, 36);
    N.resize(36, n);
    for (int l = 0; l < n; ++l) {
      L.row(perm(l)) = Lc.row(l);
      N.col(perm(l)) = Nc.col(l);
    }
  }
}

void drive_moments(const Point3& X, Eigen::Matrix<double, 36, 36>& g) {
  g.setZero();
  for (int s = 0; s < 3; ++s)
    for (int T = 0; T < 3; ++T) {
      g(12 * s + T, 3 * s + T) = 1.0;
      for (int U = 0; U < 3; ++U) {
        const int c = 9 + 9 * s + 3 * T + U;
        g(12 * s + T, c) = X[U];
        g(12 * s + 3 + 3 * T + U, c) = 1.0;
      }
    }
}

namespace {

// Applies the drive moments to the rows of a (3*NS x m) block whose rows are
// stress slots i*NS + a; out row r receives sum over slots g(slot, r) * in(slot).
template <int NS, class In, class Out>
void moment_rows(const Point3& X, double w, const In& in, Out& out) {
  for (int s = 0; s < 3; ++s)
    for (int T = 0; T < 3; ++T) {
      out.row(3 * s + T) += w * in.row(s * NS + T);
      for (int U = 0; U < 3; ++U) {
        auto o = out.row(9 + 9 * s + 3 * T + U);
        o += (w * X[U]) * in.row(s * NS + T);
        if constexpr (NS == 12) o += w * in.row(s * NS + 3 + 3 * T + U);
      }
    }
}

template <int NS>
void kernel_impl(const double* b, int nb, const Point3& X, const PackedResponse& resp, double w, unsigned flags,
                 ElementAccumulator& acc, Eigen::Matrix<double, 36, 36>* V) {
  using RowMat36 = Eigen::Matrix<double, 36, 36, Eigen::RowMajor>;
  Eigen::Map<const RowMat36> Tm(resp.T.data());
  Eigen::Map<const Eigen::Matrix<double, 12, Eigen::Dynamic>> Bfull(b, 12, nb);
  const auto Bb = Bfull.template topRows<NS>();
  const int n = 3 * nb;

  if (flags & kResidual)
    for (int i = 0; i < 3; ++i) {
      Eigen::Map<const Eigen::Matrix<double, NS, 1>> Si(resp.S.data() + 12 * i);
      acc.rc.segment(i * nb, nb).noalias() += w * (Bb.transpose() * Si);
    }

  if (!(flags & (kStiffness | kDrive))) return;

  // TB rows: stress slots i*NS + a; columns s*nb + B
  thread_local Eigen::MatrixXd TB;
  TB.resize(3 * NS, n);
  for (int i = 0; i < 3; ++i)
    for (int s = 0; s < 3; ++s)
      TB.block(i * NS, s * nb, NS, nb).noalias() = Tm.template block<NS, NS>(12 * i, 12 * s) * Bb;

  if (flags & kStiffness)
    for (int i = 0; i < 3; ++i)
      acc.Kc.middleRows(i * nb, nb).noalias() += (w * Bb.transpose()) * TB.middleRows(i * NS, NS);

  if (flags & kDrive) {
    // TG rows: stress slots; columns: drive components
    Eigen::Matrix<double, 3 * NS, 36> TG;
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < NS; ++a) {
        const auto Tr = Tm.row(12 * i + a);
        const int row = i * NS + a;
        for (int s = 0; s < 3; ++s)
          for (int T = 0; T < 3; ++T) {
            const double t = Tr(12 * s + T);
            TG(row, 3 * s + T) = t;
            for (int U = 0; U < 3; ++U) {
              double v = X[U] * t;
              if constexpr (NS == 12) v += Tr(12 * s + 3 + 3 * T + U);
              TG(row, 9 + 9 * s + 3 * T + U) = v;
            }
          }
      }
    for (int i = 0; i < 3; ++i)
      acc.Lc.middleRows(i * nb, nb).noalias() += (w * Bb.transpose()) * TG.middleRows(i * NS, NS);
    moment_rows<NS>(X, w, TB, acc.Nc);
    if (V) moment_rows<NS>(X, w, TG, *V);
  }
}

}  // namespace

void kernel_point(const double* b, int nb, const Point3& X, const PackedResponse& resp, double w, unsigned flags,
                  ElementAccumulator& acc, Eigen::Matrix<double, 36, 36>* V) {
  if (resp.second_gradient)
    kernel_impl<12>(b, nb, X, resp, w, flags, acc, V);
  else
    kernel_impl<3>(b, nb, X, resp, w, flags, acc, V);
}

}  // namespace gradhom
