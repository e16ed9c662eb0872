#include "gradhom/materials.hpp"

#include <cmath>

#include "gradhom/errors.hpp"
#include "gradhom/hyperdual.hpp"

namespace gradhom {

namespace {

constexpr double kAcosClamp = 1e-12;
constexpr double kTanGuard = 1e-12;

template <class T>
T det3(const std::array<T, 9>& F) {
  return F[0] * (F[4] * F[8] - F[5] * F[7]) - F[1] * (F[3] * F[8] - F[5] * F[6]) + F[2] * (F[3] * F[7] - F[4] * F[6]);
}

// cofactor matrix, equal to J F^{-T}
template <class T>
std::array<T, 9> cofactor(const std::array<T, 9>& F) {
  return {F[4] * F[8] - F[5] * F[7], F[5] * F[6] - F[3] * F[8], F[3] * F[7] - F[4] * F[6],
          F[2] * F[7] - F[1] * F[8], F[0] * F[8] - F[2] * F[6], F[1] * F[6] - F[0] * F[7],
          F[1] * F[5] - F[2] * F[4], F[2] * F[3] - F[0] * F[5], F[0] * F[4] - F[1] * F[3]};
}

template <class T>
T mr_energy(const std::array<T, 9>& F, const MooneyRivlinParams& p) {
  const T J = det3(F);
  if (!(value_of(J) > 0.0)) throw NonPositiveJacobian("material: det F <= 0");
  std::array<T, 9> C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      T s = 0.0;
      for (int k = 0; k < 3; ++k) s += F[3 * k + i] * F[3 * k + j];
      C[3 * i + j] = s;
    }
  const T I1 = C[0] + C[4] + C[8];
  T trC2 = 0.0;
  for (int i = 0; i < 9; ++i) trC2 += C[i] * C[i];
  const T I2 = 0.5 * (I1 * I1 - trC2);
  const T Jm1 = J - T(1.0);
  return p.c() * (Jm1 * Jm1) - p.d() * log(J) + p.c1 * (I1 - T(3.0)) + p.c2 * (I2 - T(3.0));
}

double mr_energy_d(const std::array<double, 9>& F, const MooneyRivlinParams& p) {
  const double J = det3(F);
  if (!(J > 0.0)) throw NonPositiveJacobian("material: det F <= 0");
  double C[9];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += F[3 * k + i] * F[3 * k + j];
      C[3 * i + j] = s;
    }
  const double I1 = C[0] + C[4] + C[8];
  double trC2 = 0.0;
  for (double v : C) trC2 += v * v;
  const double I2 = 0.5 * (I1 * I1 - trC2);
  return p.c() * (J - 1) * (J - 1) - p.d() * std::log(J) + p.c1 * (I1 - 3) + p.c2 * (I2 - 3);
}

// P = (2c(J-1)J - d) F^{-T} + 2 c1 F + 2 c2 (I1 F - F C)
template <class T>
std::array<T, 9> mr_stress(const std::array<T, 9>& F, const MooneyRivlinParams& p) {
  const T J = det3(F);
  if (!(value_of(J) > 0.0)) throw NonPositiveJacobian("material: det F <= 0");
  const auto cof = cofactor(F);
  std::array<T, 9> C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      T s = 0.0;
      for (int k = 0; k < 3; ++k) s += F[3 * k + i] * F[3 * k + j];
      C[3 * i + j] = s;
    }
  const T I1 = C[0] + C[4] + C[8];
  const T a = (T(2.0 * p.c()) * (J - T(1.0)) * J - T(p.d())) / J;
  std::array<T, 9> P;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      T FC = 0.0;
      for (int k = 0; k < 3; ++k) FC += F[3 * i + k] * C[3 * k + j];
      P[3 * i + j] = a * cof[3 * i + j] + T(2.0 * p.c1) * F[3 * i + j] + T(2.0 * p.c2) * (I1 * F[3 * i + j] - FC);
    }
  return P;
}

using HD = HyperDual<15>;

template <class T>
T acos_guarded(const T& x) {
  const double v = value_of(x);
  if (std::abs(v) > 1.0 + kAcosClamp) throw SolverError("fiber material: fiber cosine outside [-1,1]");
  if (std::abs(v) >= 1.0) return T(v > 0 ? 0.0 : std::acos(-1.0));
  return acos(x);
}

double acos_guarded(double v) {
  if (std::abs(v) > 1.0 + kAcosClamp) throw SolverError("fiber material: fiber cosine outside [-1,1]");
  if (std::abs(v) >= 1.0) return v > 0 ? 0.0 : std::acos(-1.0);
  return std::acos(v);
}

// Variables: F (9, row-major), k^1 (3), k^2 (3) with k^a = FF : (L^a x L^a).
template <class T>
T fiber_energy(const std::array<T, 15>& x, const FiberParams& p, bool with_matrix = true) {
  std::array<T, 9> F;
  for (int i = 0; i < 9; ++i) F[i] = x[i];
  const T psi_mat = with_matrix ? mr_energy(F, p.matrix) : T(0.0);

  const Vec3* L[2] = {&p.L1, &p.L2};
  std::array<std::array<T, 3>, 2> lt;
  T lam[2];
  T psi_fib = 0.0;
  T stretch_curv = 0.0;
  for (int a = 0; a < 2; ++a) {
    std::array<T, 3> l;
    for (int i = 0; i < 3; ++i) {
      T s = 0.0;
      for (int J = 0; J < 3; ++J) s += F[3 * i + J] * (*L[a])[J];
      l[i] = s;
    }
    lam[a] = sqrt(l[0] * l[0] + l[1] * l[1] + l[2] * l[2]);
    if (!(value_of(lam[a]) > 0.0)) throw SolverError("fiber material: zero fiber stretch");
    for (int i = 0; i < 3; ++i) lt[a][i] = l[i] / lam[a];
    // kappa = lam^-2 (I - lt x lt) k
    const T* k = &x[9 + 3 * a];
    const T lk = lt[a][0] * k[0] + lt[a][1] * k[1] + lt[a][2] * k[2];
    const T il2 = 1.0 / (lam[a] * lam[a]);
    std::array<T, 3> kap;
    for (int i = 0; i < 3; ++i) kap[i] = il2 * (k[i] - lt[a][i] * lk);
    // kappa . (F F^T kappa) = |F^T kappa|^2
    T q = 0.0;
    for (int J = 0; J < 3; ++J) {
      T s = 0.0;
      for (int i = 0; i < 3; ++i) s += F[3 * i + J] * kap[i];
      q += s * s;
    }
    const T lm1 = lam[a] - 1.0;
    stretch_curv += p.b_f * (lm1 * lm1) + p.c_f * q;
  }
  const T cosang = lt[0][0] * lt[1][0] + lt[0][1] * lt[1][1] + lt[0][2] * lt[1][2];
  const T theta = acos_guarded(cosang) - p.beta();
  if (std::abs(std::cos(value_of(theta))) < kTanGuard) throw SolverError("fiber material: fiber shear angle at tan singularity");
  const T t = tan(theta);
  psi_fib = p.a_f * (t * t) + 0.5 * stretch_curv;
  return p.zeta * psi_mat + (0.5 * (1.0 - p.zeta)) * psi_fib;
}

inline int slotF(int J) { return J; }
inline int slotG(int J, int K) { return 3 + 3 * J + K; }

void eval_mr(const double* Fp, const MooneyRivlinParams& p, PackedResponse& out, bool tangents) {
  std::array<double, 9> F;
  for (int i = 0; i < 9; ++i) F[i] = Fp[i];
  out.psi = mr_energy_d(F, p);
  out.S.fill(0.0);
  out.second_gradient = false;
  if (!tangents) {
    const auto P = mr_stress(F, p);
    for (int i = 0; i < 3; ++i)
      for (int J = 0; J < 3; ++J) out.S[12 * i + slotF(J)] = P[3 * i + J];
    return;
  }
  std::array<Dual<9>, 9> Fd;
  for (int i = 0; i < 9; ++i) Fd[i] = Dual<9>::variable(F[i], i);
  const auto P = mr_stress(Fd, p);
  out.T.fill(0.0);
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J) {
      const int row = 12 * i + slotF(J);
      out.S[row] = P[3 * i + J].v;
      for (int s = 0; s < 3; ++s)
        for (int T = 0; T < 3; ++T) out.T[row * 36 + 12 * s + slotF(T)] = P[3 * i + J].g[3 * s + T];
    }
}

void eval_fiber(const double* F, const double* FF, const FiberParams& p, PackedResponse& out) {
  const Vec3* L[2] = {&p.L1, &p.L2};
  std::array<HD, 15> x;
  for (int i = 0; i < 9; ++i) x[i] = HD::variable(F[i], i);
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 3; ++i) {
      double k = 0.0;
      for (int J = 0; J < 3; ++J)
        for (int K = 0; K < 3; ++K) k += FF[9 * i + 3 * J + K] * (*L[a])[J] * (*L[a])[K];
      x[9 + 3 * a + i] = HD::variable(k, 9 + 3 * a + i);
    }
  // matrix part through the cheaper first-gradient path
  PackedResponse mat;
  eval_mr(F, p.matrix, mat, true);
  const HD psi = fiber_energy(x, p, false);
  out.psi = psi.v + p.zeta * mat.psi;
  out.second_gradient = true;
  out.S.fill(0.0);
  out.T.fill(0.0);
  // LL[a][3J+K] = L^a_J L^a_K
  double LL[2][9];
  for (int a = 0; a < 2; ++a)
    for (int J = 0; J < 3; ++J)
      for (int K = 0; K < 3; ++K) LL[a][3 * J + K] = (*L[a])[J] * (*L[a])[K];

  for (int i = 0; i < 3; ++i) {
    for (int J = 0; J < 3; ++J) out.S[12 * i + slotF(J)] = psi.g[3 * i + J] + p.zeta * mat.S[12 * i + slotF(J)];
    for (int JK = 0; JK < 9; ++JK) {
      double s = 0.0;
      for (int a = 0; a < 2; ++a) s += psi.g[9 + 3 * a + i] * LL[a][JK];
      out.S[12 * i + 3 + JK] = s;
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int s = 0; s < 3; ++s) {
      for (int J = 0; J < 3; ++J) {
        const int row = 12 * i + slotF(J);
        for (int T = 0; T < 3; ++T)
          out.T[row * 36 + 12 * s + slotF(T)] =
              psi.hess(3 * i + J, 3 * s + T) + p.zeta * mat.T[row * 36 + 12 * s + slotF(T)];
        for (int TU = 0; TU < 9; ++TU) {
          double v = 0.0;
          for (int b = 0; b < 2; ++b) v += psi.hess(3 * i + J, 9 + 3 * b + s) * LL[b][TU];
          out.T[row * 36 + 12 * s + 3 + TU] = v;
          out.T[(12 * s + 3 + TU) * 36 + row] = v;
        }
      }
      double H[2][2];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) H[a][b] = psi.hess(9 + 3 * a + i, 9 + 3 * b + s);
      for (int JK = 0; JK < 9; ++JK)
        for (int TU = 0; TU < 9; ++TU) {
          double v = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) v += LL[a][JK] * H[a][b] * LL[b][TU];
          out.T[(12 * i + 3 + JK) * 36 + 12 * s + 3 + TU] = v;
        }
    }
}

}  // namespace

double FiberParams::beta() const {
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d += L1[i] * L2[i];
  return acos_guarded(d);
}

FiberParams default_fiber_params() { return FiberParams{}; }

MaterialResponse unpack(const PackedResponse& r) {
  MaterialResponse m;
  m.psi = r.psi;
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J) {
      m.P(i, J) = r.S[12 * i + J];
      for (int K = 0; K < 3; ++K) m.PP(i, J, K) = r.S[12 * i + 3 + 3 * J + K];
    }
  auto t = [&](int i, int a, int s, int b) { return r.T[(12 * i + a) * 36 + 12 * s + b]; };
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int s = 0; s < 3; ++s)
        for (int T = 0; T < 3; ++T) {
          m.C(i, J, s, T) = t(i, J, s, T);
          for (int U = 0; U < 3; ++U) {
            m.D(i, J, s, T, U) = t(i, J, s, 3 + 3 * T + U);
            m.E(i, J, U, s, T) = t(i, 3 + 3 * J + U, s, T);
            for (int K = 0; K < 3; ++K)
              for (int V = 0; V < 3; ++V) m.G(i, J, K, s, T, V) = t(i, 3 + 3 * J + K, s, 3 + 3 * T + V);
          }
        }
  return m;
}

Material Material::mooney_rivlin(MooneyRivlinParams p) {
  if (!(p.c1 > 0.0) || !(p.c2 > 0.0)) throw ValidationError("Mooney-Rivlin: c1 and c2 must be positive");
  Material m;
  m.kind_ = Kind::MooneyRivlin;
  m.mr_ = p;
  return m;
}

Material Material::fiber(FiberParams p) {
  if (!(p.zeta >= 0.0 && p.zeta <= 1.0)) throw ValidationError("fiber material: zeta must lie in [0,1]");
  if (!(p.matrix.c1 > 0.0) || !(p.matrix.c2 > 0.0)) throw ValidationError("fiber material: c1 and c2 must be positive");
  if (p.a_f < 0.0 || p.b_f < 0.0 || p.c_f < 0.0) throw ValidationError("fiber material: fiber parameters must be nonnegative");
  for (const Vec3* L : {&p.L1, &p.L2})
    if (std::abs(norm(*L) - 1.0) > 1e-12) throw ValidationError("fiber material: fiber directions must be unit vectors");
  Material m;
  m.kind_ = Kind::Fiber;
  m.fib_ = p;
  return m;
}

void Material::evaluate(const double* F, const double* FF, PackedResponse& out, bool tangents) const {
  if (kind_ == Kind::MooneyRivlin) {
    eval_mr(F, mr_, out, tangents);
  } else {
    eval_fiber(F, FF, fib_, out);
  }
}

MaterialResponse Material::response(const Mat3& F, const Tensor<3>& FF) const {
  PackedResponse r;
  evaluate(F.data.data(), FF.data.data(), r, true);
  return unpack(r);
}

double Material::energy(const Mat3& F, const Tensor<3>& FF) const {
  std::array<double, 9> f;
  for (int i = 0; i < 9; ++i) f[i] = F[i];
  if (kind_ == Kind::MooneyRivlin) return mr_energy_d(f, mr_);
  std::array<double, 15> x;
  for (int i = 0; i < 9; ++i) x[i] = f[i];
  const Vec3* L[2] = {&fib_.L1, &fib_.L2};
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 3; ++i) {
      double k = 0.0;
      for (int J = 0; J < 3; ++J)
        for (int K = 0; K < 3; ++K) k += FF(i, J, K) * (*L[a])[J] * (*L[a])[K];
      x[9 + 3 * a + i] = k;
    }
  // plain double evaluation through the same template
  struct Wrap {
    static double run(const std::array<double, 15>& x, const FiberParams& p) {
      std::array<HyperDual<1>, 15> y;
      for (int i = 0; i < 15; ++i) y[i] = HyperDual<1>(x[i]);
      return fiber_energy(y, p).v;
    }
  };
  return Wrap::run(x, fib_);
}

Material Material::scaled(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("scaled: factor must be positive");
  Material m = *this;
  m.mr_.c1 *= factor;
  m.mr_.c2 *= factor;
  m.fib_.matrix.c1 *= factor;
  m.fib_.matrix.c2 *= factor;
  m.fib_.a_f *= factor;
  m.fib_.b_f *= factor;
  m.fib_.c_f *= factor;
  return m;
}

Material Material::scaled_first_gradient(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("scaled_first_gradient: factor must be positive");
  Material m = *this;
  m.mr_.c1 *= factor;
  m.mr_.c2 *= factor;
  m.fib_.matrix.c1 *= factor;
  m.fib_.matrix.c2 *= factor;
  m.fib_.a_f *= factor;
  m.fib_.b_f *= factor;
  return m;
}

MaterialResponse mooney_rivlin(const Mat3& F, const MooneyRivlinParams& p) {
  return Material::mooney_rivlin(p).response(F, Tensor<3>{});
}

MaterialResponse fiber_reinforced(const Mat3& F, const Tensor<3>& FF, const FiberParams& p) {
  return Material::fiber(p).response(F, FF);
}

Material scaled(const Material& m, double factor) { return m.scaled(factor); }

}  // namespace gradhom
