#include "common.hpp"
#include "gradhom/errors.hpp"
#include "gradhom/materials.hpp"

using namespace gtest;

namespace {

Mat3 fd_stress(const Material& m, const Mat3& F, const Tensor<3>& FF, double h) {
  Mat3 P;
  for (int k = 0; k < 9; ++k) {
    Mat3 Fp = F, Fm = F;
    Fp[k] += h;
    Fm[k] -= h;
    P[k] = (m.energy(Fp, FF) - m.energy(Fm, FF)) / (2 * h);
  }
  return P;
}

Tensor<3> fd_hyperstress(const Material& m, const Mat3& F, const Tensor<3>& FF, double h) {
  Tensor<3> PP;
  for (int k = 0; k < 27; ++k) {
    Tensor<3> Gp = FF, Gm = FF;
    Gp[k] += h;
    Gm[k] -= h;
    PP[k] = (m.energy(F, Gp) - m.energy(F, Gm)) / (2 * h);
  }
  return PP;
}

}  // namespace

TEST_CASE("Mooney-Rivlin reference state is stress free") {
  const Material m = Material::mooney_rivlin({});
  const MaterialResponse r = m.response(identity2(), {});
  CHECK(std::abs(r.psi) < 1e-12);
  CHECK(max_abs(r.P) < 1e-12);
  CHECK(max_abs(r.PP) == 0.0);
}

TEST_CASE("Mooney-Rivlin von Mises stress at the benchmark deformation") {
  const Material m = Material::mooney_rivlin({2000.0, 1000.0});
  const Mat3 F = bench_F();
  const MaterialResponse r = m.response(F, {});
  CHECK(von_mises(cauchy_stress(r.P, F)) == doctest::Approx(kBenchVonMises).epsilon(1e-9));
}

TEST_CASE("Mooney-Rivlin stress and tangent against finite differences") {
  const Material m = Material::mooney_rivlin({});
  Rng rng(51);
  for (int k = 0; k < 10; ++k) {
    const Mat3 F = rng.deformation(0.2);
    const MaterialResponse r = m.response(F, {});
    CHECK(rel_max(r.P, fd_stress(m, F, {}, 1e-6)) < 1e-6);
    const double h = 1e-6;
    Tensor<4> C;
    for (int c = 0; c < 9; ++c) {
      Mat3 Fp = F, Fm = F;
      Fp[c] += h;
      Fm[c] -= h;
      const Mat3 d = (m.response(Fp, {}).P - m.response(Fm, {}).P) * (1.0 / (2 * h));
      for (int a = 0; a < 9; ++a) C[static_cast<std::size_t>(9 * a + c)] = d[a];
    }
    CHECK(rel_max(r.C, C) < 1e-6);
  }
}

TEST_CASE("fiber model reference state") {
  const Material m = Material::fiber(default_fiber_params());
  const MaterialResponse r = m.response(identity2(), {});
  CHECK(std::abs(r.psi) < 1e-12);
  CHECK(max_abs(r.P) < 1e-9);
  CHECK(max_abs(r.PP) < 1e-12);
}

TEST_CASE("fiber model stresses against finite differences of the energy") {
  const Material m = Material::fiber(default_fiber_params());
  const Mat3 F = bench_F();
  const Tensor<3> FF = bench_FF();
  const MaterialResponse r = m.response(F, FF);
  CHECK(rel_max(r.PP, fd_hyperstress(m, F, FF, 1e-6)) < 1e-6);
  CHECK(rel_max(r.P, fd_stress(m, F, FF, 1e-6)) < 1e-6);

  Rng rng(52);
  for (int k = 0; k < 5; ++k) {
    const Mat3 Fr = rng.deformation(0.15);
    const Tensor<3> Gr = rng.second_gradient(0.05);
    const MaterialResponse rr = m.response(Fr, Gr);
    CHECK(rel_max(rr.PP, fd_hyperstress(m, Fr, Gr, 1e-6)) < 1e-6);
    CHECK(rel_max(rr.P, fd_stress(m, Fr, Gr, 1e-6)) < 1e-6);
  }
}

TEST_CASE("fiber model packed tangent against finite differences of the packed stresses") {
  const Material m = Material::fiber(default_fiber_params());
  double F[9], FF[27];
  for (int i = 0; i < 9; ++i) F[i] = bench_F()[i];
  for (int i = 0; i < 27; ++i) FF[i] = bench_FF()[i];
  PackedResponse r, rp, rm;
  m.evaluate(F, FF, r, true);
  const double h = 1e-6;
  double worst = 0.0, scale = 0.0;
  for (double t : r.T) scale = std::max(scale, std::abs(t));
  for (int s = 0; s < 3; ++s)
    for (int b = 0; b < 12; ++b) {
      double* x = b < 3 ? &F[3 * s + b] : &FF[9 * s + b - 3];
      const double x0 = *x;
      *x = x0 + h;
      m.evaluate(F, FF, rp, false);
      *x = x0 - h;
      m.evaluate(F, FF, rm, false);
      *x = x0;
      for (int row = 0; row < 36; ++row) {
        const double fd = (rp.S[row] - rm.S[row]) / (2 * h);
        worst = std::max(worst, std::abs(fd - r.T[static_cast<std::size_t>(row * 36 + 12 * s + b)]));
      }
    }
  CHECK(worst / scale < 1e-6);
}

TEST_CASE("material scaling") {
  const Material m = Material::fiber(default_fiber_params());
  const Mat3 F = bench_F();
  const Tensor<3> FF = bench_FF();
  const MaterialResponse a = m.response(F, FF), b = m.scaled(1.0).response(F, FF);
  CHECK(a.psi == b.psi);
  CHECK(a.P == b.P);
  CHECK(a.PP == b.PP);
  CHECK(m.scaled(1e-8).energy(F, FF) == doctest::Approx(1e-8 * a.psi).epsilon(1e-14));

  // first-gradient scaling leaves the curvature part untouched
  const FiberParams p = m.scaled_first_gradient(1e-4).fib();
  CHECK(p.c_f == default_fiber_params().c_f);
  CHECK(p.a_f == doctest::Approx(1e-4 * default_fiber_params().a_f));
  CHECK(p.matrix.c1 == doctest::Approx(1e-4 * default_fiber_params().matrix.c1));
}

TEST_CASE("fiber model rejects a collapsed fiber") {
  const Material m = Material::fiber(default_fiber_params());
  Mat3 F;  // zero map: no fiber stretch
  CHECK_THROWS_AS(m.response(F, {}), SolverError);
}
