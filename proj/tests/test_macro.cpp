#include "common.hpp"
#include "gradhom/errors.hpp"
#include "gradhom/macro.hpp"

using namespace gtest;

namespace {

const Material kMR = Material::mooney_rivlin({2000.0, 1000.0});

MacroProblem two_scale(std::array<int, 3> nel, double edge, int rve_nel, Vec3 resultant = {0, 100, 0}) {
  MacroProblem p = build_cooks(nel, 2, {}, resultant);
  p.rve = make_rve_model(make_cube_rve(edge, rve_nel, 2, kMR, BcKind::Periodic, false));
  return p;
}

MacroProblem single_scale(std::array<int, 3> nel, Vec3 resultant = {0, 100, 0}) {
  MacroProblem p = build_cooks(nel, 2, {}, resultant);
  p.material = kMR;
  return p;
}

double max_diff(const std::vector<Point3>& a, const std::vector<Point3>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(a[i][k] - b[i][k]));
  return d;
}

}  // namespace

TEST_CASE("Cook geometry") {
  MacroProblem p = build_cooks({12, 12, 3}, 2);
  p.material = kMR;
  CHECK(p.patch.n_ctrl() == 14 * 14 * 5);
  const CookGeometry g;
  // trapezoid with parallel sides 44 and 16, width 48, extruded by 10
  const double V = 0.5 * (44.0 + 16.0) * 48.0 * 10.0;
  CHECK(g.volume() == doctest::Approx(V).epsilon(1e-15));
  CHECK(std::abs(p.patch.volume() - V) / V <= 1e-12);
  CHECK(std::abs(make_macro_model(p)->volume - V) / V <= 1e-12);
  CHECK(g.right_face_area() == doctest::Approx(160.0));
  // the clamp holds two control layers
  CHECK(p.clamped.size() == 2u * 14 * 5);
}

TEST_CASE("zero traction: the reference state is the solution") {
  const auto m = make_macro_model(single_scale({2, 2, 1}, {0, 0, 0}));
  std::vector<GaussPointState> gp;
  update_points(*m, std::vector<Point3>(m->problem.patch.ctrl.size(), Point3{0, 0, 0}), gp, 1);
  CHECK(macro_assemble(*m, gp, 1.0, false).r.norm() == 0.0);

  const MacroState s = solve_two_scale(two_scale({1, 1, 1}, 0.1, 2, {0, 0, 0}));
  REQUIRE(s.steps.size() == 1);
  CHECK(s.steps[0].residuals.size() == 1);
  CHECK(max_diff(s.u, std::vector<Point3>(s.u.size(), Point3{0, 0, 0})) == 0.0);
}

TEST_CASE("affine state: two-scale internal forces equal the single-scale ones") {
  const auto ms = make_macro_model(single_scale({1, 1, 1}));
  const auto mt = make_macro_model(two_scale({1, 1, 1}, 0.1, 3));
  const Mat3 F = bench_F();
  std::vector<Point3> u(ms->problem.patch.ctrl.size());
  for (std::size_t a = 0; a < u.size(); ++a) {
    const Point3& X = ms->problem.patch.ctrl[a];
    for (int i = 0; i < 3; ++i) {
      u[a][i] = -X[i];
      for (int J = 0; J < 3; ++J) u[a][i] += F(i, J) * X[J];
    }
  }
  std::vector<GaussPointState> gs, gt;
  update_points(*ms, u, gs, 1);
  update_points(*mt, u, gt, 1);
  const Eigen::VectorXd fs = macro_assemble(*ms, gs, 0.0, false).f_int;
  const Eigen::VectorXd ft = macro_assemble(*mt, gt, 0.0, false).f_int;
  CHECK((fs - ft).norm() / fs.norm() <= 1e-10);
}

TEST_CASE("macro tangent against finite differences of the residual") {
  const auto m = make_macro_model(two_scale({1, 1, 1}, 0.1, 2));
  Rng rng(81);
  std::vector<Point3> u(m->problem.patch.ctrl.size());
  for (auto& v : u) v = {0.05 * rng(), 0.05 * rng(), 0.05 * rng()};
  for (int a : m->problem.clamped) u[static_cast<std::size_t>(a)] = {0, 0, 0};
  std::vector<GaussPointState> gp;
  update_points(*m, u, gp, 1);
  const MacroAssembly a = macro_assemble(*m, gp, 1.0, true);

  const double h = 1e-6;
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXd dir(m->n_free);
    for (auto& v : dir) v = rng();
    auto residual = [&](double t) {
      std::vector<Point3> up = u;
      for (std::size_t A = 0; A < up.size(); ++A)
        for (int i = 0; i < 3; ++i) {
          const int f = m->free_index[3 * A + i];
          if (f >= 0) up[A][i] += t * dir[f];
        }
      std::vector<GaussPointState> g = gp;
      update_points(*m, up, g, 1);
      return Eigen::VectorXd(macro_assemble(*m, g, 1.0, false).r);
    };
    const Eigen::VectorXd fd = (residual(h) - residual(-h)) / (2 * h);
    const Eigen::VectorXd an = a.K * dir;
    CHECK((fd - an).norm() / an.norm() <= 1e-4);
  }
}

TEST_CASE("two-scale solution with a small homogeneous RVE matches the single-scale solution") {
  const MacroState ss = solve_two_scale(single_scale({2, 2, 1}));
  const MacroState tiny = solve_two_scale(two_scale({2, 2, 1}, 1e-3, 2));
  CHECK(max_diff(ss.u, tiny.u) <= 1e-8);

  // the gap is a size effect of order l^2
  const MacroState big = solve_two_scale(two_scale({2, 2, 1}, 1e-1, 2));
  const double ratio = max_diff(ss.u, big.u) / max_diff(ss.u, tiny.u);
  CHECK(ratio == doctest::Approx(1e4).epsilon(0.05));
}

TEST_CASE("single-scale Cook: reaction balance, quadratic convergence and load stepping") {
  MacroProblem p = single_scale({4, 4, 1});
  const MacroState s = solve_two_scale(p);
  CHECK(s.balance_error() <= 1e-6);
  CHECK(s.applied[1] == doctest::Approx(100.0));
  const auto& r = s.steps.back().residuals;
  REQUIRE(r.size() >= 3);
  CHECK(r.back() <= 1e-6);
  for (std::size_t k = 1; k + 1 < r.size(); ++k) CHECK(r[k + 1] <= 1e-2 * r[k]);

  p.load.steps = 3;
  const MacroState stepped = solve_two_scale(p);
  REQUIRE(stepped.steps.size() == 3);
  CHECK(stepped.steps[0].load == doctest::Approx(1.0 / 3.0));
  CHECK(stepped.load == 1.0);
  CHECK(max_diff(s.u, stepped.u) <= 1e-7);
}

TEST_CASE("threaded RVE updates are deterministic") {
  MacroProblem p = two_scale({1, 1, 1}, 0.1, 2);
  const MacroState a = solve_two_scale(p);
  p.threads = 3;
  const MacroState b = solve_two_scale(p);
  CHECK(max_diff(a.u, b.u) == 0.0);
  CHECK(a.steps[0].residuals == b.steps[0].residuals);
}

TEST_CASE("macro failures surface as solver errors") {
  MacroProblem p = single_scale({1, 1, 1}, {0, 1e9, 0});
  p.load.max_halvings = 1;
  p.load.max_iter = 5;
  CHECK_THROWS_AS(solve_two_scale(p), SolverError);

  MacroProblem no_material = build_cooks({1, 1, 1}, 2);
  CHECK_THROWS_AS(make_macro_model(no_material), ValidationError);
  CHECK_THROWS_AS(build_cooks({1, 1, 1}, 1), ValidationError);
}
