#include "gradhom/vtk.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gradhom/errors.hpp"
#include "gradhom/report.hpp"

namespace gradhom {

namespace {

// Visits the lattice of every element: fn(element, xi) per point, cells appended to f.
template <class Fn>
void lattice(const SplinePatch& patch, int sub, FieldSamples& f, Fn&& fn) {
  if (sub < 1) throw ValidationError("vtk: lattice subdivision must be >= 1");
  const int m = sub + 1;
  for (int e = 0; e < patch.n_elements(); ++e) {
    const auto ijk = patch.element_ijk(e);
    std::array<std::pair<double, double>, 3> span;
    for (int d = 0; d < 3; ++d) span[d] = patch.kv[d].elements()[static_cast<std::size_t>(ijk[d])];
    const int base = static_cast<int>(f.points.size());
    for (int c = 0; c < m; ++c)
      for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
          const int idx[3] = {a, b, c};
          Point3 xi;
          for (int d = 0; d < 3; ++d)
            xi[d] = span[d].first + (span[d].second - span[d].first) * idx[d] / static_cast<double>(sub);
          fn(e, xi);
        }
    auto id = [&](int a, int b, int c) { return base + a + m * (b + m * c); };
    for (int c = 0; c < sub; ++c)
      for (int b = 0; b < sub; ++b)
        for (int a = 0; a < sub; ++a)
          f.cells.push_back({id(a, b, c), id(a + 1, b, c), id(a + 1, b + 1, c), id(a, b + 1, c), id(a, b, c + 1),
                             id(a + 1, b, c + 1), id(a + 1, b + 1, c + 1), id(a, b + 1, c + 1)});
  }
}

double hyper_norm(const PackedResponse& r) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int a = 3; a < 12; ++a) s += r.S[12 * i + a] * r.S[12 * i + a];
  return std::sqrt(s);
}

Mat3 stress_of(const PackedResponse& r) {
  Mat3 P;
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J) P(i, J) = r.S[12 * i + J];
  return P;
}

}  // namespace

FieldSamples sample_rve_fields(const RveSolution& sol, int sub) {
  const auto& prob = sol.model->problem;
  const auto& patch = prob.patch;
  const Eigen::VectorXd q = sol.q_full();
  const MacroDrive& d = sol.drive;
  FieldSamples f;
  PackedResponse resp;
  lattice(patch, sub, f, [&](int e, const Point3& xi) {
    const PointEval pe = patch.eval(xi, 2);
    const Point3& X = pe.X;
    Mat3 F = d.F;
    Tensor<3> FF = d.FF;
    Point3 u;
    for (int i = 0; i < 3; ++i) {
      u[i] = -X[i];
      for (int J = 0; J < 3; ++J) {
        u[i] += d.F(i, J) * X[J];
        for (int K = 0; K < 3; ++K) {
          u[i] += 0.5 * d.FF(i, J, K) * X[J] * X[K];
          F(i, J) += d.FF(i, J, K) * X[K];
        }
      }
    }
    for (int A = 0; A < pe.n(); ++A)
      for (int i = 0; i < 3; ++i) {
        const double qa = q[3 * pe.ids[A] + i];
        u[i] += qa * pe.R[A];
        for (int J = 0; J < 3; ++J) {
          F(i, J) += qa * pe.dR[3 * A + J];
          for (int K = 0; K < 3; ++K) FF(i, J, K) += qa * pe.d2R[9 * A + 3 * J + K];
        }
      }
    const Material& mat = prob.materials[static_cast<std::size_t>(prob.element_material[static_cast<std::size_t>(e)])];
    mat.evaluate(F.data.data(), FF.data.data(), resp, false);
    f.points.push_back(X);
    f.displacement.push_back(u);
    f.von_mises.push_back(von_mises(cauchy_stress(stress_of(resp), F)));
    f.hyperstress_norm.push_back(resp.second_gradient ? hyper_norm(resp) : 0.0);
  });
  return f;
}

FieldSamples sample_macro_fields(const MacroModel& model, const MacroState& state, int sub) {
  const auto& patch = model.problem.patch;
  FieldSamples f;
  lattice(patch, sub, f, [&](int e, const Point3& xi) {
    const PointEval pe = patch.eval(xi, 1);
    Point3 u{0.0, 0.0, 0.0};
    for (int A = 0; A < pe.n(); ++A)
      for (int i = 0; i < 3; ++i) u[i] += pe.R[A] * state.u[static_cast<std::size_t>(pe.ids[A])][i];
    int best = model.elem_first_qp[e];
    double bd = 1e300;
    for (int g = model.elem_first_qp[e]; g < model.elem_first_qp[e + 1]; ++g) {
      double dd = 0.0;
      for (int k = 0; k < 3; ++k) dd += (model.qps[g].xi[k] - xi[k]) * (model.qps[g].xi[k] - xi[k]);
      if (dd < bd) {
        bd = dd;
        best = g;
      }
    }
    f.points.push_back(pe.X);
    f.displacement.push_back(u);
    if (state.gp.size() == model.qps.size() && state.gp[best].valid) {
      const auto& gp = state.gp[best];
      f.von_mises.push_back(von_mises(cauchy_stress(stress_of(gp.response), gp.drive.F)));
      f.hyperstress_norm.push_back(hyper_norm(gp.response));
    } else {
      f.von_mises.push_back(0.0);
      f.hyperstress_norm.push_back(0.0);
    }
  });
  return f;
}

void write_vtk(const std::string& path, const FieldSamples& f, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw ValidationError("output: cannot write " + path);
  const std::size_t np = f.points.size();
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << np << " double\n";
  for (const auto& p : f.points)
    out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(p[2]) << '\n';
  out << "CELLS " << f.cells.size() << ' ' << 9 * f.cells.size() << '\n';
  for (const auto& c : f.cells) {
    out << 8;
    for (int v : c) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << f.cells.size() << '\n';
  for (std::size_t i = 0; i < f.cells.size(); ++i) out << "12\n";
  out << "POINT_DATA " << np << '\n';
  out << "VECTORS displacement double\n";
  for (const auto& u : f.displacement)
    out << format_double(u[0]) << ' ' << format_double(u[1]) << ' ' << format_double(u[2]) << '\n';
  out << "SCALARS von_mises double 1\nLOOKUP_TABLE default\n";
  for (double v : f.von_mises) out << format_double(v) << '\n';
  out << "SCALARS hyperstress_norm double 1\nLOOKUP_TABLE default\n";
  for (double v : f.hyperstress_norm) out << format_double(v) << '\n';
  if (!out) throw ValidationError("output: write failed for " + path);
}

FieldSamples read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("vtk: cannot read " + path);
  FieldSamples f;
  std::string tok;
  auto bad = [&path](const std::string& what) { return ValidationError("vtk: " + path + ": " + what); };
  std::string line;
  for (int i = 0; i < 4 && std::getline(in, line); ++i) {
  }
  std::size_t np = 0;
  while (in >> tok) {
    if (tok == "POINTS") {
      in >> np >> tok;
      f.points.resize(np);
      for (auto& p : f.points) in >> p[0] >> p[1] >> p[2];
    } else if (tok == "CELLS") {
      std::size_t nc = 0, total = 0;
      in >> nc >> total;
      f.cells.resize(nc);
      for (auto& c : f.cells) {
        int k = 0;
        in >> k;
        if (k != 8) throw bad("only hexahedra are supported");
        for (int& v : c) in >> v;
      }
    } else if (tok == "CELL_TYPES") {
      std::size_t nc = 0;
      in >> nc;
      for (std::size_t i = 0; i < nc; ++i) in >> tok;
    } else if (tok == "POINT_DATA") {
      in >> np;
    } else if (tok == "VECTORS") {
      in >> tok;
      const std::string name = tok;
      in >> tok;
      std::vector<Point3> v(np);
      for (auto& p : v) in >> p[0] >> p[1] >> p[2];
      if (name == "displacement") f.displacement = std::move(v);
    } else if (tok == "SCALARS") {
      std::string name;
      int ncomp = 1;
      in >> name >> tok >> ncomp >> tok >> tok;  // type, components, LOOKUP_TABLE, name
      std::vector<double> v(np);
      for (auto& x : v) in >> x;
      if (name == "von_mises") f.von_mises = std::move(v);
      if (name == "hyperstress_norm") f.hyperstress_norm = std::move(v);
    } else {
      throw bad("unexpected token " + tok);
    }
    if (!in && !in.eof()) throw bad("malformed data");
  }
  return f;
}

}  // namespace gradhom
