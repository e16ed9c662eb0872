#include "gradhom/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gradhom/errors.hpp"
#include "json.hpp"

namespace gradhom {

using json = nlohmann::ordered_json;

namespace {

// Field reader that tracks its path and rejects unknown keys.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + ": expected an object");
  }
  /// Rejects keys that were never asked for.
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ValidationError(at(it.key()) + ": unknown field");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& v) {
    if (auto p = find(key)) v = number(*p, at(key));
  }
  void get(const std::string& key, int& v) {
    if (auto p = find(key)) v = integer(*p, at(key));
  }
  void get(const std::string& key, bool& v) {
    if (auto p = find(key)) {
      if (!p->is_boolean()) throw ValidationError(at(key) + ": expected true or false");
      v = p->get<bool>();
    }
  }
  void get(const std::string& key, std::string& v) {
    if (auto p = find(key)) {
      if (!p->is_string()) throw ValidationError(at(key) + ": expected a string");
      v = p->get<std::string>();
    }
  }
  template <std::size_t N>
  void get(const std::string& key, std::array<double, N>& v) {
    if (auto p = find(key)) {
      if (!p->is_array() || p->size() != N)
        throw ValidationError(at(key) + ": expected an array of " + std::to_string(N) + " numbers");
      for (std::size_t i = 0; i < N; ++i) v[i] = number((*p)[i], at(key) + "[" + std::to_string(i) + "]");
    }
  }
  template <std::size_t N>
  void get(const std::string& key, std::array<int, N>& v) {
    if (auto p = find(key)) {
      if (!p->is_array() || p->size() != N)
        throw ValidationError(at(key) + ": expected an array of " + std::to_string(N) + " integers");
      for (std::size_t i = 0; i < N; ++i) v[i] = integer((*p)[i], at(key) + "[" + std::to_string(i) + "]");
    }
  }
  void get(const std::string& key, std::vector<double>& v) {
    if (auto p = find(key)) {
      if (!p->is_array()) throw ValidationError(at(key) + ": expected an array of numbers");
      v.clear();
      for (std::size_t i = 0; i < p->size(); ++i) v.push_back(number((*p)[i], at(key) + "[" + std::to_string(i) + "]"));
    }
  }

 private:
  static double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(path + ": must be finite");
    return v;
  }
  static int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ValidationError(path + ": expected an integer");
    return j.get<int>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read(Obj& o, MaterialConfig& m) {
  o.get("model", m.model);
  o.get("c1_MPa", m.c1_MPa);
  o.get("c2_MPa", m.c2_MPa);
  o.get("zeta", m.zeta);
  o.get("a_F_MPa", m.a_F_MPa);
  o.get("b_F_MPa", m.b_F_MPa);
  o.get("c_F_N", m.c_F_N);
  o.get("L1", m.L1);
  o.get("L2", m.L2);
}

json write(const MaterialConfig& m) {
  json j;
  j["model"] = m.model;
  j["c1_MPa"] = m.c1_MPa;
  j["c2_MPa"] = m.c2_MPa;
  j["zeta"] = m.zeta;
  j["a_F_MPa"] = m.a_F_MPa;
  j["b_F_MPa"] = m.b_F_MPa;
  j["c_F_N"] = m.c_F_N;
  j["L1"] = m.L1;
  j["L2"] = m.L2;
  return j;
}

void require(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) throw ValidationError(path + ": " + msg);
}

}  // namespace

Material MaterialConfig::build() const {
  if (model == "mooney-rivlin") return Material::mooney_rivlin({c1_MPa, c2_MPa});
  FiberParams p;
  p.matrix = {c1_MPa, c2_MPa};
  p.zeta = zeta;
  p.a_f = a_F_MPa;
  p.b_f = b_F_MPa;
  p.c_f = c_F_N;
  for (int i = 0; i < 3; ++i) {
    p.L1[i] = L1[static_cast<std::size_t>(i)];
    p.L2[i] = L2[static_cast<std::size_t>(i)];
  }
  return Material::fiber(p);
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  RunConfig c;
  {
    Obj o(root, "");
    o.get("command", c.command);
    if (auto r = o.find("rve")) {
      Obj ro(*r, "rve");
      ro.get("edge_mm", c.rve.edge_mm);
      ro.get("elements", c.rve.elements);
      ro.get("degree", c.rve.degree);
      if (auto m = ro.find("material")) {
        Obj mo(*m, "rve.material");
        read(mo, c.rve.material);
        mo.done();
      }
      ro.get("bc", c.rve.bc);
      ro.get("void_cross", c.rve.void_cross);
      ro.get("void_stiffness_factor", c.rve.void_stiffness_factor);
      ro.get("first_gradient_scales", c.rve.first_gradient_scales);
      ro.done();
    }
    if (auto d = o.find("drive")) {
      Obj dob(*d, "drive");
      dob.get("F", c.drive.F);
      dob.get("FF_per_mm", c.drive.FF_per_mm);
      dob.done();
    }
    if (auto m = o.find("macro")) {
      Obj mo(*m, "macro");
      mo.get("length_mm", c.macro.length_mm);
      mo.get("left_height_mm", c.macro.left_height_mm);
      mo.get("right_low_mm", c.macro.right_low_mm);
      mo.get("right_high_mm", c.macro.right_high_mm);
      mo.get("thickness_mm", c.macro.thickness_mm);
      mo.get("elements", c.macro.elements);
      mo.get("degree", c.macro.degree);
      mo.get("resultant_N", c.macro.resultant_N);
      mo.get("steps", c.macro.steps);
      mo.get("max_halvings", c.macro.max_halvings);
      mo.get("single_scale", c.macro.single_scale);
      mo.done();
    }
    if (auto s = o.find("schedule")) {
      if (!s->is_array()) throw ValidationError("schedule: expected an array of levels");
      for (std::size_t k = 0; k < s->size(); ++k) {
        Obj lo((*s)[k], "schedule[" + std::to_string(k) + "]");
        LevelConfig l;
        lo.get("macro", l.macro);
        lo.get("rve", l.rve);
        lo.get("prolongation", l.prolongation);
        lo.get("steps", l.steps);
        lo.done();
        c.schedule.push_back(l);
      }
    }
    if (auto t = o.find("tolerances")) {
      Obj to(*t, "tolerances");
      to.get("rve_atol_N", c.tolerances.rve_atol_N);
      to.get("rve_rtol", c.tolerances.rve_rtol);
      to.get("rve_max_iter", c.tolerances.rve_max_iter);
      to.get("macro_tol_N", c.tolerances.macro_tol_N);
      to.get("macro_max_iter", c.tolerances.macro_max_iter);
      to.get("report_threshold", c.tolerances.report_threshold);
      to.get("fd_step", c.tolerances.fd_step);
      to.get("fd_threshold", c.tolerances.fd_threshold);
      to.get("hill_mandel_threshold", c.tolerances.hill_mandel_threshold);
      to.get("admissibility_threshold", c.tolerances.admissibility_threshold);
      to.done();
    }
    if (auto out = o.find("output")) {
      Obj oo(*out, "output");
      oo.get("directory", c.output.directory);
      oo.get("vtk_lattice", c.output.vtk_lattice);
      oo.get("fields", c.output.fields);
      oo.done();
    }
    o.done();
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
  json root;
  root["command"] = c.command;
  json r;
  r["edge_mm"] = c.rve.edge_mm;
  r["elements"] = c.rve.elements;
  r["degree"] = c.rve.degree;
  r["material"] = write(c.rve.material);
  r["bc"] = c.rve.bc;
  r["void_cross"] = c.rve.void_cross;
  r["void_stiffness_factor"] = c.rve.void_stiffness_factor;
  r["first_gradient_scales"] = c.rve.first_gradient_scales;
  root["rve"] = r;
  json d;
  d["F"] = c.drive.F;
  d["FF_per_mm"] = c.drive.FF_per_mm;
  root["drive"] = d;
  json m;
  m["length_mm"] = c.macro.length_mm;
  m["left_height_mm"] = c.macro.left_height_mm;
  m["right_low_mm"] = c.macro.right_low_mm;
  m["right_high_mm"] = c.macro.right_high_mm;
  m["thickness_mm"] = c.macro.thickness_mm;
  m["elements"] = c.macro.elements;
  m["degree"] = c.macro.degree;
  m["resultant_N"] = c.macro.resultant_N;
  m["steps"] = c.macro.steps;
  m["max_halvings"] = c.macro.max_halvings;
  m["single_scale"] = c.macro.single_scale;
  root["macro"] = m;
  json s = json::array();
  for (const auto& l : c.schedule) {
    json lj;
    lj["macro"] = l.macro;
    lj["rve"] = l.rve;
    lj["prolongation"] = l.prolongation;
    lj["steps"] = l.steps;
    s.push_back(lj);
  }
  root["schedule"] = s;
  json t;
  t["rve_atol_N"] = c.tolerances.rve_atol_N;
  t["rve_rtol"] = c.tolerances.rve_rtol;
  t["rve_max_iter"] = c.tolerances.rve_max_iter;
  t["macro_tol_N"] = c.tolerances.macro_tol_N;
  t["macro_max_iter"] = c.tolerances.macro_max_iter;
  t["report_threshold"] = c.tolerances.report_threshold;
  t["fd_step"] = c.tolerances.fd_step;
  t["fd_threshold"] = c.tolerances.fd_threshold;
  t["hill_mandel_threshold"] = c.tolerances.hill_mandel_threshold;
  t["admissibility_threshold"] = c.tolerances.admissibility_threshold;
  root["tolerances"] = t;
  json o;
  o["directory"] = c.output.directory;
  o["vtk_lattice"] = c.output.vtk_lattice;
  o["fields"] = c.output.fields;
  root["output"] = o;
  return root.dump(2) + "\n";
}

void validate(const RunConfig& c) {
  require(c.command == "rve" || c.command == "two-scale" || c.command == "verify", "command",
          "must be rve, two-scale or verify");
  require(c.rve.edge_mm > 0.0, "rve.edge_mm", "must be positive");
  require(c.rve.degree >= 2, "rve.degree", "must be >= 2");
  require(c.rve.elements >= 1, "rve.elements", "must be >= 1");
  require(c.rve.bc == "dirichlet" || c.rve.bc == "periodic", "rve.bc", "must be dirichlet or periodic");
  if (c.rve.bc == "dirichlet")
    require(c.rve.elements + c.rve.degree >= 5, "rve.elements", "too few elements for Dirichlet constraints");
  else
    require(c.rve.elements + c.rve.degree >= 4, "rve.elements", "too few elements for periodic constraints");
  require(c.rve.void_stiffness_factor > 0.0 && c.rve.void_stiffness_factor <= 1.0, "rve.void_stiffness_factor",
          "must lie in (0, 1]");
  for (std::size_t k = 0; k < c.rve.first_gradient_scales.size(); ++k)
    require(c.rve.first_gradient_scales[k] > 0.0, "rve.first_gradient_scales[" + std::to_string(k) + "]",
            "must be positive");
  const auto& m = c.rve.material;
  require(m.model == "mooney-rivlin" || m.model == "fiber", "rve.material.model", "must be mooney-rivlin or fiber");
  require(m.c1_MPa > 0.0, "rve.material.c1_MPa", "must be positive");
  require(m.c2_MPa > 0.0, "rve.material.c2_MPa", "must be positive");
  require(m.zeta >= 0.0 && m.zeta <= 1.0, "rve.material.zeta", "must lie in [0, 1]");
  require(m.a_F_MPa >= 0.0, "rve.material.a_F_MPa", "must be nonnegative");
  require(m.b_F_MPa >= 0.0, "rve.material.b_F_MPa", "must be nonnegative");
  require(m.c_F_N >= 0.0, "rve.material.c_F_N", "must be nonnegative");
  for (auto [name, L] : {std::pair{"L1", m.L1}, std::pair{"L2", m.L2}}) {
    const double n = std::sqrt(L[0] * L[0] + L[1] * L[1] + L[2] * L[2]);
    require(std::abs(n - 1.0) <= 1e-12, std::string("rve.material.") + name, "must be a unit vector");
  }

  Mat3 F;
  for (int i = 0; i < 9; ++i) F[i] = c.drive.F[static_cast<std::size_t>(i)];
  require(det(F) > 0.0, "drive.F", "determinant must be positive");
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int K = J + 1; K < 3; ++K) {
        const double a = c.drive.FF_per_mm[static_cast<std::size_t>(9 * i + 3 * J + K)];
        const double b = c.drive.FF_per_mm[static_cast<std::size_t>(9 * i + 3 * K + J)];
        require(std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b))), "drive.FF_per_mm",
                "must be symmetric in its last two indices");
      }

  const auto& mc = c.macro;
  require(mc.length_mm > 0.0, "macro.length_mm", "must be positive");
  require(mc.left_height_mm > 0.0, "macro.left_height_mm", "must be positive");
  require(mc.right_high_mm > mc.right_low_mm, "macro.right_high_mm", "must exceed macro.right_low_mm");
  require(mc.thickness_mm > 0.0, "macro.thickness_mm", "must be positive");
  for (int d = 0; d < 3; ++d)
    require(mc.elements[static_cast<std::size_t>(d)] >= 1, "macro.elements[" + std::to_string(d) + "]",
            "must be >= 1");
  require(mc.degree >= 2, "macro.degree", "must be >= 2");
  require(mc.steps >= 1, "macro.steps", "must be >= 1");
  require(mc.max_halvings >= 0, "macro.max_halvings", "must be >= 0");

  for (std::size_t k = 0; k < c.schedule.size(); ++k) {
    const auto& l = c.schedule[k];
    const std::string at = "schedule[" + std::to_string(k) + "]";
    require(l.prolongation == "none" || l.prolongation == "macro-refine" || l.prolongation == "rve-refine",
            at + ".prolongation", "must be none, macro-refine or rve-refine");
    require(l.macro >= 0, at + ".macro", "must be >= 0");
    require(l.rve >= 0, at + ".rve", "must be >= 0");
  }
  if (!c.schedule.empty()) schedule_of(c).validate();

  const auto& t = c.tolerances;
  require(t.rve_atol_N > 0.0, "tolerances.rve_atol_N", "must be positive");
  require(t.rve_rtol >= 0.0, "tolerances.rve_rtol", "must be nonnegative");
  require(t.rve_max_iter >= 1, "tolerances.rve_max_iter", "must be >= 1");
  require(t.macro_tol_N > 0.0, "tolerances.macro_tol_N", "must be positive");
  require(t.macro_max_iter >= 1, "tolerances.macro_max_iter", "must be >= 1");
  require(t.report_threshold > 0.0, "tolerances.report_threshold", "must be positive");
  require(t.fd_step > 0.0, "tolerances.fd_step", "must be positive");
  require(t.fd_threshold > 0.0, "tolerances.fd_threshold", "must be positive");
  require(t.hill_mandel_threshold > 0.0, "tolerances.hill_mandel_threshold", "must be positive");
  require(t.admissibility_threshold > 0.0, "tolerances.admissibility_threshold", "must be positive");
  require(!c.output.directory.empty(), "output.directory", "must not be empty");
  require(c.output.vtk_lattice >= 1, "output.vtk_lattice", "must be >= 1");
}

RveProblem rve_problem(const RunConfig& c, double scale) {
  Material mat = c.rve.material.build();
  if (scale != 1.0) mat = mat.scaled_first_gradient(scale);
  RveProblem p = make_cube_rve(c.rve.edge_mm, c.rve.elements, c.rve.degree, mat,
                               c.rve.bc == "periodic" ? BcKind::Periodic : BcKind::Dirichlet, c.rve.void_cross,
                               c.rve.void_stiffness_factor);
  p.newton = {c.tolerances.rve_atol_N, c.tolerances.rve_rtol, c.tolerances.rve_max_iter};
  return p;
}

MacroDrive drive_of(const RunConfig& c) {
  MacroDrive d;
  for (int i = 0; i < 9; ++i) d.F[i] = c.drive.F[static_cast<std::size_t>(i)];
  for (int i = 0; i < 27; ++i) d.FF[i] = c.drive.FF_per_mm[static_cast<std::size_t>(i)];
  return d;
}

TwoScaleSpec two_scale_spec(const RunConfig& c) {
  TwoScaleSpec s;
  s.cook = {c.macro.length_mm, c.macro.left_height_mm, c.macro.right_low_mm, c.macro.right_high_mm,
            c.macro.thickness_mm};
  s.macro_nel = c.macro.elements;
  s.macro_p = c.macro.degree;
  for (int i = 0; i < 3; ++i) s.resultant_N[i] = c.macro.resultant_N[static_cast<std::size_t>(i)];
  s.load.steps = c.macro.steps;
  s.load.max_halvings = c.macro.max_halvings;
  s.load.tol = c.tolerances.macro_tol_N;
  s.load.max_iter = c.tolerances.macro_max_iter;
  s.rve_edge_mm = c.rve.edge_mm;
  s.rve_nel = c.rve.elements;
  s.rve_p = c.rve.degree;
  s.rve_material = c.rve.material.build();
  s.rve_bc = c.rve.bc == "periodic" ? BcKind::Periodic : BcKind::Dirichlet;
  s.rve_void = c.rve.void_cross;
  s.void_factor = c.rve.void_stiffness_factor;
  s.rve_newton = {c.tolerances.rve_atol_N, c.tolerances.rve_rtol, c.tolerances.rve_max_iter};
  if (c.macro.single_scale) s.direct_material = s.rve_material;
  return s;
}

Schedule schedule_of(const RunConfig& c) {
  Schedule s;
  if (c.schedule.empty()) {
    s.levels.push_back({0, 0, Prolongation::None, c.macro.steps});
    return s;
  }
  for (const auto& l : c.schedule) {
    Prolongation how = Prolongation::None;
    if (l.prolongation == "macro-refine") how = Prolongation::MacroRefine;
    if (l.prolongation == "rve-refine") how = Prolongation::RveRefine;
    s.levels.push_back({l.macro, l.rve, how, l.steps});
  }
  return s;
}

}  // namespace gradhom
