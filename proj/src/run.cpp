#include "gradhom/run.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <span>

#include "gradhom/errors.hpp"
#include "gradhom/report.hpp"
#include "gradhom/verify.hpp"
#include "gradhom/vtk.hpp"

namespace gradhom {

LogLevel parse_log_level(const std::string& s) {
  if (s == "quiet") return LogLevel::Quiet;
  if (s == "info") return LogLevel::Info;
  if (s == "debug") return LogLevel::Debug;
  throw ValidationError("--log-level: expected quiet, info or debug, got '" + s + "'");
}

namespace {

struct Ctx {
  const RunConfig& cfg;
  const RunOptions& opt;
  std::filesystem::path dir;
  int threads = 1;

  std::ostream& log(LogLevel at) const {
    static std::ostream null(nullptr);
    return static_cast<int>(opt.log) >= static_cast<int>(at) ? *opt.err : null;
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::vector<double> scales_of(const RunConfig& cfg) {
  return cfg.rve.first_gradient_scales.empty() ? std::vector<double>{1.0} : cfg.rve.first_gradient_scales;
}

ErrorMetric scalar_metric(double a, double b) {
  return error_metrics(std::span<const double>(&a, 1), std::span<const double>(&b, 1));
}

const char* bool_word(bool b) { return b ? "PASS" : "FAIL"; }

// ---------------------------------------------------------------- rve

int run_rve(const Ctx& c) {
  const MacroDrive d = drive_of(c.cfg);
  const auto scales = scales_of(c.cfg);
  const double thr = c.cfg.tolerances.report_threshold;

  CsvTable report({"scale", "quantity", "E_max", "E_norm", "absolute", "threshold", "pass"});
  CsvTable homog({"scale", "quantity", "index", "value"});
  CsvTable conv({"scale", "iteration", "residual"});
  CsvTable sweep({"scale", "iterations", "E_max_PP", "E_norm_PP", "hyperstress_ratio_percent"});

  for (std::size_t k = 0; k < scales.size(); ++k) {
    const double s = scales[k];
    const RveProblem prob = rve_problem(c.cfg, s);
    c.log(LogLevel::Info) << "rve: scale " << format_double(s) << ", " << prob.patch.n_elements() << " elements\n";
    const RveSolution sol = solve(make_rve_model(prob), d);
    const HomogenizedResponse h = condensed_tangents(sol);
    const MaterialResponse ref = prob.materials[0].response(d.F, d.FF);
    c.log(LogLevel::Info) << "rve: converged in " << sol.iterations << " iterations\n";

    const std::string sc = cell(s);
    auto add = [&](const std::string& q, const ErrorMetric& m) {
      report.row({sc, q, cell(m.e_max), cell(m.e_norm), cell(m.absolute), cell(thr), cell(m.e_max <= thr)});
    };
    add("psi", scalar_metric(ref.psi, h.psi));
    add("P", error_metrics(ref.P, h.P));
    add("dP/dF", error_metrics(ref.C, h.A_FF));
    add("average F", error_metrics(d.F, sol.avg.F));
    add("average FF", error_metrics(d.FF, sol.avg.FF));
    const ErrorMetric epp = error_metrics(ref.PP, h.PP);
    add("PP", epp);

    const double np = norm(h.PP);
    const double ratio = np > 0.0 ? 100.0 * norm(h.PP_P) / np : 0.0;
    sweep.row({sc, cell(sol.iterations), cell(epp.e_max), cell(epp.e_norm), cell(ratio)});

    homog.row({sc, "psi", "0", cell(h.psi)});
    for (int i = 0; i < 9; ++i) homog.row({sc, "P", cell(i), cell(h.P[i])});
    for (int i = 0; i < 27; ++i) homog.row({sc, "PP", cell(i), cell(h.PP[i])});
    for (int i = 0; i < 27; ++i) homog.row({sc, "PP_P", cell(i), cell(h.PP_P[i])});
    for (int i = 0; i < 27; ++i) homog.row({sc, "PP_PP", cell(i), cell(h.PP_PP[i])});
    for (int r = 0; r < 36; ++r)
      for (int col = 0; col < 36; ++col) homog.row({sc, "A", cell(36 * r + col), cell(h.A(r, col))});
    for (std::size_t it = 0; it < sol.residuals.size(); ++it)
      conv.row({sc, cell(static_cast<int>(it)), cell(sol.residuals[it])});

    if (c.cfg.output.fields) {
      const std::string name = scales.size() > 1 ? "fields_rve_" + std::to_string(k) + ".vtk" : "fields_rve.vtk";
      write_vtk(c.path(name), sample_rve_fields(sol, c.cfg.output.vtk_lattice), "gradhom rve scale " + sc);
    }
  }
  report.write(c.path("report.csv"));
  homog.write(c.path("homogenized.csv"));
  conv.write(c.path("convergence.csv"));
  sweep.write(c.path("scaling.csv"));
  sweep.write(*c.opt.out);
  return 0;
}

// ---------------------------------------------------------------- two-scale

int run_two_scale(const Ctx& c) {
  TwoScaleSpec spec = two_scale_spec(c.cfg);
  spec.threads = c.threads;
  const Schedule sched = schedule_of(c.cfg);
  sched.validate();

  auto& lg = c.log(LogLevel::Info);
  const ScheduleResult res = run_schedule(spec, sched, [&](int level, int step, int it, double r) {
    lg << "level " << level << " step " << step << " iteration " << it << " residual " << std::scientific
       << std::setprecision(3) << r << std::defaultfloat << '\n';
  });

  CsvTable conv({"level", "macro", "rve", "step", "load", "halvings", "iteration", "residual", "rve_iterations"});
  CsvTable report({"quantity", "value"});
  for (std::size_t l = 0; l < res.levels.size(); ++l) {
    const LevelRecord& lr = res.levels[l];
    const std::string L = cell(static_cast<int>(l));
    for (std::size_t s = 0; s < lr.steps.size(); ++s) {
      const StepRecord& st = lr.steps[s];
      for (std::size_t it = 0; it < st.residuals.size(); ++it)
        conv.row({L, cell(lr.level.macro), cell(lr.level.rve), cell(static_cast<int>(s)), cell(st.load),
                  cell(st.halvings), cell(static_cast<int>(it)), cell(st.residuals[it]), cell(st.rve_iterations)});
    }
    const std::string p = "level" + L + ".";
    report.row({p + "initial_residual", cell(lr.initial_residual)});
    report.row({p + "newton_iterations", cell(lr.newton_iterations)});
    report.row({p + "fell_back", cell(lr.fell_back)});
  }
  const MacroState& st = res.state;
  for (int i = 0; i < 3; ++i) {
    report.row({std::string("reaction_") + "xyz"[i], cell(st.reaction[i])});
    report.row({std::string("applied_") + "xyz"[i], cell(st.applied[i])});
  }
  report.row({"balance_error", cell(st.balance_error())});
  report.row({"load", cell(st.load)});

  conv.write(c.path("convergence.csv"));
  report.write(c.path("report.csv"));
  if (c.cfg.output.fields)
    write_vtk(c.path("fields_macro.vtk"), sample_macro_fields(*res.model, st, c.cfg.output.vtk_lattice),
              "gradhom two-scale");
  *c.opt.out << "reaction " << format_double(st.reaction[0]) << ' ' << format_double(st.reaction[1]) << ' '
             << format_double(st.reaction[2]) << " N, balance error " << format_double(st.balance_error()) << '\n';
  return 0;
}

// ---------------------------------------------------------------- verify

int run_verify(const Ctx& c) {
  const MacroDrive d = drive_of(c.cfg);
  const auto& tol = c.cfg.tolerances;
  const double edge = c.cfg.rve.edge_mm;
  const bool homogeneous = !c.cfg.rve.void_cross;
  const bool affine_mr = homogeneous && c.cfg.rve.material.model == "mooney-rivlin" && max_abs(d.FF) == 0.0;

  std::vector<std::pair<std::string, CheckRow>> rows;
  for (double s : scales_of(c.cfg)) {
    const std::string sc = format_double(s);
    const RveProblem prob = rve_problem(c.cfg, s);
    c.log(LogLevel::Info) << "verify: scale " << sc << '\n';
    const RveSolution sol = solve(make_rve_model(prob), d);
    const HomogenizedResponse h = condensed_tangents(sol);
    auto add = [&](const std::string& name, double v, double t) { rows.push_back({sc, {name, v, t}}); };

    add("average F", error_metrics(d.F, sol.avg.F).e_max, tol.admissibility_threshold);
    add("average FF", error_metrics(d.FF, sol.avg.FF).e_max, tol.admissibility_threshold);
    add("admissibility", admissibility_error(sol), tol.admissibility_threshold);
    c.log(LogLevel::Info) << "verify: finite differences (72 solves)\n";
    const TangentCheck tc = tangent_fd_check(sol, h, tol.fd_step, edge);
    const char* names[4] = {"tangent dP/dF", "tangent dP/dFF", "tangent dPP/dF", "tangent dPP/dFF"};
    for (int b = 0; b < 4; ++b) add(names[b], tc.block[b], tol.fd_threshold);
    add("hill-mandel", hill_mandel_max(sol, h, 10, edge), tol.hill_mandel_threshold);
    if (affine_mr) {
      const MaterialResponse ref = prob.materials[0].response(d.F, d.FF);
      add("psi", scalar_metric(ref.psi, h.psi).e_max, tol.report_threshold);
      add("P", error_metrics(ref.P, h.P).e_max, tol.report_threshold);
      add("dP/dF", error_metrics(ref.C, h.A_FF).e_max, tol.report_threshold);
      add("third-gradient average", constant_p_oracle_error(sol, edge), tol.report_threshold);
    }
  }

  CsvTable report({"scale", "check", "value", "threshold", "pass"});
  bool ok = true;
  auto& out = *c.opt.out;
  for (const auto& [sc, r] : rows) {
    report.row({sc, r.name, cell(r.value), cell(r.threshold), cell(r.pass())});
    out << std::left << std::setw(8) << sc << std::setw(26) << r.name << std::setw(14) << std::scientific
        << std::setprecision(3) << r.value << std::setw(12) << r.threshold << std::defaultfloat << std::right
        << bool_word(r.pass()) << '\n';
    ok = ok && r.pass();
  }
  report.write(c.path("report.csv"));
  out << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? 0 : 1;
}

}  // namespace

int run(const std::string& command, const RunConfig& cfg, const RunOptions& opt) {
  validate(cfg);
  Ctx c{cfg, opt, opt.out_dir.value_or(cfg.output.directory)};
  c.threads = opt.threads.value_or(1);
  if (c.threads < 1) throw ValidationError("--threads: must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(c.dir, ec);
  if (ec) throw ValidationError("output.directory: cannot create " + c.dir.string() + ": " + ec.message());
  if (command != "rve" && command != "two-scale" && command != "verify")
    throw ValidationError("command: expected rve, two-scale or verify, got '" + command + "'");
  {
    std::ofstream os(c.dir / "config.json");
    os << emit_config(cfg);
    if (!os) throw ValidationError("output.directory: cannot write " + (c.dir / "config.json").string());
  }
  if (command == "rve") return run_rve(c);
  if (command == "two-scale") return run_two_scale(c);
  return run_verify(c);
}

}  // namespace gradhom
