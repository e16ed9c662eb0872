#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "common.hpp"
#include "gradhom/config.hpp"
#include "gradhom/errors.hpp"
#include "gradhom/report.hpp"
#include "gradhom/run.hpp"
#include "gradhom/vtk.hpp"

using namespace gtest;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gradhom_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int exit_code(const std::string& cmd) {
  const int st = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string validation_message(const std::string& json) {
  try {
    validate(parse_config(json));
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

RunOptions quiet(const fs::path& out, std::ostream& sink) {
  RunOptions o;
  o.out_dir = out.string();
  o.log = LogLevel::Quiet;
  o.out = &sink;
  o.err = &sink;
  return o;
}

}  // namespace

TEST_CASE("error metrics") {
  const Mat3 I = identity2();
  const ErrorMetric same = error_metrics(I, I);
  CHECK(same.e_max == 0.0);
  CHECK(same.e_norm == 0.0);
  Mat3 b = I;
  b(0, 0) += 0.01;
  const ErrorMetric m = error_metrics(I, b);
  CHECK(m.e_max == doctest::Approx(0.01 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(m.e_norm == doctest::Approx(0.01 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(!m.absolute);
  const ErrorMetric z = error_metrics(Mat3{}, b);
  CHECK(z.absolute);
  CHECK(z.e_max == doctest::Approx(1.01));
  CHECK(m.e_max >= 0.0);
}

TEST_CASE("shortest round-trip number format") {
  for (double v : {0.1, 1.0 / 3.0, 6132.725158303244, -1e-300, 100.0, 0.0})
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.5) == "2.5");
}

TEST_CASE("csv table") {
  CsvTable t({"a", "b"});
  t.row({cell(1), cell(0.5)});
  CHECK_THROWS_AS(t.row({"x"}), ValidationError);
  std::ostringstream os;
  t.write(os);
  CHECK(os.str() == "a,b\n1,0.5\n");
  CHECK_THROWS_AS(t.write("/nonexistent_dir/x.csv"), ValidationError);
}

TEST_CASE("configuration round trip") {
  for (const auto& entry : fs::directory_iterator(GRADHOM_CONFIGS)) {
    CAPTURE(entry.path().string());
    const RunConfig c = load_config(entry.path().string());
    CHECK_NOTHROW(validate(c));
    const std::string once = emit_config(c);
    CHECK(emit_config(parse_config(once)) == once);
  }
  const std::string def = emit_config(parse_config("{}"));
  CHECK(emit_config(parse_config(def)) == def);
  CHECK(def.back() == '\n');
}

TEST_CASE("configuration errors name the field") {
  CHECK(validation_message(R"({"rve": {"edge_mm": -1}})").find("rve.edge_mm") != std::string::npos);
  CHECK(validation_message(R"({"rve": {"material": {"model": "steel"}}})").find("rve.material.model") !=
        std::string::npos);
  CHECK(validation_message(R"({"rve": {"bogus": 1}})").find("rve.bogus") != std::string::npos);
  CHECK(validation_message(R"({"drive": {"F": [1, 0, 0]}})").find("drive.F") != std::string::npos);
  CHECK(validation_message(R"({"macro": {"elements": [2, "x", 1]}})").find("macro.elements[1]") !=
        std::string::npos);
  CHECK(validation_message(R"({"schedule": [{"prolongation": "sideways"}]})").find("schedule[0].prolongation") !=
        std::string::npos);
  CHECK(validation_message("{\"rve\": ").find("JSON") != std::string::npos);
  CHECK(validation_message(R"({"drive": {"FF_per_mm": [1,0,0,0,0,0,0,0,0, 0,0,0,0,0,0,0,0,0, 0,0,0,0,0,0,0,0,0]}})")
            .find("drive.FF_per_mm") == std::string::npos);
  CHECK(validation_message(R"({"drive": {"FF_per_mm": [0,1,0,0,0,0,0,0,0, 0,0,0,0,0,0,0,0,0, 0,0,0,0,0,0,0,0,0]}})")
            .find("drive.FF_per_mm") != std::string::npos);
}

TEST_CASE("Mooney-Rivlin fields: constant von Mises, exact VTK round trip") {
  const Material mr = Material::mooney_rivlin({2000.0, 1000.0});
  const RveSolution s = solve(make_rve_model(make_cube_rve(0.1, 2, 2, mr, BcKind::Dirichlet, false)), drive(bench_F()));
  const FieldSamples f = sample_rve_fields(s, 2);
  CHECK(f.points.size() == 8u * 27u);
  CHECK(f.cells.size() == 8u * 8u);
  const auto [lo, hi] = std::minmax_element(f.von_mises.begin(), f.von_mises.end());
  CHECK((*hi - *lo) / kBenchVonMises <= 1e-6);
  CHECK(*lo == doctest::Approx(kBenchVonMises).epsilon(1e-9));

  const fs::path dir = scratch("vtk");
  write_vtk((dir / "f.vtk").string(), f, "test");
  const FieldSamples g = read_vtk((dir / "f.vtk").string());
  REQUIRE(g.points.size() == f.points.size());
  REQUIRE(g.cells.size() == f.cells.size());
  double err = 0.0;
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    for (int d = 0; d < 3; ++d) {
      err = std::max(err, std::abs(g.points[i][d] - f.points[i][d]));
      err = std::max(err, std::abs(g.displacement[i][d] - f.displacement[i][d]));
    }
    err = std::max(err, std::abs(g.von_mises[i] - f.von_mises[i]) / kBenchVonMises);
    err = std::max(err, std::abs(g.hyperstress_norm[i] - f.hyperstress_norm[i]));
  }
  CHECK(err <= 1e-12);
  CHECK(g.cells == f.cells);
  CHECK_THROWS_AS(write_vtk("/nonexistent_dir/f.vtk", f, "x"), ValidationError);
}

TEST_CASE("reference state fields vanish") {
  const Material fib = Material::fiber(default_fiber_params());
  const RveSolution s = solve(make_rve_model(make_cube_rve(0.1, 2, 2, fib, BcKind::Periodic, false)), MacroDrive{});
  const FieldSamples f = sample_rve_fields(s, 1);
  for (double v : f.von_mises) CHECK(std::abs(v) < 1e-9);
  for (double v : f.hyperstress_norm) CHECK(v == 0.0);
}

TEST_CASE("rve command: empty drive, artifacts and determinism") {
  RunConfig c = parse_config(R"({"rve": {"elements": 2, "bc": "periodic", "material": {"model": "fiber"}}})");
  const fs::path a = scratch("rve_a"), b = scratch("rve_b");
  std::ostringstream sink;
  CHECK(run("rve", c, quiet(a, sink)) == 0);
  CHECK(run("rve", c, quiet(b, sink)) == 0);
  for (const char* name : {"config.json", "report.csv", "homogenized.csv", "convergence.csv", "scaling.csv", "fields_rve.vtk"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(emit_config(load_config((a / "config.json").string())) == emit_config(c));
  // zero-iteration solve and zero stresses
  CHECK(slurp(a / "convergence.csv") == "scale,iteration,residual\n1,0,0\n");
  std::istringstream h(slurp(a / "homogenized.csv"));
  std::string line;
  std::getline(h, line);
  while (std::getline(h, line)) {
    if (line.rfind("1,P,", 0) != 0 && line.rfind("1,PP,", 0) != 0) continue;
    CHECK(std::abs(std::strtod(line.substr(line.rfind(',') + 1).c_str(), nullptr)) < 1e-9);
  }
}

TEST_CASE("Mooney-Rivlin benchmark report rows") {
  const RunConfig c = load_config(std::string(GRADHOM_CONFIGS) + "/mooney_rivlin_rve.json");
  const fs::path out = scratch("mr");
  std::ostringstream sink;
  REQUIRE(run("rve", c, quiet(out, sink)) == 0);
  std::istringstream in(slurp(out / "report.csv"));
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.substr(line.rfind(',') + 1) == "true");
    ++rows;
  }
  CHECK(rows == 6);
}

TEST_CASE("command line exit codes") {
  const std::string exe = GRADHOM_EXE;
  const fs::path dir = scratch("cli");
  spit(dir / "bad.json", R"({"rve": {"elements": 0}})");
  spit(dir / "broken.json", R"({"rve": )");
  spit(dir / "ok.json", R"({"rve": {"elements": 2, "bc": "periodic"}})");
  // the fiber RVE needs several Newton updates for this drive
  spit(dir / "fail.json", R"({"rve": {"elements": 3, "bc": "periodic", "material": {"model": "fiber"}},
    "drive": {"F": [0.897,0.5,-0.4, -0.07,1.001,-0.1, 0.082,0.02,0.997],
              "FF_per_mm": [-0.033,0.015,-0.020, 0.015,0.013,0.043, -0.020,0.043,0.029,
                            0.015,-0.005,0.024, -0.005,0.028,0.028, 0.024,0.028,0.014,
                            0.023,0.005,-0.031, 0.005,-0.042,-0.001, -0.031,-0.001,-0.012]},
    "tolerances": {"rve_max_iter": 1}})");
  CHECK(exit_code(exe + " rve " + (dir / "bad.json").string()) == 2);
  CHECK(exit_code(exe + " rve " + (dir / "broken.json").string()) == 2);
  CHECK(exit_code(exe + " rve " + (dir / "missing.json").string()) == 2);
  CHECK(exit_code(exe + " nonsense") == 2);
  CHECK(exit_code(exe + " rve " + (dir / "ok.json").string() + " --out " + (dir / "o").string()) == 0);
  CHECK(fs::exists(dir / "o" / "report.csv"));
  CHECK(exit_code(exe + " rve " + (dir / "fail.json").string() + " --out " + (dir / "f").string()) == 3);
  CHECK(exit_code(exe + " --help") == 0);
}

TEST_CASE("log level parsing") {
  CHECK(parse_log_level("debug") == LogLevel::Debug);
  CHECK_THROWS_AS(parse_log_level("loud"), ValidationError);
}
