#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gradhom/errors.hpp"
#include "gradhom/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-scale second-gradient homogenization with spline RVEs"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 1;
  std::string out_dir;
  std::string log_level = "info";
  app.add_option("--threads", threads, "Worker threads for RVE solves")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
  app.add_option("--log-level", log_level, "quiet, info or debug")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));

  std::string config;
  const char* commands[][2] = {{"rve", "Solve one RVE (or a first-gradient scaling sweep) and report errors"},
                               {"two-scale", "Solve the two-scale Cook membrane problem"},
                               {"verify", "Run the RVE invariant checks and print a pass/fail matrix"}};
  for (auto& c : commands) app.add_subcommand(c[0], c[1])->add_option("config", config, "JSON run configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    gradhom::RunOptions opt;
    opt.threads = threads;
    if (!out_dir.empty()) opt.out_dir = out_dir;
    opt.log = gradhom::parse_log_level(log_level);
    return gradhom::run(command, gradhom::load_config(config), opt);
  } catch (const gradhom::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gradhom::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  }
}
