#include <iostream>

#include <CLI11.hpp>

#include "curveortho/experiment.hpp"

int main(int argc, char** argv) {
  using namespace curveortho;
  CLI::App app{"Orthogonal polynomials over analytic Jordan curves"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "run an experiment config");

  std::string config;
  RunOptions opt;
  std::string out;
  run->add_option("config", config, "experiment config (JSON)")->required();
  run->add_flag("--check", opt.check, "exit 3 if any acceptance check fails");
  run->add_option("--nodes", opt.nodes, "override the initial quadrature node count")->check(CLI::PositiveNumber);
  run->add_flag("--svg", opt.svg, "write one SVG scatter per zero set");
  run->add_option("--out", out, "output directory (overrides output_dir)");
  run->add_option("--jobs", opt.jobs, "worker threads for degree sweeps")
      ->envname("CURVEORTHO_THREADS")
      ->check(CLI::PositiveNumber);
  run->add_flag("--verbose", opt.verbose, "per-degree term-bound logs on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  if (!out.empty()) opt.out = out;

  try {
    const ExperimentConfig cfg = load_config(config);
    const RunReport rep = run_experiment(cfg, opt);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& c : rep.checks)
      std::cout << (c.ok ? "PASS " : "FAIL ") << c.name << ": " << io::fmt(c.value) << " (limit " << io::fmt(c.threshold) << ")\n";
    if (opt.check && !rep.all_ok()) return 3;
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
