#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "resonance/cli.hpp"

int main(int argc, char** argv) {
  using namespace resonance;
  CLI::App app{"Resonant semilinear problems: solvability checks and Lyapunov-Schmidt solves"};
  app.set_version_flag("--version", tool_version);

  RunConfig cfg;
  std::string accel, sweep;
  app.add_option("command", cfg.command, "check | solve | verify | sweep | selftest")
      ->required()
      ->check(CLI::IsMember({"check", "solve", "verify", "sweep", "selftest"}));
  app.add_option("spec", cfg.spec_path, "problem file");
  app.add_option("--modes", cfg.modes, "modes per dimension (grid = 4 x modes)");
  app.add_option("--tol", cfg.tol, "residual tolerance (L2)");
  app.add_option("--max-iter", cfg.max_iter, "iteration limit");
  app.add_option("--relax", cfg.relax, "relaxation in (0, 1]");
  app.add_option("--accel", accel, "anderson | none")->check(CLI::IsMember({"anderson", "none"}));
  app.add_flag("--gate", cfg.gate, "stop with exit 2 when the solvability condition fails");
  app.add_option("--sweep", sweep, "param:from:to:steps");
  app.add_flag("--refine", cfg.refine, "bisect the verdict flip after a sweep");
  app.add_option("--refine-tol", cfg.refine_tol, "bisection tolerance for --refine");
  app.add_option("--json", cfg.json_path, "write the JSON report (- for stdout)");
  app.add_option("--csv", cfg.csv_path, "write the solution or sweep table");
  app.add_option("--solution", cfg.solution_path, "verify: solution CSV");
  app.add_option("--echo", cfg.echo_path, "write the canonical form of the loaded spec");
  app.add_flag("--quiet", cfg.quiet, "no console summary and no metadata block in JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_invalid;
  }
  if (!accel.empty()) cfg.accel = parse_accel(accel);
  if (!sweep.empty()) {
    try {
      cfg.sweep = parse_sweep(sweep);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return exit_invalid;
    }
  }
  return run(cfg);
}
