#include <CLI11.hpp>

#include <iostream>

#include "pdempc/errors.hpp"
#include "pdempc/scenario.hpp"
#include "verify/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Constrained MPC for boundary-controlled PDEs (Cayley-Tustin discretization)"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario and write timeseries.csv, profile.csv, summary.txt");
  std::string target;
  std::string out_dir = "out";
  int steps = 0;
  std::string mode;
  run->add_option("scenario", target, "Preset name or config file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--steps", steps, "Override the number of steps")->check(CLI::PositiveNumber);
  run->add_option("--mode", mode, "mpc | dual_mode | feedback_only | uncontrolled");

  auto* presets = app.add_subcommand("presets", "List the built-in presets");
  auto* verify = app.add_subcommand("verify", "Run the oracle and acceptance suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*presets) {
      for (const auto& name : pdempc::preset_names()) {
        std::cout << "# preset " << name << "\n" << pdempc::format_config(pdempc::preset(name)) << "\n";
      }
      return 0;
    }
    if (*verify) {
      const auto rows = pdempc::verify::run_acceptance();
      pdempc::verify::print_table(std::cout, rows);
      return pdempc::verify::all_passed(rows) ? 0 : 1;
    }
    pdempc::ScenarioConfig cfg = pdempc::load_scenario(target);
    if (steps > 0) cfg.steps = steps;
    if (!mode.empty()) cfg.mode = pdempc::parse_run_mode(mode);
    const auto result = pdempc::run_scenario(cfg, out_dir);
    std::cout << pdempc::summary_text(result);
    if (result.aborted) {
      std::cerr << "error: " << result.abort_reason << "\n";
      return 3;
    }
    return 0;
  } catch (const pdempc::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
