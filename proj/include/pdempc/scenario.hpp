#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pdempc/mpc.hpp"
#include "pdempc/reactor.hpp"
#include "pdempc/wave.hpp"

namespace pdempc {

enum class PlantKind { Wave, Reactor };
enum class RunMode { Mpc, DualMode, FeedbackOnly, Uncontrolled };

std::string to_string(PlantKind plant);
std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);

/// Everything one closed-loop experiment needs. Plant defaults are the
/// reference experiment values (see default_config).
struct ScenarioConfig {
  std::string name;
  PlantKind plant = PlantKind::Wave;
  WaveParams wave;
  ReactorParams reactor;
  double h = 0.075;
  int n = 519;
  int truncation = 100;
  int horizon = 15;
  double Q = 0.5;
  double R = 10.0;
  double u_min = -0.05;
  double u_max = 0.05;
  std::optional<double> y_min;
  std::optional<double> y_max;
  int steps = 160;
  RunMode mode = RunMode::Mpc;
  double Ky = 0.0;
  SwitchRule switch_rule = SwitchRule::fixed(80);
  std::string x0 = "reference";
};

ScenarioConfig default_config(PlantKind plant);

/// Built-in presets: "wave-paper", "reactor-paper".
std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

/// Throws InvalidArgument naming the offending field.
void validate(const ScenarioConfig& cfg);

/// Sectioned key = value text; see README for the grammar. Unknown sections
/// or keys, duplicates and malformed values throw ParseError.
ScenarioConfig parse_config_text(const std::string& text, const std::string& name = "config");
ScenarioConfig parse_config(const std::filesystem::path& path);

/// Preset name or path to a config file.
ScenarioConfig load_scenario(const std::string& preset_or_path);

/// Config text that parses back to `cfg`.
std::string format_config(const ScenarioConfig& cfg);

/// Initial state named by cfg.x0 on the scenario grid.
RealField initial_state(const ScenarioConfig& cfg, const GridPtr& grid);

struct ScenarioStats {
  int input_violations = 0;      // all modes, tolerance 1e-9
  int input_violations_mpc = 0;  // MPC steps only
  int output_violations = 0;     // tolerance 1e-6, only when output bounds are set
  double max_abs_u = 0.0;
  double min_y = 0.0;
  double max_y = 0.0;
  double initial_state_norm = 0.0;
  double final_state_norm = 0.0;
  int qp_solves = 0;
  long qp_iterations_total = 0;
  int qp_iterations_max = 0;
};

struct ScenarioResult {
  ScenarioConfig config;
  GridPtr grid;
  ClosedLoopRun run;
  bool aborted = false;
  std::optional<int> abort_step;
  std::string abort_reason;
  ScenarioStats stats;
};

/// Runs the closed loop in memory. An infeasible QP stops the run; the
/// trajectory up to that step is kept and the result is marked aborted.
ScenarioResult simulate_scenario(const ScenarioConfig& cfg);

ScenarioStats scan_statistics(const ScenarioConfig& cfg, const ClosedLoopRun& run);

std::string format_number(double value);
std::string timeseries_csv(const ScenarioResult& result);
std::string profile_csv(const ScenarioResult& result);
std::string summary_text(const ScenarioResult& result);

/// simulate_scenario, then writes timeseries.csv, profile.csv and
/// summary.txt into out_dir (created if missing).
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace pdempc
