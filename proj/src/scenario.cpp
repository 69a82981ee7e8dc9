#include "pdempc/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "pdempc/errors.hpp"

namespace pdempc {

std::string to_string(PlantKind plant) { return plant == PlantKind::Wave ? "wave" : "reactor"; }

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Mpc: return "mpc";
    case RunMode::DualMode: return "dual_mode";
    case RunMode::FeedbackOnly: return "feedback_only";
    case RunMode::Uncontrolled: return "uncontrolled";
  }
  return "unknown";
}

RunMode parse_run_mode(const std::string& text) {
  if (text == "mpc") return RunMode::Mpc;
  if (text == "dual_mode") return RunMode::DualMode;
  if (text == "feedback_only") return RunMode::FeedbackOnly;
  if (text == "uncontrolled") return RunMode::Uncontrolled;
  throw ParseError("unknown mode '" + text + "' (mpc, dual_mode, feedback_only, uncontrolled)");
}

ScenarioConfig default_config(PlantKind plant) {
  ScenarioConfig cfg;
  cfg.plant = plant;
  if (plant == PlantKind::Wave) {
    cfg.name = "wave";
    cfg.h = 0.075;
    cfg.n = 519;
    cfg.truncation = 100;
    cfg.horizon = 15;
    cfg.Q = 0.5;
    cfg.R = 10.0;
    cfg.u_min = -0.05;
    cfg.u_max = 0.05;
    cfg.y_min = -0.025;
    cfg.y_max = 0.3;
    cfg.steps = 160;
    cfg.mode = RunMode::Mpc;
    cfg.Ky = 0.0;
  } else {
    cfg.name = "reactor";
    cfg.h = 0.1;
    cfg.n = 511;
    cfg.truncation = 100;
    cfg.horizon = 10;
    cfg.Q = 2.0;
    cfg.R = 10.0;
    cfg.u_min = -0.15;
    cfg.u_max = 0.05;
    cfg.steps = 140;
    cfg.mode = RunMode::DualMode;
    cfg.Ky = -1.0;
  }
  cfg.switch_rule = SwitchRule::fixed(80);
  cfg.x0 = "reference";
  return cfg;
}

std::vector<std::string> preset_names() { return {"wave-paper", "reactor-paper"}; }

ScenarioConfig preset(const std::string& name) {
  if (name == "wave-paper") {
    ScenarioConfig cfg = default_config(PlantKind::Wave);
    cfg.name = name;
    return cfg;
  }
  if (name == "reactor-paper") {
    ScenarioConfig cfg = default_config(PlantKind::Reactor);
    cfg.name = name;
    return cfg;
  }
  throw InvalidArgument("unknown preset '" + name + "'");
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.plant == PlantKind::Wave) {
    validate(cfg.wave);
  } else {
    validate(cfg.reactor);
  }
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) throw InvalidArgument("config: h must be positive");
  if (cfg.n < 3 || cfg.n % 2 == 0) throw InvalidArgument("config: n must be odd and >= 3");
  if (cfg.truncation < 1) throw InvalidArgument("config: truncation must be >= 1");
  if (cfg.horizon < 1) throw InvalidArgument("config: horizon must be >= 1");
  if (!(cfg.Q > 0.0) || !(cfg.R > 0.0)) throw InvalidArgument("config: Q and R must be positive");
  if (!(cfg.u_min < cfg.u_max)) throw InvalidArgument("config: need u_min < u_max");
  if (cfg.y_min && cfg.y_max && !(*cfg.y_min < *cfg.y_max)) throw InvalidArgument("config: need y_min < y_max");
  if (cfg.steps < 1) throw InvalidArgument("config: steps must be >= 1");
  if (cfg.mode == RunMode::DualMode && cfg.plant != PlantKind::Reactor) {
    throw InvalidArgument("config: dual_mode is available for the reactor plant only");
  }
  if (cfg.switch_rule.value < 0 ||
      (cfg.switch_rule.kind == SwitchRule::Kind::FeasibilityWindow && cfg.switch_rule.value < 1)) {
    throw InvalidArgument("config: invalid switch rule");
  }
  if (cfg.plant == PlantKind::Reactor) {
    const ReactorBoundary open{cfg.reactor.r};
    if (!(2.0 / cfg.h > reactor_abscissa(cfg.reactor, open))) {
      throw InvalidArgument("config: 2/h must exceed the spectral abscissa of the open-loop reactor");
    }
    if (cfg.mode != RunMode::Uncontrolled) {
      const ReactorBoundary closed = reactor_stabilized(cfg.reactor, cfg.Ky);
      if (!(closed.c < 1.0)) throw InvalidArgument("config: Ky does not give a boundary c in (0, 1)");
    }
  }
  if (cfg.x0 != "reference" && cfg.x0 != "zero") throw InvalidArgument("config: x0 must be 'reference' or 'zero'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class EntryTable {
 public:
  void add(const std::string& key, std::string value, int line) {
    if (entries_.count(key)) {
      throw ParseError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    entries_[key] = Entry{std::move(value), line, false};
  }

  const Entry* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  void require_all_used() const {
    for (const auto& [key, e] : entries_) {
      if (!e.used) throw ParseError("line " + std::to_string(e.line) + ": unknown key '" + key + "'");
    }
  }

 private:
  std::map<std::string, Entry> entries_;
};

double parse_double(const std::string& key, const Entry& e) {
  double value = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(e.line) + ": '" + key + "' expects a number, got '" + e.value + "'");
  }
  return value;
}

int parse_int(const std::string& key, const Entry& e) {
  int value = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("line " + std::to_string(e.line) + ": '" + key + "' expects an integer, got '" + e.value +
                     "'");
  }
  return value;
}

std::optional<double> parse_optional(const std::string& key, const Entry& e) {
  if (e.value == "none") return std::nullopt;
  return parse_double(key, e);
}

SwitchRule parse_switch(const std::string& key, const Entry& e) {
  const auto colon = e.value.find(':');
  if (colon == std::string::npos) {
    throw ParseError("line " + std::to_string(e.line) + ": '" + key + "' expects fixed:K or feasibility:M");
  }
  const std::string kind = e.value.substr(0, colon);
  const int value = parse_int(key, Entry{e.value.substr(colon + 1), e.line, true});
  if (kind == "fixed") return SwitchRule::fixed(value);
  if (kind == "feasibility") return SwitchRule::feasibility(value);
  throw ParseError("line " + std::to_string(e.line) + ": unknown switch rule '" + kind + "'");
}

void set_double(EntryTable& t, const std::string& key, double& target) {
  if (const Entry* e = t.find(key)) target = parse_double(key, *e);
}

void set_int(EntryTable& t, const std::string& key, int& target) {
  if (const Entry* e = t.find(key)) target = parse_int(key, *e);
}

void set_optional(EntryTable& t, const std::string& key, std::optional<double>& target) {
  if (const Entry* e = t.find(key)) target = parse_optional(key, *e);
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text, const std::string& name) {
  static const std::map<std::string, std::vector<std::string>> known = {
      {"", {"preset", "name"}},
      {"plant", {"type", "rho", "T", "kappa", "v", "alpha", "r"}},
      {"discretization", {"h", "n", "truncation"}},
      {"mpc", {"horizon", "Q", "R", "u_min", "u_max", "y_min", "y_max"}},
      {"run", {"mode", "steps", "x0", "Ky", "switch"}},
  };

  EntryTable table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty() || !known.count(section)) {
        throw ParseError("line " + std::to_string(line_no) + ": unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = known.at(section);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      const std::string where = section.empty() ? "top level" : "section [" + section + "]";
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "' in " + where);
    }
    if (value.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty value for '" + key + "'");
    table.add(section.empty() ? key : section + "." + key, value, line_no);
  }

  ScenarioConfig cfg;
  const Entry* base = table.find("preset");
  const Entry* type = table.find("plant.type");
  if (base) {
    try {
      cfg = preset(base->value);
    } catch (const InvalidArgument& e) {
      throw ParseError("line " + std::to_string(base->line) + ": " + e.what());
    }
    if (type && type->value != to_string(cfg.plant)) {
      throw ParseError("line " + std::to_string(type->line) + ": plant.type contradicts the preset");
    }
  } else if (type) {
    if (type->value == "wave") {
      cfg = default_config(PlantKind::Wave);
    } else if (type->value == "reactor") {
      cfg = default_config(PlantKind::Reactor);
    } else {
      throw ParseError("line " + std::to_string(type->line) + ": plant.type must be wave or reactor");
    }
  } else {
    throw ParseError("config: either 'preset' or [plant] type is required");
  }
  cfg.name = name;
  if (const Entry* e = table.find("name")) cfg.name = e->value;

  const bool wave = cfg.plant == PlantKind::Wave;
  for (const std::string key : {"rho", "T", "kappa", "v", "alpha", "r"}) {
    const bool wave_key = key == "rho" || key == "T" || key == "kappa";
    const Entry* e = table.find("plant." + key);
    if (!e) continue;
    if (wave_key != wave) {
      throw ParseError("line " + std::to_string(e->line) + ": '" + key + "' does not apply to the " +
                       to_string(cfg.plant) + " plant");
    }
    const double value = parse_double("plant." + key, *e);
    if (key == "rho") cfg.wave.rho = value;
    if (key == "T") cfg.wave.T = value;
    if (key == "kappa") cfg.wave.kappa = value;
    if (key == "v") cfg.reactor.v = value;
    if (key == "alpha") cfg.reactor.alpha = value;
    if (key == "r") cfg.reactor.r = value;
  }
  set_double(table, "discretization.h", cfg.h);
  set_int(table, "discretization.n", cfg.n);
  set_int(table, "discretization.truncation", cfg.truncation);
  set_int(table, "mpc.horizon", cfg.horizon);
  set_double(table, "mpc.Q", cfg.Q);
  set_double(table, "mpc.R", cfg.R);
  set_double(table, "mpc.u_min", cfg.u_min);
  set_double(table, "mpc.u_max", cfg.u_max);
  set_optional(table, "mpc.y_min", cfg.y_min);
  set_optional(table, "mpc.y_max", cfg.y_max);
  if (const Entry* e = table.find("run.mode")) cfg.mode = parse_run_mode(e->value);
  set_int(table, "run.steps", cfg.steps);
  if (const Entry* e = table.find("run.x0")) cfg.x0 = e->value;
  set_double(table, "run.Ky", cfg.Ky);
  if (const Entry* e = table.find("run.switch")) cfg.switch_rule = parse_switch("run.switch", *e);
  table.require_all_used();

  try {
    validate(cfg);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string(e.what()));
  }
  return cfg;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.stem().string());
}

ScenarioConfig load_scenario(const std::string& preset_or_path) {
  for (const auto& name : preset_names()) {
    if (name == preset_or_path) return preset(name);
  }
  return parse_config(preset_or_path);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("none"); };
  out << "name = " << cfg.name << "\n\n[plant]\ntype = " << to_string(cfg.plant) << "\n";
  if (cfg.plant == PlantKind::Wave) {
    out << "rho = " << format_number(cfg.wave.rho) << "\nT = " << format_number(cfg.wave.T)
        << "\nkappa = " << format_number(cfg.wave.kappa) << "\n";
  } else {
    out << "v = " << format_number(cfg.reactor.v) << "\nalpha = " << format_number(cfg.reactor.alpha)
        << "\nr = " << format_number(cfg.reactor.r) << "\n";
  }
  out << "\n[discretization]\nh = " << format_number(cfg.h) << "\nn = " << cfg.n << "\ntruncation = " << cfg.truncation
      << "\n\n[mpc]\nhorizon = " << cfg.horizon << "\nQ = " << format_number(cfg.Q) << "\nR = "
      << format_number(cfg.R) << "\nu_min = " << format_number(cfg.u_min) << "\nu_max = "
      << format_number(cfg.u_max) << "\ny_min = " << opt(cfg.y_min) << "\ny_max = " << opt(cfg.y_max)
      << "\n\n[run]\nmode = " << to_string(cfg.mode) << "\nsteps = " << cfg.steps << "\nx0 = " << cfg.x0
      << "\nKy = " << format_number(cfg.Ky) << "\nswitch = "
      << (cfg.switch_rule.kind == SwitchRule::Kind::FixedStep ? "fixed:" : "feasibility:") << cfg.switch_rule.value
      << "\n";
  return out.str();
}

RealField initial_state(const ScenarioConfig& cfg, const GridPtr& grid) {
  using std::numbers::pi;
  const Eigen::Index comps = cfg.plant == PlantKind::Wave ? 2 : 1;
  if (cfg.x0 == "zero") return RealField(grid, comps);
  if (cfg.x0 != "reference") throw InvalidArgument("initial_state: unknown x0 '" + cfg.x0 + "'");
  if (cfg.plant == PlantKind::Wave) {
    return RealField::sample(grid, 2, [](double z) {
      return std::array<double, 2>{std::cos(pi * z), std::sin(pi * z / 2.0)};
    });
  }
  return RealField::sample(grid, 1, [](double z) { return 0.5 * std::sin(pi * z); });
}

ScenarioStats scan_statistics(const ScenarioConfig& cfg, const ClosedLoopRun& run) {
  ScenarioStats s;
  if (run.steps.empty()) return s;
  s.initial_state_norm = norm(run.steps.front().x);
  s.final_state_norm = norm(run.steps.back().x);
  bool first = true;
  for (const auto& row : run.steps) {
    if (row.mode == ControlMode::Initial) continue;
    const bool u_bad = row.u < cfg.u_min - 1e-9 || row.u > cfg.u_max + 1e-9;
    if (u_bad) {
      ++s.input_violations;
      if (row.mode == ControlMode::Mpc) ++s.input_violations_mpc;
    }
    if ((cfg.y_min && row.y < *cfg.y_min - 1e-6) || (cfg.y_max && row.y > *cfg.y_max + 1e-6)) {
      ++s.output_violations;
    }
    s.max_abs_u = std::max(s.max_abs_u, std::abs(row.u));
    s.min_y = first ? row.y : std::min(s.min_y, row.y);
    s.max_y = first ? row.y : std::max(s.max_y, row.y);
    first = false;
    if (row.mode == ControlMode::Mpc) {
      ++s.qp_solves;
      s.qp_iterations_total += row.iterations;
      s.qp_iterations_max = std::max(s.qp_iterations_max, row.iterations);
    }
  }
  return s;
}

ScenarioResult simulate_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  ScenarioResult result;
  result.config = cfg;
  result.grid = make_grid(cfg.n);
  const double delta = 2.0 / cfg.h;
  const RealField x0 = initial_state(cfg, result.grid);

  DiscreteSystem sys;
  TerminalOperator terminal;
  if (cfg.plant == PlantKind::Wave) {
    sys = wave_discrete_ops(cfg.wave, delta, result.grid);
    if (cfg.mode != RunMode::FeedbackOnly) {
      auto basis = std::make_shared<const SpectralBasis>(wave_eigensystem(cfg.wave, cfg.truncation, result.grid));
      const double Q = cfg.Q;
      terminal = [basis, Q](const RealField& x) { return wave_lyapunov_apply(x, Q, *basis); };
    }
  } else {
    sys = reactor_discrete_ops(cfg.reactor, delta, result.grid);
    if (cfg.mode != RunMode::Uncontrolled) {
      const ReactorBoundary closed = reactor_stabilized(cfg.reactor, cfg.Ky);
      auto basis = std::make_shared<const SpectralBasis>(
          reactor_eigensystem(cfg.reactor, closed, cfg.truncation, result.grid));
      const double weight = cfg.Q + cfg.Ky * cfg.Ky * cfg.R;
      terminal = [basis, weight](const RealField& x) { return reactor_lyapunov_apply(x, weight, *basis); };
    }
  }

  MpcSpec spec;
  spec.horizon = cfg.horizon;
  spec.Q = cfg.Q;
  spec.R = cfg.R;
  spec.u_min = cfg.u_min;
  spec.u_max = cfg.u_max;
  spec.y_min = cfg.y_min;
  spec.y_max = cfg.y_max;
  spec.terminal = terminal;

  ClosedLoopRun& run = result.run;
  switch (cfg.mode) {
    case RunMode::Uncontrolled:
      run = run_open_loop(sys, x0, cfg.steps, terminal);
      break;
    case RunMode::FeedbackOnly:
      run = run_feedback(sys, cfg.Ky, x0, cfg.steps, terminal);
      break;
    case RunMode::Mpc:
    case RunMode::DualMode: {
      const MpcController mpc(sys, spec);
      run = cfg.mode == RunMode::Mpc
                ? run_mpc(mpc, x0, cfg.steps, OnInfeasible::Stop)
                : dual_mode_run(mpc, cfg.Ky, cfg.switch_rule, x0, cfg.steps, OnInfeasible::Stop);
      if (run.infeasible_step) {
        result.aborted = true;
        result.abort_step = run.infeasible_step;
        result.abort_reason = run.failure;
      }
      break;
    }
  }
  result.stats = scan_statistics(cfg, run);
  return result;
}

std::string timeseries_csv(const ScenarioResult& result) {
  std::string out = "k,t,u,y,mode,objective,state_norm\n";
  for (const auto& row : result.run.steps) {
    out += std::to_string(row.k);
    out += ',' + format_number(row.k * result.config.h);
    out += ',' + format_number(row.u);
    out += ',' + format_number(row.y);
    out += ',' + to_string(row.mode);
    out += ',' + format_number(row.k == 0 ? 0.0 : row.objective);
    out += ',' + format_number(norm(row.x));
    out += '\n';
  }
  return out;
}

std::string profile_csv(const ScenarioResult& result) {
  std::string out = "k";
  for (Eigen::Index i = 0; i < result.grid->size(); ++i) out += ',' + format_number(result.grid->nodes[i]);
  out += '\n';
  for (const auto& row : result.run.steps) {
    out += std::to_string(row.k);
    const auto first = row.x.component(0);
    for (Eigen::Index i = 0; i < first.size(); ++i) out += ',' + format_number(first[i]);
    out += '\n';
  }
  return out;
}

std::string summary_text(const ScenarioResult& result) {
  const ScenarioConfig& cfg = result.config;
  const ScenarioStats& s = result.stats;
  std::ostringstream out;
  out << "scenario = " << cfg.name << "\n";
  out << "plant = " << to_string(cfg.plant) << "\n";
  out << "mode = " << to_string(cfg.mode) << "\n";
  out << "status = " << (result.aborted ? "aborted" : "completed") << "\n";
  out << "steps_requested = " << cfg.steps << "\n";
  out << "steps_completed = " << (result.run.steps.size() - 1) << "\n";
  if (result.aborted) {
    out << "abort_step = " << *result.abort_step << "\n";
    out << "abort_reason = " << result.abort_reason << "\n";
    out << "abort_max_violation = " << format_number(result.run.failure_violation) << "\n";
  }
  out << "switch_step = " << (result.run.switch_step ? std::to_string(*result.run.switch_step) : "none") << "\n";
  out << "input_violations = " << s.input_violations << "\n";
  out << "input_violations_mpc = " << s.input_violations_mpc << "\n";
  out << "output_violations = " << s.output_violations << "\n";
  out << "max_abs_u = " << format_number(s.max_abs_u) << "\n";
  out << "min_y = " << format_number(s.min_y) << "\n";
  out << "max_y = " << format_number(s.max_y) << "\n";
  out << "initial_state_norm = " << format_number(s.initial_state_norm) << "\n";
  out << "final_state_norm = " << format_number(s.final_state_norm) << "\n";
  out << "qp_solves = " << s.qp_solves << "\n";
  out << "qp_iterations_total = " << s.qp_iterations_total << "\n";
  out << "qp_iterations_max = " << s.qp_iterations_max << "\n";
  for (const auto& w : result.run.warnings) out << "warning = " << w << "\n";
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  ScenarioResult result = simulate_scenario(cfg);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "timeseries.csv", timeseries_csv(result));
  write_file(out_dir / "profile.csv", profile_csv(result));
  write_file(out_dir / "summary.txt", summary_text(result));
  return result;
}

}  // namespace pdempc
