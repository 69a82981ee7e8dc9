#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pdempc/errors.hpp"
#include "pdempc/scenario.hpp"

using namespace pdempc;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<double> column(const std::string& csv, std::size_t index) {
  std::vector<double> out;
  const auto rows = lines(csv);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::istringstream in(rows[r]);
    std::string field;
    for (std::size_t c = 0; c <= index; ++c) std::getline(in, field, ',');
    out.push_back(field == "nan" ? std::nan("") : std::stod(field));
  }
  return out;
}

}  // namespace

TEST_CASE("presets carry the experiment values") {
  CHECK(preset_names() == std::vector<std::string>{"wave-paper", "reactor-paper"});
  const ScenarioConfig w = preset("wave-paper");
  CHECK(w.plant == PlantKind::Wave);
  CHECK(w.h == 0.075);
  CHECK(w.horizon == 15);
  CHECK(w.y_min.value() == -0.025);
  CHECK(w.y_max.value() == 0.3);
  CHECK(w.steps == 160);
  const ScenarioConfig r = preset("reactor-paper");
  CHECK(r.plant == PlantKind::Reactor);
  CHECK(r.mode == RunMode::DualMode);
  CHECK(r.Ky == -1.0);
  CHECK(r.u_min == -0.15);
  CHECK(r.u_max == 0.05);
  CHECK(!r.y_min.has_value());
  CHECK_THROWS_AS(preset("nope"), InvalidArgument);
}

TEST_CASE("scenario validation") {
  ScenarioConfig c = preset("wave-paper");
  c.h = 0.0;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c = preset("wave-paper");
  c.n = 100;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c = preset("wave-paper");
  c.mode = RunMode::DualMode;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c = preset("reactor-paper");
  c.Ky = 2.0;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c = preset("wave-paper");
  c.x0 = "random";
  CHECK_THROWS_AS(validate(c), InvalidArgument);
}

TEST_CASE("config parsing") {
  const ScenarioConfig c = parse_config_text(
      "preset = reactor-paper\n"
      "# comment\n"
      "[mpc]\n"
      "horizon = 12   # trailing\n"
      "y_max = 0.4\n"
      "[run]\n"
      "switch = feasibility:6\n"
      "steps = 90\n");
  CHECK(c.plant == PlantKind::Reactor);
  CHECK(c.horizon == 12);
  CHECK(c.y_max.value() == 0.4);
  CHECK(c.switch_rule.kind == SwitchRule::Kind::FeasibilityWindow);
  CHECK(c.switch_rule.value == 6);
  CHECK(c.steps == 90);

  const ScenarioConfig w = parse_config_text("[plant]\ntype = wave\nkappa = 0.5\n[mpc]\ny_min = none\n");
  CHECK(w.plant == PlantKind::Wave);
  CHECK(w.wave.kappa == 0.5);
  CHECK(!w.y_min.has_value());

  CHECK_THROWS_AS(parse_config_text("preset = wave-paper\n[mpc]\nhorizen = 3\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("preset = wave-paper\n[controller]\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("preset = wave-paper\n[mpc]\nQ = 1\nQ = 2\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("preset = wave-paper\n[mpc]\nQ = 1x\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("preset = wave-paper\n[discretization]\nh = -1\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("preset = wave-paper\n[plant]\nalpha = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[mpc]\nQ = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("preset = wave-paper\njunk line\n"), ParseError);
}

TEST_CASE("format_config round-trips") {
  for (const auto& name : preset_names()) {
    const ScenarioConfig c = preset(name);
    const std::string text = format_config(c);
    CHECK(format_config(parse_config_text(text, name)) == text);
  }
  ScenarioConfig c = preset("reactor-paper");
  c.switch_rule = SwitchRule::feasibility(4);
  c.y_min = -0.1;
  c.Q = 0.1;
  const std::string text = format_config(c);
  const ScenarioConfig back = parse_config_text(text);
  CHECK(back.Q == 0.1);
  CHECK(back.y_min.value() == -0.1);
  CHECK(back.switch_rule.value == 4);
  CHECK(format_config(back) == text);
}

TEST_CASE("csv layout and summary counters") {
  ScenarioConfig c = preset("reactor-paper");
  c.steps = 30;
  c.switch_rule = SwitchRule::fixed(20);
  const ScenarioResult r = simulate_scenario(c);
  REQUIRE(!r.aborted);
  const std::string ts = timeseries_csv(r);
  const auto rows = lines(ts);
  REQUIRE(rows.size() == 32);
  CHECK(rows[0] == "k,t,u,y,mode,objective,state_norm");
  CHECK(ts.find('\r') == std::string::npos);
  CHECK(ts.back() == '\n');

  const auto prof = lines(profile_csv(r));
  CHECK(prof.size() == 32);
  CHECK(std::count(prof[0].begin(), prof[0].end(), ',') == 511);

  const auto u = column(ts, 2);
  int violations = 0;
  double max_abs = 0.0;
  for (double v : u) {
    if (v < c.u_min - 1e-9 || v > c.u_max + 1e-9) ++violations;
    max_abs = std::max(max_abs, std::abs(v));
  }
  CHECK(violations == r.stats.input_violations);
  CHECK(max_abs == r.stats.max_abs_u);
  const std::string summary = summary_text(r);
  CHECK(summary.find("input_violations = " + std::to_string(violations)) != std::string::npos);
  CHECK(summary.find("switch_step = 20") != std::string::npos);
}

TEST_CASE("uncontrolled wave leaves the output band and feedback-only reactor leaves the input band") {
  ScenarioConfig w = preset("wave-paper");
  w.mode = RunMode::Uncontrolled;
  w.steps = 40;
  const ScenarioResult rw = simulate_scenario(w);
  CHECK(rw.stats.max_y > 0.3);
  CHECK(rw.stats.output_violations > 0);

  ScenarioConfig r = preset("reactor-paper");
  r.mode = RunMode::FeedbackOnly;
  const ScenarioResult rr = simulate_scenario(r);
  CHECK(rr.stats.input_violations > 0);
  CHECK(rr.run.switch_step.value() == 0);
}

TEST_CASE("scenario output is deterministic") {
  ScenarioConfig c = preset("reactor-paper");
  c.steps = 25;
  c.switch_rule = SwitchRule::fixed(10);
  const ScenarioResult a = simulate_scenario(c);
  const ScenarioResult b = simulate_scenario(c);
  CHECK(timeseries_csv(a) == timeseries_csv(b));
  CHECK(profile_csv(a) == profile_csv(b));
  CHECK(summary_text(a) == summary_text(b));
}

TEST_CASE("an infeasible wave QP aborts with a step index") {
  const ScenarioResult r = simulate_scenario(preset("wave-paper"));
  if (r.aborted) {
    REQUIRE(r.abort_step.has_value());
    CHECK(r.abort_reason.find("step " + std::to_string(*r.abort_step)) != std::string::npos);
    CHECK(static_cast<int>(r.run.steps.size()) == *r.abort_step + 1);
    CHECK(summary_text(r).find("status = aborted") != std::string::npos);
  } else {
    CHECK(static_cast<int>(r.run.steps.size()) == r.config.steps + 1);
  }
}
