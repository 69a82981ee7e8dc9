#include "verify/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

#include "pdempc/errors.hpp"
#include "pdempc/qp.hpp"
#include "pdempc/scenario.hpp"
#include "verify/oracles.hpp"

namespace pdempc::verify {

namespace {

// Pinned tolerances.
constexpr double kResolventEigenTol = 1e-6;
constexpr double kEigenResidualTol = 1e-4;
constexpr double kFeedthroughTol = 1e-8;
constexpr double kFeedthroughPresetTol = 1e-10;
constexpr double kLyapunovTol = 1e-3;
constexpr double kReactorBvpTol = 1e-5;
constexpr double kOutputFeedbackTol = 1e-6;
constexpr double kQpAgreementTol = 1e-6;
constexpr double kKktTol = 1e-9;
constexpr double kInputTol = 1e-9;
constexpr double kOutputTol = 1e-6;
constexpr double kDecayTol = 1e-3;
constexpr double kReactorGrowthRate = 0.09;
constexpr double kReactorDecayRatio = 0.05;

// Runtime limits in seconds.
constexpr double kLimit1 = 10.0;
constexpr double kLimit2 = 1.0;
constexpr double kLimit3 = 60.0;
constexpr double kLimit4 = 10.0;
constexpr double kLimit5 = 10.0;
constexpr double kLimit6 = 30.0;
constexpr double kLimit7 = 300.0;
constexpr double kLimit8 = 300.0;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void finish(CheckRow& row, Clock::time_point start, double limit) {
  row.seconds = elapsed(start);
  if (row.seconds > limit) {
    row.pass = false;
    row.detail += "; runtime " + sci(row.seconds) + " s exceeds " + sci(limit) + " s";
  }
}

double relative(double err, double scale) { return err / std::max(scale, 1e-300); }

}  // namespace

CheckRow criterion_operator_identities() {
  const auto start = Clock::now();
  CheckRow row{1, "wave resolvent-eigen identity and eigen-residual", true, ""};
  const WaveParams p;
  const GridPtr grid = make_grid(519);
  const double delta = 2.0 / 0.075;
  const SpectralBasis basis = wave_eigensystem(p, 10, grid);
  double worst_resolvent = 0.0;
  double worst_residual = 0.0;
  for (int k = -10; k <= 10; ++k) {
    const SpectralMode& m = basis.mode(k);
    const ComplexField lhs = wave_resolvent(m.eigenvector, delta, p);
    const ComplexField rhs = (1.0 / (delta - m.eigenvalue)) * m.eigenvector;
    worst_resolvent = std::max(worst_resolvent, relative(norm(lhs - rhs), norm(rhs)));
    const ComplexField Aphi = wave_differential(m.eigenvector, p);
    worst_residual = std::max(worst_residual, relative(norm(Aphi - m.eigenvalue * m.eigenvector), norm(m.eigenvector)));
  }
  row.pass = worst_resolvent <= kResolventEigenTol && worst_residual <= kEigenResidualTol;
  row.detail = "max rel resolvent err " + sci(worst_resolvent) + " (tol " + sci(kResolventEigenTol) +
               "), max FD residual " + sci(worst_residual) + " (tol " + sci(kEigenResidualTol) + ")";
  finish(row, start, kLimit1);
  return row;
}

CheckRow criterion_feedthrough() {
  const auto start = Clock::now();
  CheckRow row{2, "Dd closed form vs observation of the input profile", true, ""};
  struct Case {
    WaveParams p;
    double delta;
  };
  const std::vector<Case> cases = {
      {{1.0, 1.0, 0.75}, 2.0 / 0.075}, {{1.0, 1.0, 0.3}, 4.0}, {{2.0, 0.5, 0.4}, 3.0},
      {{0.5, 3.0, 0.9}, 1.5},          {{1.5, 2.0, 2.5}, 6.0},
  };
  const GridPtr grid = make_grid(519);
  double worst = 0.0;
  double worst_hyper = 0.0;
  for (const auto& c : cases) {
    const double closed = wave_feedthrough(c.p, c.delta);
    const RealField profile = wave_input_profile(c.p, c.delta, grid);
    const double constructed = profile.values()(0, 0) / c.p.rho;
    worst = std::max(worst, std::abs(closed - constructed));
    worst_hyper = std::max(worst_hyper, std::abs(closed - wave_feedthrough_hyperbolic(c.p, c.delta)));
  }
  const double at_preset = wave_feedthrough(cases[0].p, cases[0].delta);
  const double preset_err = std::abs(at_preset + 1.0);
  row.pass = worst <= kFeedthroughTol && worst_hyper <= kFeedthroughTol && preset_err <= kFeedthroughPresetTol;
  row.detail = "max |Dd - C profile| " + sci(worst) + ", vs hyperbolic form " + sci(worst_hyper) + " (tol " +
               sci(kFeedthroughTol) + "); |Dd + 1| at the wave preset " + sci(preset_err) + " (tol " +
               sci(kFeedthroughPresetTol) + ")";
  finish(row, start, kLimit2);
  return row;
}

CheckRow criterion_lyapunov() {
  const auto start = Clock::now();
  CheckRow row{3, "discrete Lyapunov residual, both plants", true, ""};
  std::mt19937_64 rng(3003);
  double worst_wave = 0.0;
  double worst_reactor = 0.0;
  {
    const WaveParams p;
    const GridPtr grid = make_grid(519);
    const DiscreteSystem sys = wave_discrete_ops(p, 2.0 / 0.075, grid);
    const SpectralBasis basis = wave_eigensystem(p, 100, grid);
    const double Q = 0.5;
    for (int t = 0; t < 20; ++t) {
      const RealField x = random_wave_domain_state(rng, p, grid);
      const RealField Ax = sys.Ad(x);
      const double lhs_x = inner_product(x, wave_lyapunov_apply(x, Q, basis));
      const double lhs_ax = inner_product(Ax, wave_lyapunov_apply(Ax, Q, basis));
      const double cx = sys.Cd(x);
      worst_wave = std::max(worst_wave, relative(std::abs(lhs_ax - lhs_x + Q * cx * cx), lhs_x));
    }
  }
  {
    const ReactorParams p;
    const GridPtr grid = make_grid(511);
    const ReactorBoundary b = reactor_stabilized(p, -1.0);
    const DiscreteSystem sys = reactor_discrete_ops(p, 20.0, grid, b);
    const SpectralBasis basis = reactor_eigensystem(p, b, 100, grid);
    const double Ky = -1.0;
    const double weight = 2.0 + Ky * Ky * 10.0;
    for (int t = 0; t < 20; ++t) {
      const RealField x = random_reactor_domain_state(rng, b, grid);
      const RealField Ax = sys.Ad(x);
      const double lhs_x = inner_product(x, reactor_lyapunov_apply(x, weight, basis));
      const double lhs_ax = inner_product(Ax, reactor_lyapunov_apply(Ax, weight, basis));
      const double cx = sys.Cd(x);
      worst_reactor = std::max(worst_reactor, relative(std::abs(lhs_ax - lhs_x + weight * cx * cx), lhs_x));
    }
  }
  row.pass = worst_wave <= kLyapunovTol && worst_reactor <= kLyapunovTol;
  row.detail = "max rel residual wave " + sci(worst_wave) + ", reactor " + sci(worst_reactor) + " (tol " +
               sci(kLyapunovTol) + ", M=100, 20 states each)";
  finish(row, start, kLimit3);
  return row;
}

CheckRow criterion_reactor_resolvent() {
  const auto start = Clock::now();
  CheckRow row{4, "reactor resolvent vs RK4 boundary-value oracle", true, ""};
  const ReactorParams p;
  const GridPtr grid = make_grid(511);
  const double s = 20.0;
  std::mt19937_64 rng(4004);
  double worst = 0.0;
  for (const ReactorBoundary b : {ReactorBoundary{p.r}, reactor_stabilized(p, -1.0)}) {
    for (int t = 0; t < 20; ++t) {
      const auto f = random_smooth_function(rng);
      const RealField fs = RealField::sample(grid, 1, f);
      const RealField closed = reactor_resolvent(fs, s, p, b);
      const RealField oracle = reactor_bvp_oracle(f, s, p, b, grid);
      worst = std::max(worst, relative(norm(closed - oracle), norm(oracle)));
    }
  }
  row.pass = worst <= kReactorBvpTol;
  row.detail = "max rel err " + sci(worst) + " over 40 right-hand sides, c = r and 2r-1 (tol " +
               sci(kReactorBvpTol) + ")";
  finish(row, start, kLimit4);
  return row;
}

CheckRow criterion_output_feedback() {
  const auto start = Clock::now();
  CheckRow row{5, "output feedback Ky=-1 vs stabilized reactor discretization", true, ""};
  const ReactorParams p;
  const GridPtr grid = make_grid(511);
  const double delta = 20.0;
  const DiscreteSystem closed = closed_loop_discrete(reactor_discrete_ops(p, delta, grid), -1.0);
  const DiscreteSystem direct = reactor_discrete_ops(p, delta, grid, reactor_stabilized(p, -1.0));
  std::mt19937_64 rng(5005);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const RealField x = random_smooth_state(rng, 1, grid);
    const RealField a = closed.Ad(x);
    const RealField b = direct.Ad(x);
    worst = std::max(worst, relative(norm(a - b), norm(b)));
    worst = std::max(worst, relative(std::abs(closed.Cd(x) - direct.Cd(x)), std::abs(direct.Cd(x))));
  }
  const double bd = relative(norm(closed.Bd - direct.Bd), norm(direct.Bd));
  const double dd = std::abs(closed.Dd - direct.Dd);
  row.pass = worst <= kOutputFeedbackTol && bd <= kOutputFeedbackTol && dd <= kOutputFeedbackTol;
  row.detail = "max rel err Ad/Cd " + sci(worst) + ", Bd " + sci(bd) + ", |dDd| " + sci(dd) + " (tol " +
               sci(kOutputFeedbackTol) + ")";
  finish(row, start, kLimit5);
  return row;
}

CheckRow criterion_qp_equivalence() {
  const auto start = Clock::now();
  CheckRow row{6, "Hildreth vs exhaustive active-set oracle", true, ""};
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> size_dist(1, 8);
  double worst_du = 0.0;
  double worst_kkt = 0.0;
  int failures = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = size_dist(rng);
    const int rows = std::uniform_int_distribution<int>(1, std::min(16, 2 * n))(rng);
    Eigen::MatrixXd L(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L(i, j) = unit(rng);
    const Eigen::MatrixXd H = L * L.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = 4.0 * unit(rng);
    Eigen::MatrixXd Ac(rows, n);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < n; ++j) Ac(i, j) = unit(rng);
    Eigen::VectorXd feasible(n);
    for (int i = 0; i < n; ++i) feasible[i] = 0.5 * unit(rng);
    Eigen::VectorXd slack(rows);
    for (int i = 0; i < rows; ++i) slack[i] = 0.5 * (unit(rng) + 1.0);
    const Eigen::VectorXd bc = Ac * feasible + slack;
    try {
      const QpSolution h = solve_qp_hildreth(H, g, Ac, bc);
      const QpSolution o = solve_qp_oracle(H, g, Ac, bc);
      worst_du = std::max(worst_du, (h.U - o.U).lpNorm<Eigen::Infinity>());
      const KktResiduals r = kkt_residuals(H, g, Ac, bc, h);
      worst_kkt = std::max({worst_kkt, r.stationarity, r.primal, r.dual, r.complementarity});
    } catch (const std::exception&) {
      ++failures;
    }
  }
  row.pass = failures == 0 && worst_du <= kQpAgreementTol && worst_kkt <= kKktTol;
  row.detail = "200 instances, max |dU|inf " + sci(worst_du) + " (tol " + sci(kQpAgreementTol) + "), max KKT " +
               sci(worst_kkt) + " (tol " + sci(kKktTol) + "), solver failures " + std::to_string(failures);
  finish(row, start, kLimit6);
  return row;
}

CheckRow criterion_wave_scenario() {
  const auto start = Clock::now();
  CheckRow row{7, "wave MPC scenario", true, ""};
  ScenarioConfig open = preset("wave-paper");
  open.mode = RunMode::Uncontrolled;
  const ScenarioResult uncontrolled = simulate_scenario(open);
  const bool exceeds = uncontrolled.stats.max_y > *open.y_max;

  const ScenarioConfig cfg = preset("wave-paper");
  const ScenarioResult mpc = simulate_scenario(cfg);
  const int completed = static_cast<int>(mpc.run.steps.size()) - 1;
  double tail = 0.0;
  const int tail_start = cfg.steps - cfg.steps / 5;
  for (const auto& s : mpc.run.steps) {
    if (s.k > tail_start) tail = std::max(tail, std::abs(s.u));
  }
  const bool a = mpc.stats.input_violations == 0;
  const bool b = mpc.stats.output_violations == 0 && exceeds;
  const bool c = !mpc.aborted && tail <= kDecayTol;
  row.pass = !mpc.aborted && a && b && c;
  std::ostringstream d;
  d << "uncontrolled max y " << sci(uncontrolled.stats.max_y) << (exceeds ? " > " : " <= ") << sci(*open.y_max)
    << "; MPC " << (mpc.aborted ? "ABORTED after " + std::to_string(completed) + " steps (" + mpc.abort_reason + ")"
                                : "completed")
    << "; (a) input violations " << mpc.stats.input_violations << "; (b) output violations "
    << mpc.stats.output_violations << "; (c) tail max|u| "
    << (completed > tail_start ? sci(tail) : std::string("not reached")) << " (tol " << sci(kDecayTol) << ")";
  row.detail = d.str();
  finish(row, start, kLimit7);
  return row;
}

CheckRow criterion_reactor_scenario() {
  const auto start = Clock::now();
  CheckRow row{8, "reactor dual-mode scenario", true, ""};
  ScenarioConfig open = preset("reactor-paper");
  open.mode = RunMode::Uncontrolled;
  const ScenarioResult uncontrolled = simulate_scenario(open);
  const double t_end = open.steps * open.h;
  const double growth = uncontrolled.stats.final_state_norm / uncontrolled.stats.initial_state_norm;
  const double needed = std::exp(kReactorGrowthRate * t_end);

  const ScenarioConfig cfg = preset("reactor-paper");
  const ScenarioResult dual = simulate_scenario(cfg);
  const double ratio = dual.stats.final_state_norm / dual.stats.initial_state_norm;

  ScenarioConfig fb = preset("reactor-paper");
  fb.mode = RunMode::FeedbackOnly;
  const ScenarioResult feedback = simulate_scenario(fb);
  double min_u = 0.0;
  for (const auto& s : feedback.run.steps) min_u = std::min(min_u, s.u);

  const bool a = growth >= needed;
  const bool b = !dual.aborted && ratio <= kReactorDecayRatio && dual.stats.input_violations_mpc == 0;
  const bool c = min_u < fb.u_min;
  row.pass = a && b && c;
  row.detail = "(a) growth " + sci(growth) + " vs required " + sci(needed) + "; (b) final/initial " + sci(ratio) +
               " (tol " + sci(kReactorDecayRatio) + "), MPC input violations " +
               std::to_string(dual.stats.input_violations_mpc) + (dual.aborted ? ", ABORTED" : "") +
               "; (c) feedback-only min u " + sci(min_u) + " vs u_min " + sci(fb.u_min);
  finish(row, start, kLimit8);
  return row;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

CheckRow criterion_determinism() {
  const auto start = Clock::now();
  CheckRow row{9, "byte-identical CSVs across repeated runs", true, ""};
  const auto root = std::filesystem::temp_directory_path() /
                    ("pdempc-determinism-" + std::to_string(std::random_device{}()));
  std::vector<std::string> notes;
  for (const auto& name : preset_names()) {
    const ScenarioConfig cfg = preset(name);
    const ScenarioResult first = run_scenario(cfg, root / name / "a");
    run_scenario(cfg, root / name / "b");
    bool same = true;
    for (const char* file : {"timeseries.csv", "profile.csv"}) {
      const std::string a = read_file(root / name / "a" / file);
      const std::string b = read_file(root / name / "b" / file);
      same = same && !a.empty() && a == b;
    }
    row.pass = row.pass && same;
    notes.push_back(name + (same ? " identical" : " DIFFERENT") +
                    (first.aborted ? " (run aborted at step " + std::to_string(*first.abort_step) + ")" : ""));
  }
  std::filesystem::remove_all(root);
  for (std::size_t i = 0; i < notes.size(); ++i) row.detail += (i ? "; " : "") + notes[i];
  row.seconds = elapsed(start);
  return row;
}

std::vector<CheckRow> run_acceptance() {
  const std::vector<std::pair<int, std::function<CheckRow()>>> checks = {
      {1, criterion_operator_identities}, {2, criterion_feedthrough},      {3, criterion_lyapunov},
      {4, criterion_reactor_resolvent},   {5, criterion_output_feedback},  {6, criterion_qp_equivalence},
      {7, criterion_wave_scenario},       {8, criterion_reactor_scenario}, {9, criterion_determinism},
  };
  std::vector<CheckRow> rows;
  for (const auto& [id, check] : checks) {
    try {
      rows.push_back(check());
    } catch (const std::exception& e) {
      rows.push_back(CheckRow{id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what()});
    }
  }
  return rows;
}

void print_table(std::ostream& out, const std::vector<CheckRow>& rows) {
  for (const auto& r : rows) {
    out << (r.pass ? "PASS" : "FAIL") << "  [" << r.criterion << "] " << r.name << "  (" << std::fixed
        << std::setprecision(2) << r.seconds << " s)\n";
    out.unsetf(std::ios::floatfield);
    out << "        " << r.detail << "\n";
  }
  int passed = 0;
  for (const auto& r : rows) passed += r.pass ? 1 : 0;
  out << passed << "/" << rows.size() << " criteria passed\n";
}

bool all_passed(const std::vector<CheckRow>& rows) {
  for (const auto& r : rows) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace pdempc::verify
