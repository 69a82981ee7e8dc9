#include "pdempc/mpc.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "pdempc/errors.hpp"

namespace pdempc {

void validate(const MpcSpec& spec) {
  if (spec.horizon < 1) throw InvalidArgument("mpc: horizon must be >= 1");
  if (!(spec.Q > 0.0) || !(spec.R > 0.0)) throw InvalidArgument("mpc: Q and R must be positive");
  if (!(spec.u_min < spec.u_max)) throw InvalidArgument("mpc: need u_min < u_max");
  if (spec.y_min && spec.y_max && !(*spec.y_min < *spec.y_max)) {
    throw InvalidArgument("mpc: need y_min < y_max");
  }
  if (!spec.terminal) throw InvalidArgument("mpc: terminal penalty operator missing");
}

namespace {

struct ConstantBlocks {
  Eigen::MatrixXd H;
  Eigen::MatrixXd S;
  RealField terminal_B;
};

ConstantBlocks assemble_constant(const DiscreteSystem& sys, const HorizonCache& cache, const MpcSpec& spec) {
  const int N = spec.horizon;
  if (cache.horizon != N || static_cast<int>(cache.input_powers.size()) != N) {
    throw InvalidArgument("build_qp: horizon cache was built for a different horizon");
  }
  ConstantBlocks out;
  out.terminal_B = spec.terminal(sys.Bd);

  // markov[m] = Cd Ad^m Bd, terminal[m] = <Bd, Qbar Ad^m Bd>.
  Eigen::VectorXd markov(N);
  Eigen::VectorXd terminal(N);
  for (int m = 0; m < N; ++m) {
    markov[m] = sys.Cd(cache.input_powers[m]);
    terminal[m] = inner_product(out.terminal_B, cache.input_powers[m]);
  }

  out.H.resize(N, N);
  out.S = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    out.H(i, i) = sys.Dd * spec.Q * sys.Dd + terminal[0] + spec.R;
    out.S(i, i) = sys.Dd;
    for (int j = 0; j < i; ++j) {
      out.H(i, j) = sys.Dd * spec.Q * markov[i - j - 1] + terminal[i - j];
      out.H(j, i) = out.H(i, j);
      out.S(i, j) = markov[i - j - 1];
    }
  }
  return out;
}

QpInstance assemble_state(const DiscreteSystem& sys, const HorizonCache& cache, const MpcSpec& spec,
                          const ConstantBlocks& blocks, const RealField& x_k) {
  if (x_k.grid_ptr() != sys.grid || x_k.components() != sys.components) {
    throw InvalidArgument("build_qp: state does not live on the system grid");
  }
  const int N = spec.horizon;
  QpInstance qp;
  qp.H = blocks.H;
  qp.S = blocks.S;
  qp.Tx.resize(N);
  qp.g.resize(N);

  RealField power = x_k;  // Ad^i x_k
  for (int i = 0; i < N; ++i) {
    qp.Tx[i] = inner_product(cache.output_powers[i], x_k);
    power = sys.Ad(power);
    qp.g[i] = 2.0 * (sys.Dd * spec.Q * qp.Tx[i] + inner_product(blocks.terminal_B, power));
  }
  qp.constant = inner_product(x_k, spec.terminal(x_k));

  const int out_rows = (spec.y_max ? N : 0) + (spec.y_min ? N : 0);
  qp.Ac.resize(2 * N + out_rows, N);
  qp.bc.resize(2 * N + out_rows);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
  qp.Ac.topRows(N) = I;
  qp.bc.head(N).setConstant(spec.u_max);
  qp.Ac.middleRows(N, N) = -I;
  qp.bc.segment(N, N).setConstant(-spec.u_min);
  int row = 2 * N;
  if (spec.y_max) {
    qp.Ac.middleRows(row, N) = qp.S;
    qp.bc.segment(row, N) = Eigen::VectorXd::Constant(N, *spec.y_max) - qp.Tx;
    row += N;
  }
  if (spec.y_min) {
    qp.Ac.middleRows(row, N) = -qp.S;
    qp.bc.segment(row, N) = qp.Tx - Eigen::VectorXd::Constant(N, *spec.y_min);
  }
  return qp;
}

MpcStepResult solve_instance(const QpInstance& qp, const HildrethSettings& settings) {
  const QpSolution sol = solve_qp_hildreth(qp.H, qp.g, qp.Ac, qp.bc, settings);
  MpcStepResult out;
  out.U = sol.U;
  out.u_next = sol.U[0];
  out.predicted_outputs = qp.S * sol.U + qp.Tx;
  out.diagnostics.iterations = sol.iterations;
  out.diagnostics.active_set = sol.active_set;
  out.diagnostics.qp_objective = sol.objective;
  out.diagnostics.objective = sol.objective + qp.constant;
  out.diagnostics.max_violation = sol.max_violation;
  return out;
}

double cost_to_go(const TerminalOperator& terminal, const RealField& x) {
  return terminal ? inner_product(x, terminal(x)) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

QpInstance build_qp(const DiscreteSystem& sys, const HorizonCache& cache, const MpcSpec& spec,
                    const RealField& x_k) {
  validate(spec);
  return assemble_state(sys, cache, spec, assemble_constant(sys, cache, spec), x_k);
}

MpcStepResult mpc_step(const DiscreteSystem& sys, const HorizonCache& cache, const MpcSpec& spec,
                       const RealField& x_k, const HildrethSettings& settings) {
  return solve_instance(build_qp(sys, cache, spec, x_k), settings);
}

MpcController::MpcController(DiscreteSystem sys, MpcSpec spec, HildrethSettings settings)
    : sys_(std::move(sys)), spec_(std::move(spec)), settings_(settings) {
  validate(sys_);
  validate(spec_);
  cache_ = build_horizon_cache(sys_, spec_.horizon);
  ConstantBlocks blocks = assemble_constant(sys_, cache_, spec_);
  H_ = std::move(blocks.H);
  S_ = std::move(blocks.S);
  terminal_B_ = std::move(blocks.terminal_B);
}

QpInstance MpcController::build(const RealField& x_k) const {
  return assemble_state(sys_, cache_, spec_, ConstantBlocks{H_, S_, terminal_B_}, x_k);
}

MpcStepResult MpcController::step(const RealField& x_k) const { return solve_instance(build(x_k), settings_); }

std::string to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::Initial: return "initial";
    case ControlMode::Mpc: return "mpc";
    case ControlMode::Feedback: return "feedback";
    case ControlMode::Open: return "open";
  }
  return "unknown";
}

double output_feedback_input(const DiscreteSystem& sys, double Ky, const RealField& x) {
  const double loop = 1.0 - Ky * sys.Dd;
  if (std::abs(loop) < 1e-14) throw InvalidArgument("output feedback: algebraic loop 1 - Ky Dd vanishes");
  return Ky * sys.Cd(x) / loop;
}

namespace {

ClosedLoopRun start_run(const RealField& x0) {
  ClosedLoopRun run;
  ClosedLoopStep first;
  first.x = x0;
  run.steps.push_back(std::move(first));
  return run;
}

void advance(ClosedLoopRun& run, const DiscreteSystem& sys, double u, ControlMode mode, double objective,
             int iterations) {
  const RealField& x = run.steps.back().x;
  auto [next, y] = step(sys, x, u);
  ClosedLoopStep s;
  s.k = static_cast<int>(run.steps.size());
  s.u = u;
  s.y = y;
  s.mode = mode;
  s.objective = objective;
  s.iterations = iterations;
  s.x = std::move(next);
  run.steps.push_back(std::move(s));
}

// Empty result when the run has to stop.
std::optional<MpcStepResult> mpc_or_stop(const MpcController& mpc, const RealField& x, int k, OnInfeasible policy,
                                         ClosedLoopRun& run) {
  try {
    return mpc.step(x);
  } catch (const InfeasibleError& e) {
    const std::string what = "infeasible QP at step " + std::to_string(k) + ": " + e.what();
    if (policy == OnInfeasible::Throw) throw InfeasibleError(what, e.max_violation());
    run.infeasible_step = k;
    run.failure = what;
    run.failure_violation = e.max_violation();
    return std::nullopt;
  }
}

}  // namespace

ClosedLoopRun run_mpc(const MpcController& mpc, const RealField& x0, int steps, OnInfeasible policy) {
  ClosedLoopRun run = start_run(x0);
  for (int k = 0; k < steps; ++k) {
    const auto r = mpc_or_stop(mpc, run.steps.back().x, k, policy, run);
    if (!r) break;
    advance(run, mpc.system(), r->u_next, ControlMode::Mpc, r->diagnostics.objective, r->diagnostics.iterations);
  }
  return run;
}

ClosedLoopRun dual_mode_run(const MpcController& mpc, double Ky, const SwitchRule& rule, const RealField& x0,
                            int steps, OnInfeasible policy) {
  if (rule.value < 0 || (rule.kind == SwitchRule::Kind::FeasibilityWindow && rule.value < 1)) {
    throw InvalidArgument("dual_mode_run: invalid switch rule");
  }
  const DiscreteSystem& sys = mpc.system();
  const MpcSpec& spec = mpc.spec();
  ClosedLoopRun run = start_run(x0);
  int feasible_streak = 0;
  int bound_warnings = 0;
  for (int k = 0; k < steps; ++k) {
    const RealField& x = run.steps.back().x;
    const double u_fb = output_feedback_input(sys, Ky, x);
    if (!run.switch_step) {
      if (rule.kind == SwitchRule::Kind::FixedStep) {
        if (k >= rule.value) run.switch_step = k;
      } else {
        const bool inside = u_fb >= spec.u_min && u_fb <= spec.u_max;
        feasible_streak = inside ? feasible_streak + 1 : 0;
        if (feasible_streak >= rule.value) run.switch_step = k;
      }
    }
    if (run.switch_step) {
      if ((u_fb < spec.u_min - 1e-9 || u_fb > spec.u_max + 1e-9) && bound_warnings++ == 0) {
        run.warnings.push_back("feedback input violates the input bounds at step " + std::to_string(k));
      }
      advance(run, sys, u_fb, ControlMode::Feedback, cost_to_go(spec.terminal, x), 0);
    } else {
      const auto r = mpc_or_stop(mpc, x, k, policy, run);
      if (!r) break;
      advance(run, sys, r->u_next, ControlMode::Mpc, r->diagnostics.objective, r->diagnostics.iterations);
    }
  }
  if (!run.switch_step && !run.infeasible_step) run.warnings.push_back("switch rule did not fire; run completed in MPC mode");
  return run;
}

ClosedLoopRun run_feedback(const DiscreteSystem& sys, double Ky, const RealField& x0, int steps,
                           const TerminalOperator& terminal) {
  ClosedLoopRun run = start_run(x0);
  run.switch_step = 0;
  for (int k = 0; k < steps; ++k) {
    const RealField& x = run.steps.back().x;
    advance(run, sys, output_feedback_input(sys, Ky, x), ControlMode::Feedback, cost_to_go(terminal, x), 0);
  }
  return run;
}

ClosedLoopRun run_open_loop(const DiscreteSystem& sys, const RealField& x0, int steps,
                            const TerminalOperator& terminal) {
  ClosedLoopRun run = start_run(x0);
  for (int k = 0; k < steps; ++k) {
    advance(run, sys, 0.0, ControlMode::Open, cost_to_go(terminal, run.steps.back().x), 0);
  }
  return run;
}

}  // namespace pdempc
