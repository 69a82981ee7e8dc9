#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdempc/qp.hpp"
#include "pdempc/sysops.hpp"

namespace pdempc {

using TerminalOperator = std::function<RealField(const RealField&)>;

/// Finite-horizon problem data. `terminal` applies the terminal penalty
/// operator (a Lyapunov solution, or the sum of the input and output
/// penalties when a stabilizing feedback runs after the horizon).
struct MpcSpec {
  int horizon = 1;
  double Q = 1.0;
  double R = 1.0;
  double u_min = -1.0;
  double u_max = 1.0;
  std::optional<double> y_min;
  std::optional<double> y_max;
  TerminalOperator terminal;

  bool has_output_bounds() const { return y_min.has_value() || y_max.has_value(); }
};

void validate(const MpcSpec& spec);

/// One step's QP: min U^T H U + g^T U  s.t.  Ac U <= bc, with g = 2 P x_k.
struct QpInstance {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd Ac;
  Eigen::VectorXd bc;
  Eigen::MatrixXd S;      // predicted outputs = S U + Tx
  Eigen::VectorXd Tx;
  double constant = 0.0;  // <x_k, Qbar x_k>, left out of the QP
};

QpInstance build_qp(const DiscreteSystem& sys, const HorizonCache& cache, const MpcSpec& spec,
                    const RealField& x_k);

struct MpcDiagnostics {
  int iterations = 0;
  std::vector<int> active_set;
  double qp_objective = 0.0;  // U^T H U + g^T U
  double objective = 0.0;     // qp_objective + <x_k, Qbar x_k>
  double max_violation = 0.0;
};

struct MpcStepResult {
  double u_next = 0.0;
  Eigen::VectorXd U;
  Eigen::VectorXd predicted_outputs;
  MpcDiagnostics diagnostics;
};

/// Receding-horizon controller with the state-independent blocks (H, S and
/// the terminal image of Bd) assembled once.
class MpcController {
 public:
  MpcController(DiscreteSystem sys, MpcSpec spec, HildrethSettings settings = {});

  const DiscreteSystem& system() const { return sys_; }
  const MpcSpec& spec() const { return spec_; }
  const HorizonCache& cache() const { return cache_; }

  QpInstance build(const RealField& x_k) const;

  /// Solves the QP at x_k; throws InfeasibleError when it has no solution.
  MpcStepResult step(const RealField& x_k) const;

 private:
  DiscreteSystem sys_;
  MpcSpec spec_;
  HildrethSettings settings_;
  HorizonCache cache_;
  Eigen::MatrixXd H_;
  Eigen::MatrixXd S_;
  RealField terminal_B_;
};

MpcStepResult mpc_step(const DiscreteSystem& sys, const HorizonCache& cache, const MpcSpec& spec,
                       const RealField& x_k, const HildrethSettings& settings = {});

enum class ControlMode { Initial, Mpc, Feedback, Open };

std::string to_string(ControlMode mode);

/// Row k holds the state x_k together with the input u_k and output y_k of
/// the transition x_{k-1} -> x_k. `objective` is the cost-to-go evaluated at
/// x_{k-1} when u_k was chosen (the optimal MPC cost, or <x, Qbar x> under
/// feedback / no input when a terminal operator is known, NaN otherwise).
struct ClosedLoopStep {
  int k = 0;
  double u = 0.0;
  double y = 0.0;
  ControlMode mode = ControlMode::Initial;
  double objective = 0.0;
  int iterations = 0;
  RealField x;
};

struct ClosedLoopRun {
  std::vector<ClosedLoopStep> steps;
  std::optional<int> switch_step;
  std::vector<std::string> warnings;
  std::optional<int> infeasible_step;  // set when the run stopped on an infeasible QP
  std::string failure;
  double failure_violation = 0.0;
};

enum class OnInfeasible { Throw, Stop };

struct SwitchRule {
  enum class Kind { FixedStep, FeasibilityWindow };
  Kind kind = Kind::FixedStep;
  int value = 0;  // switch step, or window length

  static SwitchRule fixed(int k) { return {Kind::FixedStep, k}; }
  static SwitchRule feasibility(int window) { return {Kind::FeasibilityWindow, window}; }
};

/// MPC at every step. An infeasible QP throws InfeasibleError carrying the
/// step index, or with OnInfeasible::Stop ends the run and records it.
ClosedLoopRun run_mpc(const MpcController& mpc, const RealField& x0, int steps,
                      OnInfeasible policy = OnInfeasible::Throw);

/// MPC until the switch rule fires, then u = Ky y. The controller must be
/// built on the plant to be stabilized with the tail penalty of the feedback.
ClosedLoopRun dual_mode_run(const MpcController& mpc, double Ky, const SwitchRule& rule, const RealField& x0,
                            int steps, OnInfeasible policy = OnInfeasible::Throw);

/// u = Ky y from the first step. `terminal` (optional) fills the objective.
ClosedLoopRun run_feedback(const DiscreteSystem& sys, double Ky, const RealField& x0, int steps,
                           const TerminalOperator& terminal = {});

/// u = 0 throughout.
ClosedLoopRun run_open_loop(const DiscreteSystem& sys, const RealField& x0, int steps,
                            const TerminalOperator& terminal = {});

/// Input that realizes u = Ky y at state x, resolving the feedthrough loop.
double output_feedback_input(const DiscreteSystem& sys, double Ky, const RealField& x);

}  // namespace pdempc
