#pragma once

#include <functional>
#include <vector>

#include "pdempc/grid.hpp"

namespace pdempc {

/// Discrete-time system obtained from the Cayley-Tustin map
///   x(k) = Ad x(k-1) + Bd u(k),   y(k) = Cd x(k-1) + Dd u(k)
/// for a scalar input and a scalar output. The state operator is applied
/// matrix-free; the output functional is stored as a co-vector so that
/// Cd x = <x, output_covector>.
struct DiscreteSystem {
  using StateMap = std::function<RealField(const RealField&)>;

  GridPtr grid;
  Eigen::Index components = 1;
  StateMap apply_Ad;
  RealField Bd;
  RealField output_covector;
  double Dd = 0.0;
  double delta = 0.0;  // resolvent point, 2 / h
  double h = 0.0;      // sampling period

  RealField Ad(const RealField& x) const { return apply_Ad(x); }
  double Cd(const RealField& x) const { return inner_product(x, output_covector); }

  /// Zero state with this system's layout.
  RealField zero_state() const { return {grid, components}; }
};

/// Checks layout and the delta * h = 2 relation.
void validate(const DiscreteSystem& sys);

struct StepResult {
  RealField x;
  double y;
};

StepResult step(const DiscreteSystem& sys, const RealField& x_prev, double u);

struct TrajectoryPoint {
  RealField x;  // state after the step
  double y;     // output produced during the step
  double u;     // input applied during the step
};

std::vector<TrajectoryPoint> simulate(const DiscreteSystem& sys, const RealField& x0,
                                      const std::vector<double>& inputs);

/// Powers of the state operator needed by the MPC block matrices.
///   input_powers[j]   = Ad^j Bd
///   output_powers[j]  co-vector with <output_powers[j], x> = Cd Ad^j x
/// for j = 0 .. horizon - 1.
struct HorizonCache {
  int horizon = 0;
  std::vector<RealField> input_powers;
  std::vector<RealField> output_powers;
};

HorizonCache build_horizon_cache(const DiscreteSystem& sys, int horizon);

/// Dense matrix of the state operator acting on the stacked node values.
Eigen::MatrixXd materialize_state_operator(const DiscreteSystem& sys);

/// Closes the loop with the static output feedback u = Ky y + v, where v is
/// the new external input.
DiscreteSystem closed_loop_discrete(const DiscreteSystem& sys, double Ky);

}  // namespace pdempc
