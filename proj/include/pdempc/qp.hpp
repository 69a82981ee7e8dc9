#pragma once

#include <Eigen/Dense>

#include <vector>

namespace pdempc {

/// Solution of
///   min  U^T H U + g^T U   subject to  Ac U <= bc.
/// Multipliers follow the Lagrangian U^T H U + g^T U + lambda^T (Ac U - bc),
/// so stationarity reads U = -H^{-1} (g / 2 + Ac^T lambda / 2).
struct QpSolution {
  Eigen::VectorXd U;
  Eigen::VectorXd multipliers;
  int iterations = 0;  // dual sweeps; 0 when the unconstrained minimizer is feasible
  double max_violation = 0.0;
  double objective = 0.0;
  std::vector<int> active_set;
  std::vector<double> dual_trace;  // dual objective after each sweep (if requested)
};

struct HildrethSettings {
  double tol = 1e-9;
  int max_iter = 0;  // 0 selects 50 * rows
  bool record_dual_trace = false;
};

/// Hildreth dual coordinate ascent, followed by an exact equality-constrained
/// solve on the detected active set. Throws InfeasibleError when the dual
/// iteration neither settles within the iteration cap nor yields an active set
/// whose exact solve is a KKT point.
QpSolution solve_qp_hildreth(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ac,
                             const Eigen::VectorXd& bc, const HildrethSettings& settings = {});

/// Exhaustive active-set enumeration. Exact, and exponential in the number of
/// rows: limited to at most 12 variables and 24 rows.
QpSolution solve_qp_oracle(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ac,
                           const Eigen::VectorXd& bc);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;  // most negative multiplier, as a positive number
  double complementarity = 0.0;
};

KktResiduals kkt_residuals(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ac,
                           const Eigen::VectorXd& bc, const QpSolution& sol);

}  // namespace pdempc
