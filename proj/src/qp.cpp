#include "pdempc/qp.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "pdempc/errors.hpp"

namespace pdempc {

namespace {

void check_shapes(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ac,
                  const Eigen::VectorXd& bc) {
  const Eigen::Index n = H.rows();
  if (H.cols() != n || g.size() != n) throw InvalidArgument("qp: H must be square and match g");
  if (Ac.rows() != bc.size() || (Ac.rows() > 0 && Ac.cols() != n)) {
    throw InvalidArgument("qp: constraint matrix does not match the variable or row count");
  }
}

double objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& U) {
  return U.dot(H * U) + g.dot(U);
}

double violation(const Eigen::MatrixXd& Ac, const Eigen::VectorXd& bc, const Eigen::VectorXd& U) {
  if (Ac.rows() == 0) return 0.0;
  return std::max(0.0, (Ac * U - bc).maxCoeff());
}

std::vector<int> positive_indices(const Eigen::VectorXd& lambda) {
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] > 0.0) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

// Shared data of the dual problem: with E = 2H the primal solution is
// U = U_free - E^{-1} Ac^T lambda.
struct DualData {
  Eigen::LLT<Eigen::MatrixXd> chol;
  Eigen::VectorXd U_free;
  Eigen::MatrixXd HinvAt;  // E^{-1} Ac^T
  Eigen::MatrixXd P;       // Ac E^{-1} Ac^T
  Eigen::VectorXd K;       // bc - Ac U_free

  DualData(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ac,
           const Eigen::VectorXd& bc)
      : chol(2.0 * H) {
    if (chol.info() != Eigen::Success) throw InvalidArgument("qp: H is not positive definite");
    U_free = -chol.solve(g);
    HinvAt = chol.solve(Ac.transpose());
    P = Ac * HinvAt;
    K = bc - Ac * U_free;
  }

  Eigen::VectorXd primal(const Eigen::VectorXd& lambda) const { return U_free - HinvAt * lambda; }

  // Solves the KKT system with rows `active` held at equality.
  bool equality_solve(const std::vector<int>& active, Eigen::VectorXd& lambda) const {
    const auto k = static_cast<Eigen::Index>(active.size());
    lambda = Eigen::VectorXd::Zero(P.rows());
    if (k == 0) return true;
    Eigen::MatrixXd Pa(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      rhs[i] = -K[active[i]];
      for (Eigen::Index j = 0; j < k; ++j) Pa(i, j) = P(active[i], active[j]);
    }
    // Active rows must be linearly independent.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Pa);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const double scale = std::max(1.0, Pa.diagonal().cwiseAbs().maxCoeff());
    if (ldlt.vectorD().minCoeff() <= 1e-13 * scale) return false;
    // Ac_a U = bc_a  <=>  P_aa lambda_a = -K_a.
    const Eigen::VectorXd la = ldlt.solve(rhs);
    for (Eigen::Index i = 0; i < k; ++i) lambda[active[i]] = la[i];
    return true;
  }
};

}  // namespace

QpSolution solve_qp_hildreth(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ac,
                             const Eigen::VectorXd& bc, const HildrethSettings& settings) {
  check_shapes(H, g, Ac, bc);
  if (!(settings.tol > 0.0)) throw InvalidArgument("qp: tolerance must be positive");
  const DualData d(H, g, Ac, bc);
  const Eigen::Index rows = Ac.rows();

  QpSolution sol;
  sol.multipliers = Eigen::VectorXd::Zero(rows);
  if (violation(Ac, bc, d.U_free) <= settings.tol) {
    sol.U = d.U_free;
    sol.objective = objective(H, g, sol.U);
    return sol;
  }

  const int max_iter = settings.max_iter > 0 ? settings.max_iter : static_cast<int>(50 * rows);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd Plambda = Eigen::VectorXd::Zero(rows);
  bool converged = false;
  int sweep = 0;
  for (; sweep < max_iter && !converged; ++sweep) {
    double change = 0.0;
    double size = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double pii = d.P(i, i);
      if (pii <= 0.0) continue;  // zero row: feasibility decided by bc alone
      const double off = Plambda[i] - pii * lambda[i];
      const double updated = std::max(0.0, -(off + d.K[i]) / pii);
      const double delta = updated - lambda[i];
      if (delta != 0.0) {
        Plambda += delta * d.P.col(i);
        lambda[i] = updated;
      }
      change = std::max(change, std::abs(delta));
      size = std::max(size, std::abs(updated));
    }
    if (settings.record_dual_trace) {
      // q(lambda) = f(U_free) - 1/2 lambda^T P lambda - lambda^T K
      sol.dual_trace.push_back(objective(H, g, d.U_free) - 0.5 * lambda.dot(Plambda) - lambda.dot(d.K));
    }
    converged = change <= settings.tol * std::max(1.0, size);
    if (!std::isfinite(size) || size > 1e14) break;
  }
  sol.iterations = sweep;

  Eigen::VectorXd U = d.primal(lambda);
  double viol = violation(Ac, bc, U);

  // Polish on the detected active set; keep it only if it is a KKT point.
  // At the sweep cap this is also the acceptance test: an unsettled dual
  // iterate is kept only when its active set is certified optimal.
  bool certified = false;
  const std::vector<int> active = positive_indices(lambda);
  Eigen::VectorXd lambda_exact;
  if (d.equality_solve(active, lambda_exact)) {
    const Eigen::VectorXd U_exact = d.primal(lambda_exact);
    const double viol_exact = violation(Ac, bc, U_exact);
    if (lambda_exact.minCoeff() >= -settings.tol && viol_exact <= std::max(viol, settings.tol)) {
      lambda = lambda_exact.cwiseMax(0.0);
      U = U_exact;
      viol = viol_exact;
      certified = viol_exact <= settings.tol;
    }
  }
  if (!converged && !certified) {
    throw InfeasibleError("qp: dual iteration did not settle after " + std::to_string(sweep) +
                              " sweeps (max violation " + std::to_string(viol) + ")",
                          viol);
  }
  if (viol > std::max(settings.tol, 1e-6)) {
    throw InfeasibleError("qp: converged dual point leaves violation " + std::to_string(viol), viol);
  }

  sol.U = U;
  sol.multipliers = lambda;
  sol.max_violation = viol;
  sol.objective = objective(H, g, U);
  sol.active_set = positive_indices(lambda);
  return sol;
}

QpSolution solve_qp_oracle(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ac,
                           const Eigen::VectorXd& bc) {
  check_shapes(H, g, Ac, bc);
  const Eigen::Index n = H.rows();
  const Eigen::Index rows = Ac.rows();
  if (n > 12 || rows > 24) throw InvalidArgument("qp oracle: limited to 12 variables and 24 rows");

  // Each candidate active set is solved through the full primal KKT system
  //   [2H  Aa^T] [U     ]   [-g  ]
  //   [Aa  0   ] [lambda] = [ b_a]
  // independently of the dual machinery used by the Hildreth solver.
  const double feas_tol = 1e-10;
  bool found = false;
  QpSolution best;
  int best_size = 0;
  const std::uint32_t count = std::uint32_t{1} << rows;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    const int size = std::popcount(mask);
    if (size > n) continue;
    std::vector<int> active;
    for (int i = 0; i < rows; ++i) {
      if (mask & (std::uint32_t{1} << i)) active.push_back(i);
    }
    const Eigen::Index m = n + size;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs(m);
    K.topLeftCorner(n, n) = 2.0 * H;
    rhs.head(n) = -g;
    for (int a = 0; a < size; ++a) {
      K.block(n + a, 0, 1, n) = Ac.row(active[a]);
      K.block(0, n + a, n, 1) = Ac.row(active[a]).transpose();
      rhs[n + a] = bc[active[a]];
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < m) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(rows);
    for (int a = 0; a < size; ++a) lambda[active[a]] = sol[n + a];
    if (size > 0 && lambda.minCoeff() < -feas_tol) continue;
    const Eigen::VectorXd U = sol.head(n);
    const double viol = violation(Ac, bc, U);
    if (viol > feas_tol * std::max(1.0, bc.cwiseAbs().maxCoeff())) continue;
    const double obj = objective(H, g, U);
    const bool better = !found || obj < best.objective - 1e-12 ||
                        (std::abs(obj - best.objective) <= 1e-12 && size < best_size);
    if (better) {
      found = true;
      best_size = size;
      best.U = U;
      best.multipliers = lambda.cwiseMax(0.0);
      best.max_violation = viol;
      best.objective = obj;
      best.active_set = active;
    }
  }
  if (!found) throw InfeasibleError("qp oracle: no feasible KKT point", std::numeric_limits<double>::infinity());
  return best;
}

KktResiduals kkt_residuals(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& Ac,
                           const Eigen::VectorXd& bc, const QpSolution& sol) {
  KktResiduals r;
  Eigen::VectorXd grad = 2.0 * H * sol.U + g;
  if (Ac.rows() > 0) grad += Ac.transpose() * sol.multipliers;
  r.stationarity = grad.cwiseAbs().maxCoeff();
  if (Ac.rows() > 0) {
    const Eigen::VectorXd slack = Ac * sol.U - bc;
    r.primal = std::max(0.0, slack.maxCoeff());
    r.dual = std::max(0.0, -sol.multipliers.minCoeff());
    r.complementarity = sol.multipliers.cwiseProduct(slack).cwiseAbs().maxCoeff();
  }
  return r;
}

}  // namespace pdempc
