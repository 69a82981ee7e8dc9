#include <doctest.h>

#include <random>

#include "pdempc/errors.hpp"
#include "pdempc/qp.hpp"

using namespace pdempc;

namespace {

struct Qp {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd Ac;
  Eigen::VectorXd bc;
};

Qp small_example() {
  Qp q;
  q.H = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  q.g = Eigen::Vector2d(-4.0, -4.0);
  q.Ac = Eigen::MatrixXd::Identity(2, 2);
  q.bc = Eigen::Vector2d(0.5, 2.0);
  return q;
}

}  // namespace

TEST_CASE("hildreth: small example with one active bound") {
  const Qp q = small_example();
  const QpSolution s = solve_qp_hildreth(q.H, q.g, q.Ac, q.bc);
  CHECK(s.U[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(s.U[1] == doctest::Approx(1.0).epsilon(1e-10));
  REQUIRE(s.active_set.size() == 1);
  CHECK(s.active_set[0] == 0);
  const KktResiduals r = kkt_residuals(q.H, q.g, q.Ac, q.bc, s);
  CHECK(r.stationarity <= 1e-9);
  CHECK(r.primal <= 1e-9);
  CHECK(r.dual <= 1e-9);
  CHECK(r.complementarity <= 1e-9);
}

TEST_CASE("oracle: agrees with Hildreth on the small example") {
  const Qp q = small_example();
  const QpSolution h = solve_qp_hildreth(q.H, q.g, q.Ac, q.bc);
  const QpSolution o = solve_qp_oracle(q.H, q.g, q.Ac, q.bc);
  CHECK((h.U - o.U).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK(h.objective == doctest::Approx(o.objective).epsilon(1e-12));
}

TEST_CASE("hildreth: feasible unconstrained minimizer returns in zero sweeps") {
  Qp q = small_example();
  q.bc = Eigen::Vector2d(5.0, 5.0);
  const QpSolution s = solve_qp_hildreth(q.H, q.g, q.Ac, q.bc);
  CHECK(s.iterations == 0);
  const Eigen::VectorXd direct = -q.H.ldlt().solve(q.g / 2.0);
  CHECK((s.U - direct).norm() <= 1e-14);
  CHECK(s.active_set.empty());
}

TEST_CASE("infeasible constraint pair") {
  const Eigen::MatrixXd H = 2.0 * Eigen::MatrixXd::Identity(1, 1);
  const Eigen::VectorXd g = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd Ac(2, 1);
  Ac << 1.0, -1.0;
  const Eigen::Vector2d bc(0.0, -1.0);  // U <= 0 and U >= 1
  CHECK_THROWS_AS(solve_qp_hildreth(H, g, Ac, bc), InfeasibleError);
  CHECK_THROWS_AS(solve_qp_oracle(H, g, Ac, bc), InfeasibleError);
  try {
    solve_qp_hildreth(H, g, Ac, bc);
  } catch (const InfeasibleError& e) {
    CHECK(e.max_violation() > 0.0);
  }
}

TEST_CASE("oracle: trivial and singleton cases") {
  {
    const Eigen::MatrixXd H = 2.0 * Eigen::MatrixXd::Identity(1, 1);
    const Eigen::VectorXd g = Eigen::VectorXd::Zero(1);
    Eigen::MatrixXd Ac(2, 1);
    Ac << 1.0, -1.0;
    const QpSolution s = solve_qp_oracle(H, g, Ac, Eigen::Vector2d(1.0, 1.0));
    CHECK(s.U[0] == 0.0);
  }
  {
    // U1 + U2 <= 1, -U1 - U2 <= -1, U1 <= 0.25, -U1 <= -0.25: the point (0.25, 0.75).
    const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::Vector2d g(3.0, -1.0);
    Eigen::MatrixXd Ac(4, 2);
    Ac << 1, 1, -1, -1, 1, 0, -1, 0;
    const Eigen::Vector4d bc(1.0, -1.0, 0.25, -0.25);
    const QpSolution o = solve_qp_oracle(H, g, Ac, bc);
    CHECK(o.U[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(o.U[1] == doctest::Approx(0.75).epsilon(1e-12));
    const QpSolution h = solve_qp_hildreth(H, g, Ac, bc);
    CHECK((h.U - o.U).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("oracle: size cap") {
  const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(13, 13);
  const Eigen::VectorXd g = Eigen::VectorXd::Zero(13);
  const Eigen::MatrixXd Ac = Eigen::MatrixXd::Identity(13, 13);
  CHECK_THROWS_AS(solve_qp_oracle(H, g, Ac, Eigen::VectorXd::Ones(13)), InvalidArgument);
  const Eigen::MatrixXd H2 = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd Ac2 = Eigen::MatrixXd::Ones(25, 2);
  CHECK_THROWS_AS(solve_qp_oracle(H2, Eigen::VectorXd::Zero(2), Ac2, Eigen::VectorXd::Ones(25)), InvalidArgument);
}

TEST_CASE("shape and settings errors") {
  const Qp q = small_example();
  CHECK_THROWS_AS(solve_qp_hildreth(q.H, Eigen::VectorXd::Zero(3), q.Ac, q.bc), InvalidArgument);
  CHECK_THROWS_AS(solve_qp_hildreth(q.H, q.g, q.Ac, Eigen::VectorXd::Zero(3)), InvalidArgument);
  HildrethSettings bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(solve_qp_hildreth(q.H, q.g, q.Ac, q.bc, bad), InvalidArgument);
}

TEST_CASE("hildreth: random instances agree with the oracle, KKT holds, dual ascent is monotone") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    const int n = 1 + t % 6;
    const int rows = 2 * n;
    Eigen::MatrixXd L(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L(i, j) = unit(rng);
    const Eigen::MatrixXd H = L * L.transpose() + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = 5.0 * unit(rng);
    Eigen::MatrixXd Ac(rows, n);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < n; ++j) Ac(i, j) = unit(rng);
    Eigen::VectorXd bc(rows);
    for (int i = 0; i < rows; ++i) bc[i] = 0.1 + 0.5 * (unit(rng) + 1.0);  // U = 0 is feasible

    HildrethSettings s;
    s.record_dual_trace = true;
    const QpSolution h = solve_qp_hildreth(H, g, Ac, bc, s);
    const QpSolution o = solve_qp_oracle(H, g, Ac, bc);
    CHECK((h.U - o.U).lpNorm<Eigen::Infinity>() <= 1e-6);
    const KktResiduals r = kkt_residuals(H, g, Ac, bc, h);
    CHECK(r.stationarity <= 1e-9);
    CHECK(r.primal <= 1e-9);
    CHECK(r.complementarity <= 1e-9);
    for (std::size_t k = 1; k < h.dual_trace.size(); ++k) {
      CHECK(h.dual_trace[k] >= h.dual_trace[k - 1] - 1e-12 * std::max(1.0, std::abs(h.dual_trace[k])));
    }
    if (!h.dual_trace.empty()) {
      // Weak duality: the dual value never exceeds the primal optimum.
      CHECK(h.dual_trace.back() <= o.objective + 1e-9 * std::max(1.0, std::abs(o.objective)));
    }
  }
}
