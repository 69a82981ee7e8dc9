#include "pdempc/grid.hpp"

#include <algorithm>
#include <cmath>

namespace pdempc {

namespace {

// Gauss-Legendre rule on [-1, 1] via the Golub-Welsch eigenproblem.
void gauss_legendre(int points, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  x = eig.eigenvalues();
  w = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
}

}  // namespace

GridPtr make_grid(Eigen::Index n) {
  if (n < 3 || n % 2 == 0) {
    throw InvalidArgument("make_grid: node count must be odd and >= 3, got " + std::to_string(n));
  }
  auto grid = std::make_shared<Grid>();
  grid->nodes = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  grid->nodes[n - 1] = 1.0;
  const double h = 1.0 / static_cast<double>(n - 1);
  grid->weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    grid->weights[i] = c * h / 3.0;
  }
  return grid;
}

ExponentialRunningIntegral::ExponentialRunningIntegral(const Grid& grid, double rate)
    : stencil_(std::min<Eigen::Index>(4, grid.size())) {
  const double h = grid.spacing();
  step_decay_ = std::exp(-rate * h);

  Eigen::VectorXd gx, gw;
  gauss_legendre(12, gx, gw);
  const Eigen::VectorXd t = 0.5 * h * (gx.array() + 1.0);  // points in [0, h]
  const Eigen::VectorXd wt = 0.5 * h * gw;
  const Eigen::VectorXd kernel = (-rate * (h - t.array())).exp();

  for (Eigen::Index offset = 0; offset + 1 < stencil_; ++offset) {
    // Stencil node j sits at (j - offset) * h relative to the cell's left node.
    Eigen::VectorXd w(stencil_);
    for (Eigen::Index j = 0; j < stencil_; ++j) {
      const double tj = static_cast<double>(j - offset) * h;
      Eigen::ArrayXd basis = Eigen::ArrayXd::Ones(t.size());
      for (Eigen::Index m = 0; m < stencil_; ++m) {
        if (m == j) continue;
        const double tm = static_cast<double>(m - offset) * h;
        basis *= (t.array() - tm) / (tj - tm);
      }
      w[j] = (wt.array() * kernel.array() * basis).sum();
    }
    cell_weights_.push_back(std::move(w));
  }
}

}  // namespace pdempc
