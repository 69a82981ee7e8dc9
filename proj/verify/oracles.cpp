#include "verify/oracles.hpp"

#include <cmath>
#include <numbers>

#include "pdempc/errors.hpp"

namespace pdempc::verify {

Eigen::VectorXd fd_weights(const Eigen::VectorXd& offsets, int derivative) {
  const Eigen::Index m = offsets.size();
  if (derivative < 0 || derivative >= m) throw InvalidArgument("fd_weights: derivative order too high");
  Eigen::MatrixXd V(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) V(i, j) = std::pow(offsets[j], static_cast<double>(i));
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  double factorial = 1.0;
  for (int i = 2; i <= derivative; ++i) factorial *= i;
  rhs[derivative] = factorial;
  return V.fullPivLu().solve(rhs);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fd_derivative(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values,
                                                       double spacing) {
  constexpr int width = 7;
  const Eigen::Index n = values.size();
  if (n < width) throw InvalidArgument("fd_derivative: need at least 7 samples");
  // One weight table per stencil start offset relative to the node.
  std::vector<Eigen::VectorXd> tables;
  for (int shift = 0; shift < width; ++shift) {
    Eigen::VectorXd offsets(width);
    for (int j = 0; j < width; ++j) offsets[j] = j - shift;
    tables.push_back(fd_weights(offsets, 1) / spacing);
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index start = std::clamp<Eigen::Index>(i - width / 2, 0, n - width);
    const auto& w = tables[static_cast<std::size_t>(i - start)];
    Scalar sum(0);
    for (int j = 0; j < width; ++j) sum += w[j] * values[start + j];
    out[i] = sum;
  }
  return out;
}

template Eigen::VectorXd fd_derivative(const Eigen::VectorXd&, double);
template Eigen::VectorXcd fd_derivative(const Eigen::VectorXcd&, double);

ComplexField wave_differential(const ComplexField& x, const WaveParams& p) {
  const double h = x.grid().spacing();
  ComplexField out(x.grid_ptr(), 2);
  out.component(0) = p.T * fd_derivative<Complex>(x.component(1), h);
  out.component(1) = fd_derivative<Complex>(x.component(0), h) / p.rho;
  return out;
}

ComplexField reactor_differential(const ComplexField& x, const ReactorParams& p) {
  const double h = x.grid().spacing();
  ComplexField out(x.grid_ptr(), 1);
  out.component(0) = -p.v * fd_derivative<Complex>(x.component(0), h) + p.alpha * x.component(0);
  return out;
}

RealField reactor_bvp_oracle(const std::function<double(double)>& f, double s, const ReactorParams& p,
                             const ReactorBoundary& b, const GridPtr& grid) {
  const double mu = (p.alpha - s) / p.v;
  const Eigen::Index n = grid->size();
  const double h = grid->spacing();
  // Homogeneous solution with x(0) = 1 and particular solution with x(0) = 0.
  Eigen::VectorXd hom(n);
  Eigen::VectorXd part(n);
  hom[0] = 1.0;
  part[0] = 0.0;
  auto rhs_h = [mu](double, double x) { return mu * x; };
  auto rhs_p = [&](double z, double x) { return mu * x + f(z) / p.v; };
  auto rk4 = [h](auto&& rhs, double z, double x) {
    const double k1 = rhs(z, x);
    const double k2 = rhs(z + 0.5 * h, x + 0.5 * h * k1);
    const double k3 = rhs(z + 0.5 * h, x + 0.5 * h * k2);
    const double k4 = rhs(z + h, x + h * k3);
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double z = grid->nodes[i];
    hom[i + 1] = rk4(rhs_h, z, hom[i]);
    part[i + 1] = rk4(rhs_p, z, part[i]);
  }
  const double x0 = b.c * part[n - 1] / (1.0 - b.c * hom[n - 1]);
  RealField out(grid, 1);
  out.component(0) = x0 * hom + part;
  return out;
}

double wave_feedthrough_hyperbolic(const WaveParams& p, double delta) {
  const double Z = p.impedance();
  const double a = std::sqrt(p.rho / p.T) * delta;
  const double sh = std::sinh(a);
  const double ch = std::cosh(a);
  return -(1.0 / Z) * (p.kappa * sh + Z * ch) / (Z * sh + p.kappa * ch);
}

std::function<double(double)> random_smooth_function(std::mt19937_64& rng, int terms) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(terms));
  std::vector<double> b(static_cast<std::size_t>(terms));
  for (int j = 0; j < terms; ++j) {
    const double scale = 1.0 / (1.0 + j * j);
    a[static_cast<std::size_t>(j)] = coeff(rng) * scale;
    b[static_cast<std::size_t>(j)] = coeff(rng) * scale;
  }
  return [a, b](double z) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double w = std::numbers::pi * static_cast<double>(j);
      sum += a[j] * std::cos(w * z) + b[j] * std::sin(w * z + 0.3);
    }
    return sum;
  };
}

RealField random_smooth_state(std::mt19937_64& rng, Eigen::Index components, const GridPtr& grid) {
  RealField out(grid, components);
  for (Eigen::Index c = 0; c < components; ++c) {
    const auto f = random_smooth_function(rng);
    for (Eigen::Index i = 0; i < grid->size(); ++i) out.values()(i, c) = f(grid->nodes[i]);
  }
  return out;
}

RealField random_wave_domain_state(std::mt19937_64& rng, const WaveParams& p, const GridPtr& grid) {
  const auto f1 = random_smooth_function(rng);
  const auto g = random_smooth_function(rng);
  const double g0 = g(0.0);
  const double beta = -(p.kappa / p.rho) * f1(1.0) / p.T - (g(1.0) - g0);
  return RealField::sample(grid, 2, [&](double z) {
    return std::array<double, 2>{f1(z), g(z) - g0 + beta * z * z * z};
  });
}

RealField random_reactor_domain_state(std::mt19937_64& rng, const ReactorBoundary& b, const GridPtr& grid) {
  const auto f = random_smooth_function(rng);
  const double beta = b.c * f(1.0) - f(0.0);
  return RealField::sample(grid, 1, [&](double z) { return f(z) + beta * (1.0 - z) * (1.0 - z); });
}

Eigen::MatrixXd hessian_by_composition(const DiscreteSystem& sys, double Q, double R, int horizon,
                                       const std::function<RealField(const RealField&)>& terminal) {
  auto power = [&](const RealField& x, int m) {
    RealField y = x;
    for (int i = 0; i < m; ++i) y = sys.Ad(y);
    return y;
  };
  Eigen::MatrixXd H(horizon, horizon);
  for (int i = 0; i < horizon; ++i) {
    for (int j = 0; j <= i; ++j) {
      double value = 0.0;
      if (i == j) {
        value = sys.Dd * Q * sys.Dd + inner_product(sys.Bd, terminal(sys.Bd)) + R;
      } else {
        value = sys.Dd * Q * sys.Cd(power(sys.Bd, i - j - 1)) +
                inner_product(terminal(sys.Bd), power(sys.Bd, i - j));
      }
      H(i, j) = value;
      H(j, i) = value;
    }
  }
  return H;
}

}  // namespace pdempc::verify
