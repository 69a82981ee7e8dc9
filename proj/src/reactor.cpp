#include "pdempc/reactor.hpp"

#include <cmath>
#include <numbers>

namespace pdempc {

void validate(const ReactorParams& p) {
  if (!(p.v > 0.0)) throw InvalidArgument("reactor: v must be positive");
  if (!(p.r > 0.0 && p.r < 1.0)) throw InvalidArgument("reactor: r must lie in (0, 1)");
  if (!std::isfinite(p.alpha)) throw InvalidArgument("reactor: alpha must be finite");
}

double reactor_abscissa(const ReactorParams& p, const ReactorBoundary& b) {
  if (!(b.c > 0.0)) throw InvalidArgument("reactor_abscissa: needs c > 0");
  return p.alpha + p.v * std::log(b.c);
}

namespace {

double boundary_denominator(const ReactorBoundary& b, double mu) {
  const double d = 1.0 - b.c * std::exp(mu);
  if (std::abs(d) < 1e-12) {
    throw DomainError("reactor: resolvent point too close to the spectrum");
  }
  return d;
}

class ReactorResolvent {
 public:
  ReactorResolvent(const ReactorParams& p, double s, const ReactorBoundary& b, const Grid& grid)
      : p_(p), b_(b), mu_((p.alpha - s) / p.v), denom_(boundary_denominator(b, mu_)), integral_(grid, -mu_) {}

  template <typename Scalar>
  GridFunction<Scalar> operator()(const GridFunction<Scalar>& f) const {
    if (f.components() != 1) throw InvalidArgument("reactor_resolvent: state has one component");
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Vec running = integral_.forward(f.component(0)) / p_.v;
    const Scalar at_zero = b_.c * running[running.size() - 1] / denom_;
    GridFunction<Scalar> out(f.grid_ptr(), 1);
    out.component(0) = (mu_ * f.grid().nodes.array()).exp().matrix().template cast<Scalar>() * at_zero + running;
    return out;
  }

 private:
  ReactorParams p_;
  ReactorBoundary b_;
  double mu_;
  double denom_;
  ExponentialRunningIntegral integral_;
};

}  // namespace

template <typename Scalar>
GridFunction<Scalar> reactor_resolvent(const GridFunction<Scalar>& f, double s, const ReactorParams& p,
                                       const ReactorBoundary& b) {
  return ReactorResolvent(p, s, b, f.grid())(f);
}

template RealField reactor_resolvent(const RealField&, double, const ReactorParams&, const ReactorBoundary&);
template ComplexField reactor_resolvent(const ComplexField&, double, const ReactorParams&,
                                        const ReactorBoundary&);

ComplexField reactor_observation_adjoint(const ReactorParams& p, const ReactorBoundary& b, Complex s,
                                         const GridPtr& grid) {
  const Complex mu = (p.alpha - s) / p.v;
  const Complex denom = p.v * (1.0 - b.c * std::exp(mu));
  if (std::abs(denom) < 1e-12) throw DomainError("reactor: observation point too close to the spectrum");
  ComplexField psi(grid, 1);
  for (Eigen::Index i = 0; i < grid->size(); ++i) {
    psi.values()(i, 0) = std::conj(std::exp(mu * (1.0 - grid->nodes[i])) / denom);
  }
  return psi;
}

DiscreteSystem reactor_discrete_ops(const ReactorParams& p, double delta, const GridPtr& grid,
                                    const ReactorBoundary& b) {
  validate(p);
  if (!(delta > 0.0)) throw InvalidArgument("reactor_discrete_ops: delta must be positive");
  if (b.c > 0.0 && !(delta > reactor_abscissa(p, b))) {
    throw InvalidArgument("reactor_discrete_ops: delta must lie right of the spectral abscissa");
  }
  const double mu = (p.alpha - delta) / p.v;
  const double denom = boundary_denominator(b, mu);
  const double scale = std::sqrt(2.0 * delta);

  DiscreteSystem sys;
  sys.grid = grid;
  sys.components = 1;
  sys.delta = delta;
  sys.h = 2.0 / delta;
  sys.apply_Ad = [resolvent = std::make_shared<ReactorResolvent>(p, delta, b, *grid), delta](const RealField& x) {
    RealField out = (*resolvent)(x);
    out.values() = 2.0 * delta * out.values() - x.values();
    return out;
  };
  sys.Bd = RealField(grid, 1);
  sys.Bd.component(0) = (scale * (1.0 - p.r) / denom) * (mu * grid->nodes.array()).exp().matrix();
  sys.output_covector = real_part(reactor_observation_adjoint(p, b, Complex(delta, 0.0), grid));
  sys.output_covector.values() *= scale;
  sys.Dd = (1.0 - p.r) * std::exp(mu) / denom;
  return sys;
}

ReactorBoundary reactor_stabilized(const ReactorParams& p, double Ky) {
  validate(p);
  const double c = p.r + (1.0 - p.r) * Ky;
  if (!(c > 0.0)) {
    throw InvalidArgument("reactor_stabilized: closed-loop reflection " + std::to_string(c) +
                          " <= 0 is not supported");
  }
  return {c};
}

Complex reactor_eigenvalue(const ReactorParams& p, const ReactorBoundary& b, int n) {
  return Complex(reactor_abscissa(p, b), 2.0 * std::numbers::pi * n * p.v);
}

SpectralBasis reactor_eigensystem(const ReactorParams& p, const ReactorBoundary& b, int truncation,
                                  const GridPtr& grid) {
  validate(p);
  if (!(b.c > 0.0 && b.c < 1.0)) throw InvalidArgument("reactor_eigensystem: c must lie in (0, 1)");
  if (truncation < 1) throw InvalidArgument("reactor_eigensystem: truncation must be >= 1");

  SpectralBasis basis;
  basis.truncation = truncation;
  basis.grid = grid;
  basis.components = 1;
  const double log_c = std::log(b.c);
  for (int n = -truncation; n <= truncation; ++n) {
    SpectralMode m;
    m.index = n;
    m.eigenvalue = reactor_eigenvalue(p, b, n);
    const Complex mu = (p.alpha - m.eigenvalue) / p.v;
    m.eigenvector = ComplexField(grid, 1);
    m.biorthogonal = ComplexField(grid, 1);
    for (Eigen::Index i = 0; i < grid->size(); ++i) {
      const double zeta = grid->nodes[i];
      const Complex phi = std::exp(mu * zeta);
      const double envelope = std::exp(-log_c * zeta);
      m.eigenvector.values()(i, 0) = phi;
      m.biorthogonal.values()(i, 0) = phi / (envelope * envelope);
    }
    m.observation_adjoint = reactor_observation_adjoint(p, b, -std::conj(m.eigenvalue), grid);
    m.observed = std::exp(mu);
    basis.modes.push_back(std::move(m));
  }
  return basis;
}

}  // namespace pdempc
