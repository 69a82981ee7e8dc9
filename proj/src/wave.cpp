#include "pdempc/wave.hpp"

#include <cmath>
#include <numbers>

namespace pdempc {

void validate(const WaveParams& p) {
  if (!(p.rho > 0.0) || !(p.T > 0.0)) throw InvalidArgument("wave: rho and T must be positive");
  if (!(p.kappa > 0.0)) throw InvalidArgument("wave: kappa must be positive");
  if (std::abs(p.kappa - p.impedance()) <= 1e-9) {
    throw InvalidArgument("wave: kappa must differ from sqrt(rho T)");
  }
}

namespace {

class WaveResolvent {
 public:
  WaveResolvent(const WaveParams& p, double s, const Grid& grid)
      : p_(p), rate_(s / p.speed()), integral_(grid, rate_) {
    if (!(s > 0.0)) throw DomainError("wave_resolvent: s must be positive");
  }

  template <typename Scalar>
  GridFunction<Scalar> operator()(const GridFunction<Scalar>& f) const {
    if (f.components() != 2) throw InvalidArgument("wave_resolvent: state needs two components");
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const double Z = p_.impedance();
    const double gamma = p_.reflection();
    const double a = rate_;
    const Eigen::ArrayXd& z = f.grid().nodes.array();

    const Vec left_source = f.component(0) / Z - f.component(1);
    const Vec right_source = -(f.component(1) + f.component(0) / Z);
    const Vec left = integral_.forward(left_source);    // int_0^z e^{-a(z-e)} (.)
    const Vec right = integral_.backward(right_source); // int_z^1 e^{-a(e-z)} (.)

    const Eigen::Index last = f.size() - 1;
    const double ea = std::exp(-a);
    const Scalar w0 = (gamma * ea * left[last] - right[0]) / (1.0 - gamma * ea * ea);
    const Scalar left_at_one = ea * w0 + left[last];

    const Vec wm = (-a * z).exp().matrix().template cast<Scalar>() * w0 + left;
    const Vec wp = (-a * (1.0 - z)).exp().matrix().template cast<Scalar>() * (gamma * left_at_one) - right;

    GridFunction<Scalar> out(f.grid_ptr(), 2);
    out.component(0) = p_.rho * 0.5 * (wp + wm);
    out.component(1) = (Z / p_.T) * 0.5 * (wp - wm);
    return out;
  }

 private:
  WaveParams p_;
  double rate_;
  ExponentialRunningIntegral integral_;
};

}  // namespace

template <typename Scalar>
GridFunction<Scalar> wave_resolvent(const GridFunction<Scalar>& f, double s, const WaveParams& p) {
  return WaveResolvent(p, s, f.grid())(f);
}

template RealField wave_resolvent(const RealField&, double, const WaveParams&);
template ComplexField wave_resolvent(const ComplexField&, double, const WaveParams&);

double wave_feedthrough(const WaveParams& p, double delta) {
  const double Z = p.impedance();
  const double t = std::tanh(delta / p.speed());
  return -(1.0 / Z) * (p.kappa * t + Z) / (Z * t + p.kappa);
}

RealField wave_input_profile(const WaveParams& p, double s, const GridPtr& grid) {
  const double Z = p.impedance();
  const double gamma = p.reflection();
  const double a = s / p.speed();
  const double left0 = -2.0 / (Z * (1.0 - gamma * std::exp(-2.0 * a)));
  const Eigen::ArrayXd& z = grid->nodes.array();
  const Eigen::ArrayXd decay = (-a * z).exp();
  const Eigen::ArrayXd returned = gamma * (-a * (2.0 - z)).exp();

  RealField f(grid, 2);
  f.component(0) = (p.rho * 0.5 * left0) * (decay + returned);
  f.component(1) = (Z / p.T * 0.5 * left0) * (returned - decay);
  return f;
}

ComplexField wave_observation_adjoint(const WaveParams& p, Complex s, const GridPtr& grid) {
  const double Z = p.impedance();
  const double gamma = p.reflection();
  const Complex a = s / p.speed();
  const Complex ea = std::exp(-a);
  const Complex denom = 1.0 - gamma * ea * ea;
  ComplexField psi(grid, 2);
  for (Eigen::Index i = 0; i < grid->size(); ++i) {
    const double eta = grid->nodes[i];
    const Complex reflected = gamma * ea * std::exp(-a * (1.0 - eta));
    const Complex direct = std::exp(-a * eta);
    psi.values()(i, 0) = std::conj((reflected + direct) / (Z * denom));
    psi.values()(i, 1) = std::conj((direct - reflected) / denom);
  }
  return psi;
}

DiscreteSystem wave_discrete_ops(const WaveParams& p, double delta, const GridPtr& grid) {
  validate(p);
  if (!(delta > 0.0)) throw InvalidArgument("wave_discrete_ops: delta must be positive");

  DiscreteSystem sys;
  sys.grid = grid;
  sys.components = 2;
  sys.delta = delta;
  sys.h = 2.0 / delta;
  const double scale = std::sqrt(2.0 * delta);

  sys.apply_Ad = [resolvent = std::make_shared<WaveResolvent>(p, delta, *grid), delta](const RealField& x) {
    RealField out = (*resolvent)(x);
    out.values() = 2.0 * delta * out.values() - x.values();
    return out;
  };
  sys.Bd = wave_input_profile(p, delta, grid);
  sys.Bd.values() *= scale;
  sys.output_covector = real_part(wave_observation_adjoint(p, Complex(delta, 0.0), grid));
  sys.output_covector.values() *= scale;
  sys.Dd = wave_feedthrough(p, delta);
  return sys;
}

Complex wave_eigenvalue(const WaveParams& p, int k) {
  const double c = p.speed();
  const Complex lambda0 = 0.5 * c * std::log(Complex(p.reflection(), 0.0));
  return lambda0 + Complex(0.0, c * k * std::numbers::pi);
}

SpectralBasis wave_eigensystem(const WaveParams& p, int truncation, const GridPtr& grid) {
  validate(p);
  if (truncation < 1) throw InvalidArgument("wave_eigensystem: truncation must be >= 1");
  if (!(p.kappa < p.impedance())) {
    throw InvalidArgument("wave_eigensystem: only kappa < sqrt(rho T) is supported");
  }
  const double c = p.speed();
  const double Z = p.impedance();
  const double lambda0 = wave_eigenvalue(p, 0).real();
  const Complex I(0.0, 1.0);

  SpectralBasis basis;
  basis.truncation = truncation;
  basis.grid = grid;
  basis.components = 2;
  basis.modes.reserve(2 * truncation + 1);
  for (int k = -truncation; k <= truncation; ++k) {
    SpectralMode m;
    m.index = k;
    m.eigenvalue = wave_eigenvalue(p, k);
    m.eigenvector = ComplexField(grid, 2);
    m.biorthogonal = ComplexField(grid, 2);
    for (Eigen::Index i = 0; i < grid->size(); ++i) {
      const double zeta = grid->nodes[i];
      const Complex arg = m.eigenvalue * zeta / c;
      const Complex phi1 = std::cosh(arg);
      const Complex phi2 = std::sinh(arg) / Z;
      // Pointwise map onto (cos k pi z, sin k pi z); the biorthogonal element
      // is M* M phi.
      const double b = lambda0 * zeta / c;
      const double ch = std::cosh(b);
      const double sh = std::sinh(b);
      const Complex m1 = ch * phi1 - Z * sh * phi2;
      const Complex m2 = I * sh * phi1 - I * Z * ch * phi2;
      m.eigenvector.values()(i, 0) = phi1;
      m.eigenvector.values()(i, 1) = phi2;
      m.biorthogonal.values()(i, 0) = ch * m1 - I * sh * m2;
      m.biorthogonal.values()(i, 1) = -Z * sh * m1 + I * Z * ch * m2;
    }
    m.observation_adjoint = wave_observation_adjoint(p, -std::conj(m.eigenvalue), grid);
    m.observed = m.eigenvector.values()(0, 0) / p.rho;
    basis.modes.push_back(std::move(m));
  }
  return basis;
}

}  // namespace pdempc
