#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pdempc/errors.hpp"
#include "pdempc/reactor.hpp"
#include "verify/oracles.hpp"

using namespace pdempc;
using std::numbers::pi;

namespace {

const GridPtr& grid511() {
  static const GridPtr g = make_grid(511);
  return g;
}

}  // namespace

TEST_CASE("ReactorParams: validation") {
  CHECK_NOTHROW(validate(ReactorParams{}));
  CHECK_THROWS_AS(validate(ReactorParams{0.0, 0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(validate(ReactorParams{1.0, 0.5, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(ReactorParams{1.0, 0.5, 0.0}), InvalidArgument);
}

TEST_CASE("reactor_stabilized: boundary after output feedback") {
  const ReactorParams p;
  const ReactorBoundary b = reactor_stabilized(p);
  CHECK(b.c == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(reactor_abscissa(p, b) == doctest::Approx(-0.59861).epsilon(1e-5));
  CHECK(reactor_abscissa(p, ReactorBoundary{p.r}) == doctest::Approx(0.09453).epsilon(1e-4));

  const ReactorParams q{1.0, 0.5, 0.51};
  CHECK(reactor_stabilized(q).c == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(reactor_abscissa(q, reactor_stabilized(q)) == doctest::Approx(0.5 + std::log(0.02)).epsilon(1e-12));
  CHECK_THROWS_AS(reactor_stabilized(ReactorParams{1.0, 0.5, 0.5}), InvalidArgument);
  CHECK(reactor_stabilized(p, -0.5).c == doctest::Approx(2.0 / 3.0 - 0.5 / 3.0).epsilon(1e-14));
}

TEST_CASE("reactor_eigensystem: spectrum and biorthogonality") {
  const ReactorParams p;
  const ReactorBoundary b{1.0 / 3.0};
  const SpectralBasis basis = reactor_eigensystem(p, b, 100, grid511());
  CHECK(basis.modes.size() == 201);
  CHECK(basis.mode(0).eigenvalue.real() == doctest::Approx(-0.59861).epsilon(1e-5));
  CHECK(basis.mode(1).eigenvalue.real() == doctest::Approx(-0.59861).epsilon(1e-5));
  CHECK(basis.mode(1).eigenvalue.imag() == doctest::Approx(2.0 * pi).epsilon(1e-14));
  CHECK(std::abs(inner_product(basis.mode(0).eigenvector, basis.mode(1).biorthogonal)) <= 1e-6);
  CHECK(std::abs(inner_product(basis.mode(1).eigenvector, basis.mode(1).biorthogonal) - 1.0) <= 1e-6);
  for (int k = -10; k <= 10; ++k) {
    const SpectralMode& m = basis.mode(k);
    const ComplexField r = verify::reactor_differential(m.eigenvector, p) - m.eigenvalue * m.eigenvector;
    CHECK(norm(r) <= 1e-4 * norm(m.eigenvector));
    // Boundary condition of the generator.
    CHECK(std::abs(m.eigenvector.values()(0, 0) - b.c * m.eigenvector.values()(grid511()->size() - 1, 0)) <=
          1e-12);
  }
  CHECK_THROWS_AS(reactor_eigensystem(p, ReactorBoundary{1.0}, 10, grid511()), InvalidArgument);
  CHECK_THROWS_AS(reactor_eigensystem(p, ReactorBoundary{-0.2}, 10, grid511()), InvalidArgument);
  CHECK_THROWS_AS(reactor_eigensystem(p, b, 0, grid511()), InvalidArgument);
}

TEST_CASE("reactor_resolvent: eigen identity and zero input") {
  const ReactorParams p;
  for (const ReactorBoundary b : {ReactorBoundary{p.r}, ReactorBoundary{1.0 / 3.0}}) {
    const SpectralBasis basis = reactor_eigensystem(p, b, 5, grid511());
    for (int k = -5; k <= 5; ++k) {
      const SpectralMode& m = basis.mode(k);
      const ComplexField lhs = reactor_resolvent(m.eigenvector, 20.0, p, b);
      const ComplexField rhs = (1.0 / (20.0 - m.eigenvalue)) * m.eigenvector;
      CHECK(norm(lhs - rhs) <= 1e-6 * norm(rhs));
    }
  }
  CHECK(norm(reactor_resolvent(RealField(grid511(), 1), 20.0, p, ReactorBoundary{p.r})) == 0.0);
}

TEST_CASE("reactor_resolvent: agrees with the boundary-value oracle") {
  const ReactorParams p;
  std::mt19937_64 rng(31);
  for (const ReactorBoundary b : {ReactorBoundary{p.r}, ReactorBoundary{1.0 / 3.0}}) {
    for (double s : {1.0, 20.0}) {
      const auto f = verify::random_smooth_function(rng);
      const RealField fs = RealField::sample(grid511(), 1, f);
      const RealField closed = reactor_resolvent(fs, s, p, b);
      const RealField oracle = verify::reactor_bvp_oracle(f, s, p, b, grid511());
      CHECK(norm(closed - oracle) <= 1e-5 * norm(oracle));
    }
  }
}

TEST_CASE("reactor_resolvent: spectrum proximity is rejected") {
  const ReactorParams p;
  const ReactorBoundary b{p.r};
  const double lambda0 = reactor_abscissa(p, b);
  CHECK_THROWS_AS(reactor_resolvent(RealField(grid511(), 1), lambda0, p, b), DomainError);
}

TEST_CASE("reactor_discrete_ops: closed forms") {
  const ReactorParams p;
  const DiscreteSystem sys = reactor_discrete_ops(p, 20.0, grid511());
  const double expected = (1.0 / 3.0) * std::exp(-19.5) / (1.0 - (2.0 / 3.0) * std::exp(-19.5));
  CHECK(sys.Dd == doctest::Approx(expected).epsilon(1e-12));
  CHECK(sys.Dd == doctest::Approx(1.1285e-9).epsilon(1e-4));
  CHECK(std::abs(reactor_discrete_ops(p, 2000.0, grid511()).Dd) <= 1e-300);
  CHECK_THROWS_AS(reactor_discrete_ops(p, 0.05, grid511()), InvalidArgument);

  // Cd is the boundary trace of the scaled resolvent.
  std::mt19937_64 rng(32);
  const RealField x = verify::random_smooth_state(rng, 1, grid511());
  const RealField r = reactor_resolvent(x, 20.0, p, ReactorBoundary{p.r});
  CHECK(sys.Cd(x) == doctest::Approx(std::sqrt(40.0) * r.values()(grid511()->size() - 1, 0)).epsilon(1e-7));

  // Bd solves the homogeneous problem with the input boundary condition.
  const Eigen::Index last = grid511()->size() - 1;
  const double b0 = sys.Bd.values()(0, 0) / std::sqrt(40.0);
  const double b1 = sys.Bd.values()(last, 0) / std::sqrt(40.0);
  CHECK(b0 == doctest::Approx(p.r * b1 + (1.0 - p.r)).epsilon(1e-12));
  CHECK(b1 == doctest::Approx(sys.Dd).epsilon(1e-12));
}

TEST_CASE("reactor_discrete_ops: the Cayley map keeps the unstable eigenvalue outside the unit disc") {
  const ReactorParams p;
  const ReactorBoundary open{p.r};
  const DiscreteSystem sys = reactor_discrete_ops(p, 20.0, grid511());
  const SpectralBasis basis = reactor_eigensystem(p, open, 1, grid511());
  const RealField phi0 = real_part(basis.mode(0).eigenvector);
  const double lambda0 = basis.mode(0).eigenvalue.real();
  const double factor = (20.0 + lambda0) / (20.0 - lambda0);
  CHECK(factor == doctest::Approx(1.009498).epsilon(1e-6));
  CHECK(norm(sys.Ad(phi0) - factor * phi0) <= 1e-6 * norm(phi0));

  // The lambda_0 coefficient of any state grows by the Cayley factor per step.
  std::mt19937_64 rng(33);
  RealField x = verify::random_reactor_domain_state(rng, open, grid511());
  const ComplexField& psi0 = basis.mode(0).biorthogonal;
  const double c0 = inner_product(to_complex(x), psi0).real();
  for (int k = 0; k < 50; ++k) x = sys.Ad(x);
  CHECK(inner_product(to_complex(x), psi0).real() == doctest::Approx(std::pow(factor, 50) * c0).epsilon(1e-5));
}

TEST_CASE("stabilized reactor: contraction of the discrete spectrum and decay under u = -y") {
  const ReactorParams p;
  const ReactorBoundary b = reactor_stabilized(p);
  const SpectralBasis basis = reactor_eigensystem(p, b, 100, grid511());
  for (const auto& m : basis.modes) CHECK(std::abs((20.0 + m.eigenvalue) / (20.0 - m.eigenvalue)) < 1.0);

  const DiscreteSystem cl = closed_loop_discrete(reactor_discrete_ops(p, 20.0, grid511()), -1.0);
  RealField x = RealField::sample(grid511(), 1, [](double z) { return 0.5 * std::sin(pi * z); });
  const double start = norm(x);
  for (int k = 0; k < 300; ++k) x = step(cl, x, 0.0).x;
  CHECK(norm(x) <= 1e-2 * start);
}

TEST_CASE("closed_loop_discrete matches the stabilized discretization") {
  const ReactorParams p;
  const DiscreteSystem cl = closed_loop_discrete(reactor_discrete_ops(p, 20.0, grid511()), -1.0);
  const DiscreteSystem direct = reactor_discrete_ops(p, 20.0, grid511(), reactor_stabilized(p));
  std::mt19937_64 rng(34);
  for (int t = 0; t < 20; ++t) {
    const RealField x = verify::random_smooth_state(rng, 1, grid511());
    CHECK(norm(cl.Ad(x) - direct.Ad(x)) <= 1e-6 * norm(direct.Ad(x)));
    CHECK(cl.Cd(x) == doctest::Approx(direct.Cd(x)).epsilon(1e-6));
  }
  CHECK(norm(cl.Bd - direct.Bd) <= 1e-6 * norm(direct.Bd));
  CHECK(cl.Dd == doctest::Approx(direct.Dd).epsilon(1e-6));
}

TEST_CASE("reactor_lyapunov_apply: properties and discrete residual") {
  const ReactorParams p;
  const ReactorBoundary b = reactor_stabilized(p);
  const SpectralBasis basis = reactor_eigensystem(p, b, 100, grid511());
  const DiscreteSystem sys = reactor_discrete_ops(p, 20.0, grid511(), b);
  const double weight = 2.0 + 10.0;
  CHECK(norm(reactor_lyapunov_apply(RealField(grid511(), 1), weight, basis)) == 0.0);
  std::mt19937_64 rng(35);
  for (int t = 0; t < 10; ++t) {
    const RealField x = verify::random_smooth_state(rng, 1, grid511());
    CHECK(inner_product(x, reactor_lyapunov_apply(x, weight, basis)) >= 0.0);
  }
  for (int t = 0; t < 10; ++t) {
    const RealField x = verify::random_reactor_domain_state(rng, b, grid511());
    const RealField Ax = sys.Ad(x);
    const double vx = inner_product(x, reactor_lyapunov_apply(x, weight, basis));
    const double vax = inner_product(Ax, reactor_lyapunov_apply(Ax, weight, basis));
    const double cx = sys.Cd(x);
    CHECK(std::abs(vax - vx + weight * cx * cx) <= 1e-3 * vx);
  }
}
