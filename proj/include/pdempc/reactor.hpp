#pragma once

#include "pdempc/grid.hpp"
#include "pdempc/spectral.hpp"
#include "pdempc/sysops.hpp"

namespace pdempc {

/// Tubular reactor with recycle on [0, 1]:
///   x_t = -v x_z + alpha x,   x(0) = r x(1) + (1 - r) u,   y = x(1).
struct ReactorParams {
  double v = 1.0;      // transport velocity
  double alpha = 0.5;  // reaction rate
  double r = 2.0 / 3.0;  // recycle fraction
};

/// Boundary reflection x(0) = c x(1) of the generator.
struct ReactorBoundary {
  double c = 2.0 / 3.0;
};

void validate(const ReactorParams& p);

/// Spectral abscissa alpha + v log(c) for c > 0.
double reactor_abscissa(const ReactorParams& p, const ReactorBoundary& b);

/// (s - A)^{-1} f for the generator with boundary x(0) = c x(1):
///   x(z) = e^{mu z} x(0) + (1/v) int_0^z e^{mu (z - e)} f(e) de,
///   x(0) = c / (v (1 - c e^{mu})) int_0^1 e^{mu (1 - e)} f(e) de,
/// with mu = (alpha - s) / v.
template <typename Scalar>
GridFunction<Scalar> reactor_resolvent(const GridFunction<Scalar>& f, double s, const ReactorParams& p,
                                       const ReactorBoundary& b);

/// Co-vector psi with <f, psi> = C (s - A)^{-1} f, C = evaluation at 1.
ComplexField reactor_observation_adjoint(const ReactorParams& p, const ReactorBoundary& b, Complex s,
                                         const GridPtr& grid);

/// Cayley-Tustin operators for the boundary b (b.c = r is the open loop).
/// The input always enters as (1 - r) u at zeta = 0.
DiscreteSystem reactor_discrete_ops(const ReactorParams& p, double delta, const GridPtr& grid,
                                    const ReactorBoundary& b);

inline DiscreteSystem reactor_discrete_ops(const ReactorParams& p, double delta, const GridPtr& grid) {
  return reactor_discrete_ops(p, delta, grid, ReactorBoundary{p.r});
}

/// Boundary after the output feedback u = Ky y: c = r + (1 - r) Ky.
/// Rejects gains for which c <= 0 (the spectrum would need the log of a
/// non-positive number).
ReactorBoundary reactor_stabilized(const ReactorParams& p, double Ky);

/// The u = -y case, c = 2r - 1.
inline ReactorBoundary reactor_stabilized(const ReactorParams& p) { return reactor_stabilized(p, -1.0); }

Complex reactor_eigenvalue(const ReactorParams& p, const ReactorBoundary& b, int n);

/// Eigenfunctions e^{(alpha - lambda_n) z / v} for n = -M .. M with the
/// envelope-weighted biorthogonal sequence. Requires 0 < c < 1.
SpectralBasis reactor_eigensystem(const ReactorParams& p, const ReactorBoundary& b, int truncation,
                                  const GridPtr& grid);

/// Truncated solution of A_s* P + P A_s = -C* weight C; `weight` is Q + Ky^2 R
/// for the output-feedback tail.
inline RealField reactor_lyapunov_apply(const RealField& x, double weight, const SpectralBasis& basis) {
  return lyapunov_apply(x, weight, basis);
}

}  // namespace pdempc
