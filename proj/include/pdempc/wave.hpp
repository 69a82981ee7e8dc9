#pragma once

#include <cmath>

#include "pdempc/grid.hpp"
#include "pdempc/spectral.hpp"
#include "pdempc/sysops.hpp"

namespace pdempc {

/// Wave equation on [0, 1] with viscous damping kappa at zeta = 1, boundary
/// force control at zeta = 0 and velocity observation at zeta = 0.
/// State x = (rho w_t, w_z).
struct WaveParams {
  double rho = 1.0;    // mass density
  double T = 1.0;      // Young's modulus
  double kappa = 0.75; // boundary damping

  double impedance() const { return std::sqrt(rho * T); }
  double speed() const { return std::sqrt(T / rho); }
  /// Reflection factor of the damped end for the characteristic variables.
  double reflection() const { return (impedance() - kappa) / (impedance() + kappa); }
};

void validate(const WaveParams& p);

/// (s - A)^{-1} f for real s > 0.
///
/// Works in the characteristic variables w± = v ± stress / sqrt(rho T), in
/// which the resolvent splits into one forward and one backward running
/// integral with decaying kernels exp(-s sqrt(rho/T) |zeta - eta|) plus a
/// two-by-two boundary solve. This is the closed-form kernel written with
/// only bounded exponentials, so it is safe for any s sqrt(rho/T).
template <typename Scalar>
GridFunction<Scalar> wave_resolvent(const GridFunction<Scalar>& f, double s, const WaveParams& p);

/// Transfer function value G(delta), the closed form for Dd.
double wave_feedthrough(const WaveParams& p, double delta);

/// Solution of the boundary-driven elliptic problem, (s - A_{-1})^{-1} B.
RealField wave_input_profile(const WaveParams& p, double s, const GridPtr& grid);

/// Co-vector psi with <f, psi> = C (s - A)^{-1} f, for complex s with Re s > 0.
ComplexField wave_observation_adjoint(const WaveParams& p, Complex s, const GridPtr& grid);

DiscreteSystem wave_discrete_ops(const WaveParams& p, double delta, const GridPtr& grid);

Complex wave_eigenvalue(const WaveParams& p, int k);

/// Eigenvectors, biorthogonal sequence and Lyapunov co-vectors for
/// k = -M .. M. Requires kappa < sqrt(rho T).
SpectralBasis wave_eigensystem(const WaveParams& p, int truncation, const GridPtr& grid);

/// Truncated solution of A* P + P A = -C* Q C applied to x.
inline RealField wave_lyapunov_apply(const RealField& x, double Q, const SpectralBasis& basis) {
  return lyapunov_apply(x, Q, basis);
}

}  // namespace pdempc
