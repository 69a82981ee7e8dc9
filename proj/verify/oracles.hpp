#pragma once

#include <functional>
#include <random>

#include "pdempc/reactor.hpp"
#include "pdempc/wave.hpp"

// Independent reference computations used to check the closed-form
// operators. None of these share code paths with the library kernels.
namespace pdempc::verify {

/// Weights w with sum_j w_j f(z + offsets_j h) ~ h^d f^{(d)}(z), exact for
/// polynomials of degree < offsets.size(). Solved from the Vandermonde system.
Eigen::VectorXd fd_weights(const Eigen::VectorXd& offsets, int derivative);

/// First derivative of uniformly sampled values with a 7-point stencil
/// (centered inside, one-sided at the ends).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fd_derivative(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values,
                                                       double spacing);

/// Wave differential expression A x = (T x2', (x1 / rho)').
ComplexField wave_differential(const ComplexField& x, const WaveParams& p);

/// Reactor differential expression A x = -v x' + alpha x.
ComplexField reactor_differential(const ComplexField& x, const ReactorParams& p);

/// (s - A)^{-1} f for the reactor by RK4 integration of
/// v x' = (alpha - s) x + f on the grid and a scalar shooting condition for
/// x(0) = c x(1). `f` is evaluated at half steps, so it is passed as a function.
RealField reactor_bvp_oracle(const std::function<double(double)>& f, double s, const ReactorParams& p,
                             const ReactorBoundary& b, const GridPtr& grid);

/// Dd in the hyperbolic form sinh / cosh of sqrt(rho / T) delta.
double wave_feedthrough_hyperbolic(const WaveParams& p, double delta);

/// Smooth random function: a short Fourier series with decaying coefficients.
std::function<double(double)> random_smooth_function(std::mt19937_64& rng, int terms = 6);

/// Random smooth wave state in the generator domain:
/// x2(0) = 0 and T x2(1) + (kappa / rho) x1(1) = 0.
RealField random_wave_domain_state(std::mt19937_64& rng, const WaveParams& p, const GridPtr& grid);

/// Random smooth reactor state with x(0) = c x(1).
RealField random_reactor_domain_state(std::mt19937_64& rng, const ReactorBoundary& b, const GridPtr& grid);

/// Random smooth state without boundary conditions.
RealField random_smooth_state(std::mt19937_64& rng, Eigen::Index components, const GridPtr& grid);

/// Hessian of the MPC QP by direct composition: every power applied by
/// repeated Ad calls and every terminal term evaluated from scratch.
Eigen::MatrixXd hessian_by_composition(const DiscreteSystem& sys, double Q, double R, int horizon,
                                       const std::function<RealField(const RealField&)>& terminal);

}  // namespace pdempc::verify
