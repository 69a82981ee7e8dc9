#pragma once

#include <vector>

#include "pdempc/grid.hpp"

namespace pdempc {

/// One eigenpair of a Riesz-spectral generator together with the data the
/// spectral Lyapunov solution needs.
struct SpectralMode {
  int index = 0;
  Complex eigenvalue;
  ComplexField eigenvector;
  ComplexField biorthogonal;
  /// Co-vector psi with <f, psi> = C (-conj(eigenvalue) - A)^{-1} f.
  ComplexField observation_adjoint;
  /// C applied to the eigenvector.
  Complex observed;
};

/// Truncated eigensystem, modes ordered by index -M .. M.
struct SpectralBasis {
  int truncation = 0;
  GridPtr grid;
  Eigen::Index components = 1;
  std::vector<SpectralMode> modes;

  const SpectralMode& mode(int k) const { return modes.at(static_cast<std::size_t>(k + truncation)); }
};

/// Truncated spectral solution of  A* P + P A = -C* weight C  applied to x:
///   P x = sum_k <x, biorthogonal_k> weight (C eigenvector_k) observation_adjoint_k.
/// The imaginary residue of the sum must stay below 1e-8 relative, otherwise
/// NumericalError is thrown.
RealField lyapunov_apply(const RealField& x, double weight, const SpectralBasis& basis);

}  // namespace pdempc
