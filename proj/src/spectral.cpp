#include "pdempc/spectral.hpp"

#include <cmath>

namespace pdempc {

RealField lyapunov_apply(const RealField& x, double weight, const SpectralBasis& basis) {
  if (x.grid_ptr() != basis.grid || x.components() != basis.components) {
    throw InvalidArgument("lyapunov_apply: state layout does not match the spectral basis");
  }
  const ComplexField xc = to_complex(x);
  ComplexField sum(basis.grid, basis.components);
  // Fixed summation order keeps results bitwise reproducible.
  for (const SpectralMode& m : basis.modes) {
    const Complex coeff = inner_product(xc, m.biorthogonal) * weight * m.observed;
    sum.values() += coeff * m.observation_adjoint.values();
  }
  RealField out = real_part(sum);
  const double real_size = std::sqrt(out.values().squaredNorm());
  const double imag_size = std::sqrt(sum.values().imag().squaredNorm());
  if (imag_size > 1e-8 * real_size && imag_size > 1e-300) {
    throw NumericalError("lyapunov_apply: imaginary residue " + std::to_string(imag_size) +
                         " exceeds tolerance (truncation or quadrature fault)");
  }
  return out;
}

}  // namespace pdempc
