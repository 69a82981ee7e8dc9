#include "pdempc/sysops.hpp"

#include <cmath>
#include <string>

namespace pdempc {

void validate(const DiscreteSystem& sys) {
  if (!sys.grid) throw InvalidArgument("DiscreteSystem: missing grid");
  if (!sys.apply_Ad) throw InvalidArgument("DiscreteSystem: missing state operator");
  if (sys.Bd.grid_ptr() != sys.grid || sys.Bd.components() != sys.components) {
    throw InvalidArgument("DiscreteSystem: Bd layout mismatch");
  }
  if (sys.output_covector.grid_ptr() != sys.grid ||
      sys.output_covector.components() != sys.components) {
    throw InvalidArgument("DiscreteSystem: output co-vector layout mismatch");
  }
  if (!(sys.delta > 0.0) || !(sys.h > 0.0) || std::abs(sys.delta * sys.h - 2.0) > 1e-12) {
    throw InvalidArgument("DiscreteSystem: need delta > 0, h > 0 and delta * h = 2");
  }
}

StepResult step(const DiscreteSystem& sys, const RealField& x_prev, double u) {
  if (x_prev.grid_ptr() != sys.grid || x_prev.components() != sys.components) {
    throw InvalidArgument("step: state does not live on the system grid");
  }
  RealField x = sys.Ad(x_prev);
  x.values() += u * sys.Bd.values();
  return {std::move(x), sys.Cd(x_prev) + sys.Dd * u};
}

std::vector<TrajectoryPoint> simulate(const DiscreteSystem& sys, const RealField& x0,
                                      const std::vector<double>& inputs) {
  std::vector<TrajectoryPoint> out;
  out.reserve(inputs.size());
  RealField x = x0;
  for (double u : inputs) {
    auto [next, y] = step(sys, x, u);
    out.push_back({next, y, u});
    x = std::move(next);
  }
  return out;
}

Eigen::MatrixXd materialize_state_operator(const DiscreteSystem& sys) {
  const Eigen::Index dim = sys.grid->size() * sys.components;
  Eigen::MatrixXd A(dim, dim);
  RealField e = sys.zero_state();
  for (Eigen::Index j = 0; j < dim; ++j) {
    e.flat().setZero();
    e.flat()[j] = 1.0;
    A.col(j) = sys.Ad(e).flat();
  }
  return A;
}

HorizonCache build_horizon_cache(const DiscreteSystem& sys, int horizon) {
  if (horizon < 1) throw InvalidArgument("build_horizon_cache: horizon must be >= 1");
  validate(sys);

  HorizonCache cache;
  cache.horizon = horizon;
  cache.input_powers.reserve(horizon);
  cache.output_powers.reserve(horizon);

  cache.input_powers.push_back(sys.Bd);
  for (int j = 1; j < horizon; ++j) cache.input_powers.push_back(sys.Ad(cache.input_powers.back()));

  cache.output_powers.push_back(sys.output_covector);
  if (horizon > 1) {
    // <x, c_{j+1}> = <Ad x, c_j>  =>  c_{j+1} = W^{-1} Ad^T W c_j with W the
    // quadrature weights repeated per component.
    const Eigen::MatrixXd A = materialize_state_operator(sys);
    const Eigen::VectorXd w = sys.grid->weights.replicate(sys.components, 1);
    for (int j = 1; j < horizon; ++j) {
      RealField next = sys.zero_state();
      const Eigen::VectorXd weighted = w.cwiseProduct(cache.output_powers.back().flat());
      next.flat() = (A.transpose() * weighted).cwiseQuotient(w);
      cache.output_powers.push_back(std::move(next));
    }
  }
  return cache;
}

DiscreteSystem closed_loop_discrete(const DiscreteSystem& sys, double Ky) {
  const double loop = 1.0 - sys.Dd * Ky;
  if (std::abs(loop) < 1e-14) {
    throw InvalidArgument("closed_loop_discrete: algebraic loop 1 - Dd Ky vanishes");
  }
  DiscreteSystem out = sys;
  const double gain = Ky / loop;
  out.apply_Ad = [open = sys, gain](const RealField& x) {
    RealField ax = open.Ad(x);
    ax.values() += (gain * open.Cd(x)) * open.Bd.values();
    return ax;
  };
  out.Bd.values() /= loop;
  out.output_covector.values() /= loop;
  out.Dd = sys.Dd / loop;
  return out;
}

}  // namespace pdempc
