#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <memory>
#include <type_traits>
#include <vector>

#include "pdempc/errors.hpp"

namespace pdempc {

using Complex = std::complex<double>;

/// Uniform nodes on [0, 1] with composite-Simpson weights.
struct Grid {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.size(); }
  double spacing() const { return nodes[1] - nodes[0]; }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds a uniform grid of `n` nodes. `n` must be odd and at least 3 so the
/// Simpson panels close.
GridPtr make_grid(Eigen::Index n);

/// Sampled state over a grid: one column per state component.
template <typename Scalar>
class GridFunction {
 public:
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Column = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GridFunction() = default;

  GridFunction(GridPtr grid, Eigen::Index components)
      : grid_(std::move(grid)), values_(Values::Zero(grid_->size(), components)) {}

  GridFunction(GridPtr grid, Values values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.rows() != grid_->size()) {
      throw InvalidArgument("GridFunction: value rows do not match grid size");
    }
  }

  /// Samples `f(zeta)` at every node; `f` returns one value per component
  /// (anything indexable with operator[] or a scalar for one component).
  template <typename F>
  static GridFunction sample(GridPtr grid, Eigen::Index components, F&& f) {
    GridFunction out(grid, components);
    for (Eigen::Index i = 0; i < grid->size(); ++i) {
      const double zeta = grid->nodes[i];
      if constexpr (std::is_convertible_v<std::invoke_result_t<F, double>, Scalar>) {
        out.values_(i, 0) = f(zeta);
      } else {
        const auto v = f(zeta);
        for (Eigen::Index c = 0; c < components; ++c) out.values_(i, c) = v[c];
      }
    }
    return out;
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Eigen::Index components() const { return values_.cols(); }
  Eigen::Index size() const { return values_.rows(); }

  Values& values() { return values_; }
  const Values& values() const { return values_; }

  auto component(Eigen::Index c) { return values_.col(c); }
  auto component(Eigen::Index c) const { return values_.col(c); }

  /// Components stacked into one vector (column-major storage).
  Eigen::Map<Column> flat() { return {values_.data(), values_.size()}; }
  Eigen::Map<const Column> flat() const { return {values_.data(), values_.size()}; }

  bool same_layout(const GridFunction& other) const {
    return grid_ == other.grid_ && components() == other.components();
  }

  GridFunction& operator+=(const GridFunction& rhs) {
    require_layout(rhs);
    values_ += rhs.values_;
    return *this;
  }
  GridFunction& operator-=(const GridFunction& rhs) {
    require_layout(rhs);
    values_ -= rhs.values_;
    return *this;
  }
  GridFunction& operator*=(Scalar a) {
    values_ *= a;
    return *this;
  }

  void require_layout(const GridFunction& other) const {
    if (!same_layout(other)) throw InvalidArgument("GridFunction: grid or component mismatch");
  }

 private:
  GridPtr grid_;
  Values values_;
};

using RealField = GridFunction<double>;
using ComplexField = GridFunction<Complex>;

template <typename Scalar>
GridFunction<Scalar> operator+(GridFunction<Scalar> a, const GridFunction<Scalar>& b) {
  return a += b;
}
template <typename Scalar>
GridFunction<Scalar> operator-(GridFunction<Scalar> a, const GridFunction<Scalar>& b) {
  return a -= b;
}
template <typename Scalar>
GridFunction<Scalar> operator*(Scalar s, GridFunction<Scalar> a) {
  return a *= s;
}
template <typename Scalar>
GridFunction<Scalar> operator-(GridFunction<Scalar> a) {
  return a *= Scalar(-1);
}

/// Weighted L2 inner product, conjugate-linear in the second argument.
template <typename Scalar>
Scalar inner_product(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  f.require_layout(g);
  const auto& w = f.grid().weights;
  Scalar sum(0);
  for (Eigen::Index c = 0; c < f.components(); ++c) {
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if constexpr (std::is_same_v<Scalar, double>) {
        sum += w[i] * f.values()(i, c) * g.values()(i, c);
      } else {
        sum += w[i] * f.values()(i, c) * std::conj(g.values()(i, c));
      }
    }
  }
  return sum;
}

template <typename Scalar>
double norm(const GridFunction<Scalar>& f) {
  return std::sqrt(std::real(inner_product(f, f)));
}

inline ComplexField to_complex(const RealField& f) {
  return {f.grid_ptr(), f.values().template cast<Complex>()};
}

inline RealField real_part(const ComplexField& f) { return {f.grid_ptr(), f.values().real()}; }

/// Running integrals with an exponential kernel, evaluated at every node:
///   forward(g)_i  = int_0^{z_i} exp(-rate (z_i - s)) g(s) ds
///   backward(g)_i = int_{z_i}^1 exp(-rate (s - z_i)) g(s) ds
///
/// Each cell integral is computed by product integration: the exponential
/// is integrated exactly against a local cubic interpolant of g, so steep
/// kernels (large rate) cost no accuracy. The recursion only multiplies by
/// exp(-rate h), which stays below one for rate >= 0 and never forms
/// differences of large hyperbolic terms.
class ExponentialRunningIntegral {
 public:
  ExponentialRunningIntegral(const Grid& grid, double rate);

  template <typename Derived>
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> forward(
      const Eigen::MatrixBase<Derived>& g) const {
    using S = typename Derived::Scalar;
    const Eigen::Index n = g.size();
    Eigen::Matrix<S, Eigen::Dynamic, 1> out(n);
    out[0] = S(0);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const Eigen::Index start = stencil_start(i, n);
      const auto& w = cell_weights_[static_cast<std::size_t>(i - start)];
      S cell(0);
      for (Eigen::Index j = 0; j < stencil_; ++j) cell += w[j] * g[start + j];
      out[i + 1] = step_decay_ * out[i] + cell;
    }
    return out;
  }

  template <typename Derived>
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> backward(
      const Eigen::MatrixBase<Derived>& g) const {
    using Vec = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
    const Vec reversed = g.reverse();
    return forward(reversed).reverse();
  }

 private:
  Eigen::Index stencil_start(Eigen::Index cell, Eigen::Index n) const {
    const Eigen::Index s = cell - 1;
    return std::clamp<Eigen::Index>(s, 0, n - stencil_);
  }

  Eigen::Index stencil_;
  double step_decay_;
  // cell_weights_[o][j]: weight of stencil node j when the cell's left node
  // sits at offset o inside the stencil.
  std::vector<Eigen::VectorXd> cell_weights_;
};

}  // namespace pdempc
