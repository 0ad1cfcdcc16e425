#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>

#include "chac/multi_index.hpp"

namespace chac {

/// Coefficient array over the n^d cosine-mode lattice, flat row-major.
template <typename Scalar>
struct SpectralField {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Array coeffs;
  int dim = 1;
  int modes = 0;

  static SpectralField zero(int n, int d) {
    SpectralField f;
    f.dim = d;
    f.modes = n;
    f.coeffs = Array::Zero(pow_int(n, d));
    return f;
  }

  std::int64_t size() const { return coeffs.size(); }
  Scalar l2_norm() const { return std::sqrt(coeffs.square().sum()); }
};

/// Values on the tensor midpoint grid x_j = pi (j + 1/2) / n per axis.
template <typename Scalar>
struct NodalField {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Array values;
  int dim = 1;
  int nodes = 0;

  static NodalField zero(int n, int d) {
    NodalField f;
    f.dim = d;
    f.nodes = n;
    f.values = Array::Zero(pow_int(n, d));
    return f;
  }

  Scalar spacing() const { return std::numbers::pi_v<Scalar> / Scalar(nodes); }
  std::int64_t size() const { return values.size(); }
};

using SpectralFieldd = SpectralField<double>;
using NodalFieldd = NodalField<double>;

}  // namespace chac
