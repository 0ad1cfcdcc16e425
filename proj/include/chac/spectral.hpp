#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "chac/cosine_transform.hpp"
#include "chac/field.hpp"
#include "chac/multi_index.hpp"

namespace chac {

// Eigenbasis of the Neumann Laplacian on [0, pi]^d:
//   eps_0 = 1/sqrt(pi),  eps_j(x) = sqrt(2/pi) cos(j x),  eps_k = prod_i eps_{k_i}(x_i),
// eigenvalues lambda_k = |k|^2.  The linear operator is -rho*Lap^2 + qtilde*Lap,
// acting mode-wise as -(rho lambda_k^2 + qtilde lambda_k).

struct OperatorSpec {
  double rho = 1.0;
  double qtilde = 1.0;

  double omega(double lambda) const { return rho * lambda * lambda + qtilde * lambda; }
};

template <typename Scalar>
Scalar basis_eval_1d(int j, Scalar x) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (j == 0) return Scalar(1) / std::sqrt(pi);
  return std::sqrt(Scalar(2) / pi) * std::cos(Scalar(j) * x);
}

template <typename Scalar>
Scalar basis_eval(const MultiIndex& k, std::span<const Scalar> x) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (int(x.size()) != k.dim)
    throw std::invalid_argument("basis_eval: point dimension mismatch");
  Scalar v = Scalar(1);
  for (int i = 0; i < k.dim; ++i) {
    if (x[i] < Scalar(0) || x[i] > pi)
      throw std::domain_error("basis_eval: point outside [0,pi]^d");
    v *= basis_eval_1d(k.k[i], x[i]);
  }
  return v;
}

namespace detail {

// Rotate the last axis of an n^d cube to the front (row-major flat layout).
template <typename Scalar>
void rotate_axes(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& in,
                 Eigen::Array<Scalar, Eigen::Dynamic, 1>& out, int n, int dim) {
  if (dim == 1) {
    out = in;
    return;
  }
  const std::int64_t outer = pow_int(n, dim - 1);
  out.resize(in.size());
  for (std::int64_t o = 0; o < outer; ++o)
    for (int last = 0; last < n; ++last)
      out[std::int64_t(last) * outer + o] = in[o * n + last];
}

// Apply the per-axis orthonormal map along every axis of the cube.
// forward: nodal values -> coefficients of eps_k (c_0 = sqrt(pi)/n X_0,
// c_k = sqrt(2 pi)/n X_k); inverse undoes it exactly.
template <typename Scalar>
void transform_cube(Eigen::Array<Scalar, Eigen::Dynamic, 1>& data, int n, int dim,
                    const CosinePlan<Scalar>& plan, bool forward) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar s0 = std::sqrt(pi) / Scalar(n);
  const Scalar sk = std::sqrt(Scalar(2) * pi) / Scalar(n);
  const std::int64_t rows = pow_int(n, dim - 1);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> tmp;
  for (int axis = 0; axis < dim; ++axis) {
    for (std::int64_t r = 0; r < rows; ++r) {
      Scalar* row = data.data() + r * n;
      if (forward) {
        plan.dct2(row);
        row[0] *= s0;
        for (int k = 1; k < n; ++k) row[k] *= sk;
      } else {
        row[0] /= s0;
        for (int k = 1; k < n; ++k) row[k] /= sk;
        plan.dct3(row);
      }
    }
    if (dim > 1) {
      rotate_axes(data, tmp, n, dim);
      data.swap(tmp);
    }
  }
}

}  // namespace detail

template <typename Scalar>
SpectralField<Scalar> to_spectral(const NodalField<Scalar>& f) {
  SpectralField<Scalar> u;
  u.dim = f.dim;
  u.modes = f.nodes;
  u.coeffs = f.values;
  auto plan = cosine_plan<Scalar>(f.nodes);
  detail::transform_cube(u.coeffs, f.nodes, f.dim, *plan, true);
  return u;
}

template <typename Scalar>
NodalField<Scalar> to_nodal(const SpectralField<Scalar>& u) {
  NodalField<Scalar> f;
  f.dim = u.dim;
  f.nodes = u.modes;
  f.values = u.coeffs;
  auto plan = cosine_plan<Scalar>(u.modes);
  detail::transform_cube(f.values, u.modes, u.dim, *plan, false);
  return f;
}

/// Multiply mode k by exp(-(rho lambda_k^2 + qtilde lambda_k) t).
template <typename Scalar>
SpectralField<Scalar> semigroup_apply(const SpectralField<Scalar>& u, Scalar t,
                                      const OperatorSpec& op) {
  if (t < Scalar(0)) throw std::domain_error("semigroup_apply: t must be >= 0");
  const auto lam = lambda_lattice(u.modes, u.dim).template cast<Scalar>().eval();
  SpectralField<Scalar> out = u;
  out.coeffs = u.coeffs * (-(Scalar(op.rho) * lam.square() + Scalar(op.qtilde) * lam) * t).exp();
  return out;
}

/// Embed an n^d coefficient cube into the low-frequency corner of an m^d cube
/// (m >= n); the companion extract truncates back.
template <typename Scalar>
void pad_coeffs(const SpectralField<Scalar>& src, SpectralField<Scalar>& dst, int m) {
  dst.dim = src.dim;
  dst.modes = m;
  dst.coeffs = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(pow_int(m, src.dim));
  const int n = src.modes;
  const std::int64_t rows = pow_int(n, src.dim - 1);
  std::array<int, 3> idx{0, 0, 0};
  for (std::int64_t r = 0; r < rows; ++r) {
    std::int64_t off = 0;
    for (int i = 0; i < src.dim - 1; ++i) off = off * m + idx[i];
    dst.coeffs.segment(off * m, n) = src.coeffs.segment(r * n, n);
    for (int i = src.dim - 2; i >= 0; --i) {
      if (++idx[i] < n) break;
      idx[i] = 0;
    }
  }
}

template <typename Scalar>
void truncate_coeffs(const SpectralField<Scalar>& src, SpectralField<Scalar>& dst, int n) {
  dst.dim = src.dim;
  dst.modes = n;
  dst.coeffs.resize(pow_int(n, src.dim));
  const int m = src.modes;
  const std::int64_t rows = pow_int(n, src.dim - 1);
  std::array<int, 3> idx{0, 0, 0};
  for (std::int64_t r = 0; r < rows; ++r) {
    std::int64_t off = 0;
    for (int i = 0; i < src.dim - 1; ++i) off = off * m + idx[i];
    dst.coeffs.segment(r * n, n) = src.coeffs.segment(off * m, n);
    for (int i = src.dim - 2; i >= 0; --i) {
      if (++idx[i] < n) break;
      idx[i] = 0;
    }
  }
}

/// Quadrature L^q norm on the field's own midpoint grid.
template <typename Scalar>
Scalar nodal_lq_norm(const NodalField<Scalar>& f, double q) {
  const Scalar cell = std::pow(f.spacing(), Scalar(f.dim));
  return std::pow(cell * f.values.abs().pow(Scalar(q)).sum(), Scalar(1) / Scalar(q));
}

}  // namespace chac
