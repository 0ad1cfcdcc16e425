#pragma once

#include <Eigen/Core>

#include <array>
#include <cassert>
#include <cstdint>

namespace chac {

/// Multi-index k in N^d addressing the tensor cosine basis. Flat storage is
/// row-major over (k_0, ..., k_{d-1}) on an n^d lattice.
struct MultiIndex {
  std::array<int, 3> k{0, 0, 0};
  int dim = 1;

  double lambda() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += double(k[i]) * double(k[i]);
    return s;
  }

  bool is_zero() const {
    for (int i = 0; i < dim; ++i)
      if (k[i] != 0) return false;
    return true;
  }
};

inline std::int64_t pow_int(int base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

inline MultiIndex unflatten_index(std::int64_t flat, int n, int dim) {
  MultiIndex m;
  m.dim = dim;
  for (int i = dim - 1; i >= 0; --i) {
    m.k[i] = int(flat % n);
    flat /= n;
  }
  return m;
}

inline std::int64_t flatten_index(const MultiIndex& m, int n) {
  std::int64_t f = 0;
  for (int i = 0; i < m.dim; ++i) f = f * n + m.k[i];
  return f;
}

/// lambda_k = sum_i k_i^2 for every lattice point, in flat row-major order.
inline Eigen::ArrayXd lambda_lattice(int n, int dim) {
  const std::int64_t total = pow_int(n, dim);
  Eigen::ArrayXd lam(total);
  std::array<int, 3> k{0, 0, 0};
  for (std::int64_t f = 0; f < total; ++f) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += double(k[i]) * double(k[i]);
    lam[f] = s;
    for (int i = dim - 1; i >= 0; --i) {
      if (++k[i] < n) break;
      k[i] = 0;
    }
  }
  return lam;
}

}  // namespace chac
