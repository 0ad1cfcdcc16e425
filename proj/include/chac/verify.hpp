#pragma once

#include <optional>
#include <vector>

#include "chac/check.hpp"
#include "chac/spectral.hpp"

namespace chac {

struct GreenVerifyOptions {
  std::vector<int> dims = {1, 2};
  double t_lo = 1e-3;
  double t_hi = 1e-1;
  int t_points = 10;
  double exponent_tol_order0 = 0.05;
  double exponent_tol_time = 0.10;
  double exponent_tol_space_deriv = 0.12;
  double violation_tol = 0.05;
  std::optional<double> force_c2;  // falsifiability knob
  OperatorSpec op;
};

/// Every kernel check: pointwise bounds with fit-then-check constants, the
/// scaling identity, composition identities, increment-integral exponents,
/// symmetry/positivity and the initial-value contraction.
std::vector<CheckRecord> green_verify_suite(const GreenVerifyOptions& opt);

}  // namespace chac
