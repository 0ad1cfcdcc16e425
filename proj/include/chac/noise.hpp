#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "chac/field.hpp"
#include "chac/philox.hpp"

namespace chac {

/// Noise diffusion sigma with sub-linear growth |sigma(u)| <= C (1 + |u|^alpha).
/// The default smooth form C (1 + u^2)^{alpha/2} is globally Lipschitz, which
/// the constant and interpolated-table forms preserve.
struct SigmaSpec {
  enum class Form { sublinear, constant, table };
  Form form = Form::sublinear;
  double alpha = 0.1;
  double c = 1.0;
  // table form: piecewise-linear through (u, sigma) knots, clamped outside
  std::vector<double> table_u, table_v;

  bool is_zero() const { return form == Form::constant && c == 0.0; }
};

double sigma_eval(double u, const SigmaSpec& spec);

struct SigmaValidation {
  bool growth_ok = false;     // |sigma| <= C (1 + |u|^alpha) on the lattice
  double lipschitz = 0.0;     // max slope observed on the lattice
  double max_growth_ratio = 0.0;
};

/// Check the growth and Lipschitz invariants on a lattice over [-span, span].
SigmaValidation validate_sigma(const SigmaSpec& spec, double span = 100.0,
                               int points = 4001);

/// Cut-off chi_n: 1 below n, 0 above n+1, smoothstep bridge in between.
/// |chi'| <= 3/2, within the required bound of 2.
struct CutoffSpec {
  double level = 8.0;  // n
  double q = 4.0;      // norm index the cut-off is applied to
  bool enabled = true;
};

double cutoff_eval(double x, const CutoffSpec& spec);
double cutoff_derivative(double x, const CutoffSpec& spec);

/// One Walsh increment of space-time white noise on the nodal grid:
/// iid N(0, dt / h^d) per node, reproducible from (seed, path, step).
struct NoiseIncrement {
  Eigen::ArrayXd nodal;
  double dt = 0.0;
  std::uint64_t seed = 0, path = 0, step = 0;
};

NoiseIncrement sample_noise(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                            int nodes, int dim, double dt);

}  // namespace chac
