#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "chac/sim.hpp"

namespace chac {

/// Lag-indexed second moments E|delta_h u|^2 with a log-log least-squares fit.
/// estimate = slope/2 is the Holder-exponent estimate; the confidence
/// half-width comes from a path bootstrap at the 95% level.
struct StructureFunction {
  std::vector<double> lags;
  std::vector<double> moments;
  int diff_order = 1;
  double fitted_slope = 0.0;
  double estimate = 0.0;
  double ci_halfwidth = 0.0;
  bool flagged = false;
  std::string flag_reason;
};

/// Spatial structure function across paths at a fixed time.  Second
/// differences are the d=1 default (exponents may exceed 1); increments use
/// the even reflection of the cosine extension at the boundaries.
StructureFunction holder_space(const std::vector<SpectralFieldd>& fields_at_t,
                               int diff_order, const std::vector<int>& lag_cells,
                               std::uint64_t bootstrap_seed = 1);

/// Temporal structure function from per-path probe series (rows = step index).
StructureFunction holder_time(const std::vector<Eigen::MatrixXd>& probe_series,
                              double step_dt, const std::vector<int>& lag_steps,
                              int base_start, std::uint64_t bootstrap_seed = 1);

/// Per-mode variance of axis-0 coefficients against the Ito-isometry closed
/// form Var u_k(t) = (1 - e^{-2 omega_k t}) / (2 omega_k)  (t for the zero mode).
struct SpectralDecayReport {
  std::vector<double> lambda;
  std::vector<double> empirical;
  std::vector<double> theoretical;
  double slope_vs_lambda = 0.0;  // fitted over saturated modes
  double max_ratio_err = 0.0;    // max |emp/theory - 1| over modes 1..k_check
};

/// fit_k_max bounds the log-log slope fit to modes the time discretization
/// resolves (omega_k dt small); 0 fits every saturated mode.
SpectralDecayReport spectral_decay(const std::vector<SpectralFieldd>& fields_at_t,
                                   double t, const OperatorSpec& op, int k_check,
                                   int fit_k_max = 0);

/// Moment growth of the stochastic convolution against the cut-off level:
/// slope of log E||L(u_n)||_inf^{2p} vs log n.
struct MomentReport {
  std::vector<double> levels;
  std::vector<double> moments;
  double slope = 0.0;
  double p = 1.0;
  bool flagged = false;
  std::string flag_reason;
};

MomentReport supnorm_moments(const SimConfig& base, const std::vector<double>& levels,
                             double p, int workers);

/// Associative per-path summary accumulator for Monte-Carlo drivers.
struct PathStats {
  std::int64_t count = 0;
  std::int64_t blowups = 0;
  std::int64_t frozen = 0;
  std::vector<double> stopping_times;
  Eigen::ArrayXd coeff_sum, coeff_sumsq;  // over final snapshots
  double max_norm_q = 0.0;
  double sup_conv = 0.0;

  void absorb(const Trajectory& traj);
  void merge(const PathStats& other);
  Eigen::ArrayXd mode_variance() const;
};

double least_squares_slope(const std::vector<double>& logx,
                           const std::vector<double>& logy);

}  // namespace chac
