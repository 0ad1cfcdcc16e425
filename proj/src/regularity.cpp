#include "chac/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "chac/philox.hpp"

namespace chac {

double least_squares_slope(const std::vector<double>& logx,
                           const std::vector<double>& logy) {
  const std::size_t n = logx.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += logx[i];
    sy += logy[i];
    sxx += logx[i] * logx[i];
    sxy += logx[i] * logy[i];
  }
  const double denom = double(n) * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (double(n) * sxy - sx * sy) / denom;
}

namespace {

// even reflection of a midpoint-grid index (period 2n)
inline std::int64_t reflect(std::int64_t i, std::int64_t n) {
  std::int64_t j = i % (2 * n);
  if (j < 0) j += 2 * n;
  return j < n ? j : 2 * n - 1 - j;
}

// per-path lag moments -> (mean curve, bootstrap slope CI)
struct FitResult {
  std::vector<double> moments;
  double slope = 0.0;
  double ci = 0.0;
};

FitResult fit_with_bootstrap(const std::vector<std::vector<double>>& per_path,
                             const std::vector<double>& lags, std::uint64_t seed) {
  const std::size_t paths = per_path.size();
  const std::size_t nl = lags.size();
  std::vector<double> lx(nl);
  for (std::size_t i = 0; i < nl; ++i) lx[i] = std::log(lags[i]);

  auto fit_mean = [&](const std::vector<std::size_t>& idx, std::vector<double>* curve) {
    std::vector<double> mean(nl, 0.0), ly(nl);
    for (std::size_t p : idx)
      for (std::size_t i = 0; i < nl; ++i) mean[i] += per_path[p][i];
    for (std::size_t i = 0; i < nl; ++i) {
      mean[i] /= double(idx.size());
      ly[i] = std::log(std::max(mean[i], 1e-300));
    }
    if (curve) *curve = mean;
    return least_squares_slope(lx, ly);
  };

  FitResult res;
  std::vector<std::size_t> all(paths);
  for (std::size_t p = 0; p < paths; ++p) all[p] = p;
  res.slope = fit_mean(all, &res.moments);

  const int B = 200;
  std::vector<double> slopes;
  slopes.reserve(B);
  std::vector<std::size_t> idx(paths);
  std::uint64_t draw = 0;
  auto uniform_index = [&]() {
    const auto w = philox4x64({draw++, 0, 0, 2}, {seed, 0});
    return std::size_t((w[0] >> 11) % std::uint64_t(paths));
  };
  for (int b = 0; b < B; ++b) {
    for (std::size_t p = 0; p < paths; ++p) idx[p] = uniform_index();
    slopes.push_back(fit_mean(idx, nullptr));
  }
  std::sort(slopes.begin(), slopes.end());
  const auto q = [&](double a) {
    return slopes[std::min(slopes.size() - 1, std::size_t(a * double(slopes.size())))];
  };
  res.ci = 0.5 * (q(0.975) - q(0.025));
  return res;
}

}  // namespace

StructureFunction holder_space(const std::vector<SpectralFieldd>& fields_at_t,
                               int diff_order, const std::vector<int>& lag_cells,
                               std::uint64_t bootstrap_seed) {
  StructureFunction sf;
  sf.diff_order = diff_order;
  if (fields_at_t.empty()) throw std::invalid_argument("holder_space: no fields");
  const int dim = fields_at_t.front().dim;
  const std::int64_t n = fields_at_t.front().modes;
  const double h0 = std::numbers::pi / double(n);
  for (int m : lag_cells) sf.lags.push_back(m * h0);

  std::vector<std::vector<double>> per_path;
  per_path.reserve(fields_at_t.size());
  for (const auto& u : fields_at_t) {
    const NodalFieldd nod = to_nodal(u);
    std::vector<double> row;
    row.reserve(lag_cells.size());
    const std::int64_t planes = pow_int(int(n), dim - 1);
    for (int m : lag_cells) {
      double acc = 0.0;
      std::int64_t cnt = 0;
      // differences along the last axis of every 1-d line; reflection closes
      // the stencil at the boundaries
      for (std::int64_t pl = 0; pl < planes; ++pl) {
        const double* line = nod.values.data() + pl * n;
        for (std::int64_t i = 0; i < n; ++i) {
          const double up = line[reflect(i + m, n)];
          double d;
          if (diff_order == 2) {
            d = up - 2.0 * line[i] + line[reflect(i - m, n)];
          } else {
            d = up - line[i];
          }
          acc += d * d;
          ++cnt;
        }
      }
      row.push_back(acc / double(cnt));
    }
    per_path.push_back(std::move(row));
  }

  const FitResult fit = fit_with_bootstrap(per_path, sf.lags, bootstrap_seed);
  sf.moments = fit.moments;
  sf.fitted_slope = fit.slope;
  sf.estimate = 0.5 * fit.slope;
  sf.ci_halfwidth = 0.5 * fit.ci;
  if (fields_at_t.size() < 32) {
    sf.flagged = true;
    sf.flag_reason = "fewer than 32 paths";
  }
  if (lag_cells.size() < 4) {
    sf.flagged = true;
    sf.flag_reason = "fewer than 4 lags";
  }
  return sf;
}

StructureFunction holder_time(const std::vector<Eigen::MatrixXd>& probe_series,
                              double step_dt, const std::vector<int>& lag_steps,
                              int base_start, std::uint64_t bootstrap_seed) {
  StructureFunction sf;
  sf.diff_order = 1;
  if (probe_series.empty()) throw std::invalid_argument("holder_time: no series");
  const int rows = int(probe_series.front().rows());
  for (int j : lag_steps) sf.lags.push_back(j * step_dt);

  std::vector<std::vector<double>> per_path;
  per_path.reserve(probe_series.size());
  for (const auto& ser : probe_series) {
    std::vector<double> row;
    row.reserve(lag_steps.size());
    for (int j : lag_steps) {
      double acc = 0.0;
      std::int64_t cnt = 0;
      for (int m = base_start; m + j < rows; ++m) {
        for (int pcol = 0; pcol < ser.cols(); ++pcol) {
          const double d = ser(m + j, pcol) - ser(m, pcol);
          acc += d * d;
          ++cnt;
        }
      }
      row.push_back(cnt > 0 ? acc / double(cnt) : 0.0);
    }
    per_path.push_back(std::move(row));
  }

  const FitResult fit = fit_with_bootstrap(per_path, sf.lags, bootstrap_seed);
  sf.moments = fit.moments;
  sf.fitted_slope = fit.slope;
  sf.estimate = 0.5 * fit.slope;
  sf.ci_halfwidth = 0.5 * fit.ci;
  if (probe_series.size() < 32) {
    sf.flagged = true;
    sf.flag_reason = "fewer than 32 paths";
  }
  if (lag_steps.size() < 4) {
    sf.flagged = true;
    sf.flag_reason = "fewer than 4 lags";
  }
  return sf;
}

SpectralDecayReport spectral_decay(const std::vector<SpectralFieldd>& fields_at_t,
                                   double t, const OperatorSpec& op, int k_check,
                                   int fit_k_max) {
  SpectralDecayReport rep;
  if (fields_at_t.empty()) throw std::invalid_argument("spectral_decay: no fields");
  const int n = fields_at_t.front().modes;
  const int dim = fields_at_t.front().dim;
  const std::int64_t stride = pow_int(n, dim - 1);  // flat index of (k, 0, ..., 0)
  const double M = double(fields_at_t.size());

  std::vector<double> lslope_x, lslope_y;
  for (int k = 0; k < n; ++k) {
    double s = 0.0, ss = 0.0;
    for (const auto& u : fields_at_t) {
      const double c = u.coeffs[k * stride];
      s += c;
      ss += c * c;
    }
    const double mean = s / M;
    const double var = (ss / M - mean * mean) * (M / (M - 1.0));
    const double lam = double(k) * double(k);
    const double om = op.omega(lam);
    const double theory = om > 0.0 ? (1.0 - std::exp(-2.0 * om * t)) / (2.0 * om) : t;
    rep.lambda.push_back(lam);
    rep.empirical.push_back(var);
    rep.theoretical.push_back(theory);
    if (k >= 1 && k <= k_check)
      rep.max_ratio_err = std::max(rep.max_ratio_err, std::abs(var / theory - 1.0));
    const bool in_fit_range = fit_k_max <= 0 || k <= fit_k_max;
    if (k >= 1 && 2.0 * om * t > 3.0 && var > 0.0 && in_fit_range) {
      lslope_x.push_back(std::log(lam));
      lslope_y.push_back(std::log(var));
    }
  }
  rep.slope_vs_lambda = least_squares_slope(lslope_x, lslope_y);
  return rep;
}

MomentReport supnorm_moments(const SimConfig& base, const std::vector<double>& levels,
                             double p, int workers) {
  MomentReport rep;
  rep.p = p;
  SimConfig cfg = base;
  cfg.cutoff.enabled = true;
  cfg.track_stochastic_convolution = true;
  std::vector<double> lx, ly;
  for (double n : levels) {
    cfg.cutoff.level = n;
    const auto trajs = run_ensemble(cfg, workers);
    double acc = 0.0;
    for (const auto& tr : trajs) acc += std::pow(tr.sup_conv_abs, 2.0 * p);
    const double moment = acc / double(trajs.size());
    rep.levels.push_back(n);
    rep.moments.push_back(moment);
    lx.push_back(std::log(n));
    ly.push_back(std::log(std::max(moment, 1e-300)));
  }
  rep.slope = least_squares_slope(lx, ly);
  if (base.paths < 32) {
    rep.flagged = true;
    rep.flag_reason = "fewer than 32 paths; confidence widened";
  }
  return rep;
}

void PathStats::absorb(const Trajectory& traj) {
  ++count;
  if (traj.blowup) ++blowups;
  if (traj.frozen) ++frozen;
  if (traj.stopping_time) stopping_times.push_back(*traj.stopping_time);
  for (double v : traj.norm_series) max_norm_q = std::max(max_norm_q, v);
  sup_conv = std::max(sup_conv, traj.sup_conv_abs);
  if (!traj.snapshots.empty()) {
    const auto& c = traj.snapshots.back().coeffs;
    if (coeff_sum.size() == 0) {
      coeff_sum = Eigen::ArrayXd::Zero(c.size());
      coeff_sumsq = Eigen::ArrayXd::Zero(c.size());
    }
    coeff_sum += c;
    coeff_sumsq += c.square();
  }
}

void PathStats::merge(const PathStats& other) {
  count += other.count;
  blowups += other.blowups;
  frozen += other.frozen;
  stopping_times.insert(stopping_times.end(), other.stopping_times.begin(),
                        other.stopping_times.end());
  max_norm_q = std::max(max_norm_q, other.max_norm_q);
  sup_conv = std::max(sup_conv, other.sup_conv);
  if (other.coeff_sum.size() > 0) {
    if (coeff_sum.size() == 0) {
      coeff_sum = other.coeff_sum;
      coeff_sumsq = other.coeff_sumsq;
    } else {
      coeff_sum += other.coeff_sum;
      coeff_sumsq += other.coeff_sumsq;
    }
  }
}

Eigen::ArrayXd PathStats::mode_variance() const {
  if (count < 2 || coeff_sum.size() == 0) return Eigen::ArrayXd();
  const double M = double(count);
  const Eigen::ArrayXd mean = coeff_sum / M;
  return (coeff_sumsq / M - mean.square()) * (M / (M - 1.0));
}

}  // namespace chac
