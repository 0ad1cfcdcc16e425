#include "chac/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chac {

double sigma_eval(double u, const SigmaSpec& spec) {
  switch (spec.form) {
    case SigmaSpec::Form::constant:
      return spec.c;
    case SigmaSpec::Form::sublinear:
      return spec.c * std::pow(1.0 + u * u, 0.5 * spec.alpha);
    case SigmaSpec::Form::table: {
      if (spec.table_u.empty()) throw std::invalid_argument("sigma table is empty");
      const auto& xs = spec.table_u;
      const auto& ys = spec.table_v;
      if (u <= xs.front()) return ys.front();
      if (u >= xs.back()) return ys.back();
      const auto it = std::upper_bound(xs.begin(), xs.end(), u);
      const std::size_t i = std::size_t(it - xs.begin());
      const double w = (u - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return (1.0 - w) * ys[i - 1] + w * ys[i];
    }
  }
  return 0.0;
}

SigmaValidation validate_sigma(const SigmaSpec& spec, double span, int points) {
  SigmaValidation out;
  double prev_u = -span, prev_v = sigma_eval(-span, spec);
  double lip = 0.0, ratio = 0.0;
  for (int i = 0; i < points; ++i) {
    const double u = -span + 2.0 * span * double(i) / double(points - 1);
    const double v = sigma_eval(u, spec);
    const double bound = spec.c * (1.0 + std::pow(std::abs(u), spec.alpha));
    if (bound > 0.0) ratio = std::max(ratio, std::abs(v) / bound);
    if (i > 0 && u > prev_u) lip = std::max(lip, std::abs(v - prev_v) / (u - prev_u));
    prev_u = u;
    prev_v = v;
  }
  out.lipschitz = lip;
  out.max_growth_ratio = ratio;
  out.growth_ok = ratio <= 1.0 + 1e-12;
  return out;
}

namespace {
// smoothstep s(t) = 3t^2 - 2t^3 on [0,1]
double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }
}  // namespace

double cutoff_eval(double x, const CutoffSpec& spec) {
  if (!spec.enabled) return 1.0;
  const double n = spec.level;
  if (x <= n) return 1.0;
  if (x >= n + 1.0) return 0.0;
  return 1.0 - smoothstep(x - n);
}

double cutoff_derivative(double x, const CutoffSpec& spec) {
  if (!spec.enabled) return 0.0;
  const double n = spec.level;
  if (x <= n || x >= n + 1.0) return 0.0;
  const double t = x - n;
  return -6.0 * t * (1.0 - t);
}

NoiseIncrement sample_noise(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                            int nodes, int dim, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("sample_noise: dt must be positive");
  if (nodes < 1 || dim < 1 || dim > 3)
    throw std::invalid_argument("sample_noise: bad grid spec");
  NoiseIncrement inc;
  inc.dt = dt;
  inc.seed = seed;
  inc.path = path;
  inc.step = step;
  const double h = std::numbers::pi / double(nodes);
  const double sd = std::sqrt(dt / std::pow(h, dim));
  const std::int64_t total = pow_int(nodes, dim);
  inc.nodal.resize(total);
  GaussianStream g(seed, /*stream=*/1, path, step);
  for (std::int64_t i = 0; i < total; ++i) inc.nodal[i] = sd * g.next();
  return inc;
}

}  // namespace chac
