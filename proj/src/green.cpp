#include "chac/green.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chac {

namespace {

constexpr double kPi = std::numbers::pi;

// Per-axis factor table for the eigen-sum: tab[k] = A_k(x) * eps_k(y) where A
// is eps, eps', or eps'' depending on the derivative order on the x side.
std::vector<double> axis_table(int trunc, double x, double y, int deriv_order) {
  std::vector<double> tab(trunc);
  for (int k = 0; k < trunc; ++k) {
    double ax;
    if (k == 0) {
      ax = deriv_order == 0 ? 1.0 / std::sqrt(kPi) : 0.0;
    } else {
      const double amp = std::sqrt(2.0 / kPi);
      switch (deriv_order) {
        case 0: ax = amp * std::cos(k * x); break;
        case 1: ax = -amp * double(k) * std::sin(k * x); break;
        default: ax = -amp * double(k) * double(k) * std::cos(k * x); break;
      }
    }
    tab[k] = ax * basis_eval_1d(k, y);
  }
  return tab;
}

struct DerivPlan {
  std::array<int, 3> order{0, 0, 0};  // per-axis derivative order on the x side
  bool time_factor = false;           // multiply by -omega_k
  bool laplacian_factor = false;      // multiply by -lambda_k
};

DerivPlan plan_for(GreenDeriv deriv, int dim) {
  DerivPlan p;
  switch (deriv) {
    case GreenDeriv::none: break;
    case GreenDeriv::dx1: p.order[0] = 1; break;
    case GreenDeriv::dxx1: p.order[0] = 2; break;
    case GreenDeriv::dx1dx2:
      if (dim < 2) throw std::invalid_argument("mixed derivative needs dim >= 2");
      p.order[0] = 1;
      p.order[1] = 1;
      break;
    case GreenDeriv::time: p.time_factor = true; break;
    case GreenDeriv::laplacian: p.laplacian_factor = true; break;
  }
  return p;
}

}  // namespace

int suggest_truncation(double t, const OperatorSpec& op) {
  if (t <= 0.0) throw std::domain_error("suggest_truncation: t must be positive");
  int k = 1;
  while (op.rho * std::pow(double(k), 4.0) * t <= 30.0 && k < 100000) ++k;
  return k;
}

bool truncation_tail_ok(int trunc, double t, const OperatorSpec& op) {
  return op.rho * std::pow(double(trunc), 4.0) * t > 27.6;  // e^{-27.6} ~ 1e-12
}

double green_eval(std::span<const double> x, std::span<const double> y, double t,
                  int trunc, const OperatorSpec& op, GreenDeriv deriv) {
  if (t <= 0.0) throw std::domain_error("green_eval: kernel is singular at t <= 0");
  const int dim = int(x.size());
  if (int(y.size()) != dim || dim < 1 || dim > 3)
    throw std::invalid_argument("green_eval: bad point dimensions");
  const DerivPlan dp = plan_for(deriv, dim);

  std::array<std::vector<double>, 3> tab;
  for (int i = 0; i < dim; ++i) tab[i] = axis_table(trunc, x[i], y[i], dp.order[i]);

  double sum = 0.0;
  std::array<int, 3> k{0, 0, 0};
  const std::int64_t total = pow_int(trunc, dim);
  for (std::int64_t f = 0; f < total; ++f) {
    double lam = 0.0, prod = 1.0;
    for (int i = 0; i < dim; ++i) {
      lam += double(k[i]) * double(k[i]);
      prod *= tab[i][k[i]];
    }
    if (prod != 0.0) {
      double term = std::exp(-op.omega(lam) * t) * prod;
      if (dp.time_factor) term *= -op.omega(lam);
      if (dp.laplacian_factor) term *= -lam;
      sum += term;
    }
    for (int i = dim - 1; i >= 0; --i) {
      if (++k[i] < trunc) break;
      k[i] = 0;
    }
  }
  return sum;
}

namespace {

// Coefficient cube c_k = w(lambda_k) e^{-omega_k t} eps_k(x), so that
// to_nodal(c) tabulates z -> sum_k w e^{-omega t} eps_k(x) eps_k(z).
SpectralFieldd kernel_coefficients(std::span<const double> x, double t, int trunc,
                                   int grid, const OperatorSpec& op, bool laplacian) {
  const int dim = int(x.size());
  SpectralFieldd c = SpectralFieldd::zero(grid, dim);
  std::array<int, 3> k{0, 0, 0};
  const std::int64_t total = pow_int(trunc, dim);
  for (std::int64_t f = 0; f < total; ++f) {
    double lam = 0.0, prod = 1.0;
    for (int i = 0; i < dim; ++i) {
      lam += double(k[i]) * double(k[i]);
      prod *= basis_eval_1d(k[i], x[i]);
    }
    double v = std::exp(-op.omega(lam) * t) * prod;
    if (laplacian) v *= -lam;
    MultiIndex m;
    m.dim = dim;
    m.k = k;
    c.coeffs[flatten_index(m, grid)] = v;
    for (int i = dim - 1; i >= 0; --i) {
      if (++k[i] < trunc) break;
      k[i] = 0;
    }
  }
  return c;
}

}  // namespace

double green_compose(std::span<const double> x, std::span<const double> y, double t,
                     double s, bool with_laplacian, const OperatorSpec& op,
                     double rel_tol) {
  if (!(s > 0.0 && s < t)) throw std::domain_error("green_compose: need 0 < s < t");
  const int dim = int(x.size());
  const int k1 = suggest_truncation(t - s, op);
  const int k2 = suggest_truncation(s, op);
  int grid = 16;
  while (grid < std::max(k1, k2)) grid *= 2;

  double prev = 0.0;
  bool have_prev = false;
  for (;;) {
    const NodalFieldd gx = to_nodal(kernel_coefficients(x, t - s, k1, grid, op, false));
    const NodalFieldd gy = to_nodal(kernel_coefficients(y, s, k2, grid, op, with_laplacian));
    const double cell = std::pow(kPi / grid, dim);
    const double val = cell * (gx.values * gy.values).sum();
    if (have_prev &&
        std::abs(val - prev) <= rel_tol * std::max({std::abs(val), std::abs(prev), 1e-30}))
      return val;
    if (std::int64_t(grid) * 2 > (dim == 1 ? 65536 : (dim == 2 ? 1024 : 128))) return val;
    prev = val;
    have_prev = true;
    grid *= 2;
  }
}

SpectralFieldd convolve_initial(const SpectralFieldd& u0, double t, const OperatorSpec& op) {
  return semigroup_apply(u0, t, op);
}

SpectralFieldd convolve_initial(const NodalFieldd& u0, double t, const OperatorSpec& op) {
  return semigroup_apply(to_spectral(u0), t, op);
}

namespace {

// sum over the k-lattice minus the origin of term(lambda, eps-products)
template <typename Fn>
double lattice_sum(int dim, int trunc, Fn&& term) {
  double sum = 0.0;
  std::array<int, 3> k{0, 0, 0};
  const std::int64_t total = pow_int(trunc, dim);
  for (std::int64_t f = 1; f < total; ++f) {
    for (int i = dim - 1; i >= 0; --i) {
      if (++k[i] < trunc) break;
      k[i] = 0;
    }
    double lam = 0.0;
    for (int i = 0; i < dim; ++i) lam += double(k[i]) * double(k[i]);
    sum += term(k, lam);
  }
  return sum;
}

}  // namespace

double space_increment_integral(std::span<const double> x, std::span<const double> y,
                                double t, int trunc, const OperatorSpec& op) {
  const int dim = int(x.size());
  return lattice_sum(dim, trunc, [&](const std::array<int, 3>& k, double lam) {
    double ex = 1.0, ey = 1.0;
    for (int i = 0; i < dim; ++i) {
      ex *= basis_eval_1d(k[i], x[i]);
      ey *= basis_eval_1d(k[i], y[i]);
    }
    const double om = op.omega(lam);
    const double d = ex - ey;
    return d * d * (1.0 - std::exp(-2.0 * om * t)) / (2.0 * om);
  });
}

double time_increment_integral(std::span<const double> x, double t, double s, int trunc,
                               const OperatorSpec& op) {
  if (!(t >= s && s >= 0.0)) throw std::domain_error("time_increment_integral: need t >= s >= 0");
  const int dim = int(x.size());
  const double tau = t - s;
  return lattice_sum(dim, trunc, [&](const std::array<int, 3>& k, double lam) {
    double ex = 1.0;
    for (int i = 0; i < dim; ++i) ex *= basis_eval_1d(k[i], x[i]);
    const double om = op.omega(lam);
    const double v = std::exp(-2.0 * om * tau) - std::exp(-2.0 * om * t) -
                     2.0 * std::exp(-om * tau) + 2.0 * std::exp(-om * (t + s)) + 1.0 -
                     std::exp(-2.0 * om * s);
    return ex * ex * v / (2.0 * om);
  });
}

double tail_increment_integral(std::span<const double> x, double t, double s, int trunc,
                               const OperatorSpec& op) {
  if (!(t >= s && s >= 0.0)) throw std::domain_error("tail_increment_integral: need t >= s >= 0");
  const int dim = int(x.size());
  const double tau = t - s;
  const double zero_mode = tau / std::pow(kPi, dim);
  return zero_mode + lattice_sum(dim, trunc, [&](const std::array<int, 3>& k, double lam) {
           double ex = 1.0;
           for (int i = 0; i < dim; ++i) ex *= basis_eval_1d(k[i], x[i]);
           const double om = op.omega(lam);
           return ex * ex * (1.0 - std::exp(-2.0 * om * tau)) / (2.0 * om);
         });
}

namespace {

double adaptive_simpson(double (*f)(double, void*), void* ctx, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm, ctx), frm = f(rm, ctx);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

struct RadialCtx {
  double a;
  int dim;
};

double radial_integrand(double r, void* ctx) {
  const auto* c = static_cast<const RadialCtx*>(ctx);
  return std::pow(r, c->dim - 1) * std::exp(-c->a * std::pow(r, 4.0 / 3.0));
}

}  // namespace

double exp_integral(double c, double t, int dim, double rel_tol) {
  if (c <= 0.0 || t <= 0.0) throw std::domain_error("exp_integral: need c > 0, t > 0");
  const double a = c * std::pow(t, -1.0 / 3.0);
  const double radius = std::pow(60.0 / a, 0.75) + 1.0;
  RadialCtx ctx{a, dim};
  // composite pass fixes the tolerance scale; the peak can hide from a
  // single 3-point estimate
  double scale = 0.0;
  const int panels = 64;
  for (int i = 0; i < panels; ++i) {
    const double lo = radius * i / panels, hi = radius * (i + 1) / panels;
    scale += (hi - lo) / 6.0 *
             (radial_integrand(lo, &ctx) + 4.0 * radial_integrand(0.5 * (lo + hi), &ctx) +
              radial_integrand(hi, &ctx));
  }
  const double fa = radial_integrand(0.0, &ctx);
  const double fb = radial_integrand(radius, &ctx);
  const double fm = radial_integrand(0.5 * radius, &ctx);
  const double whole = radius / 6.0 * (fa + 4.0 * fm + fb);
  const double radial =
      adaptive_simpson(radial_integrand, &ctx, 0.0, radius, fa, fm, fb, whole,
                       rel_tol * std::max(std::abs(scale), 1e-300), 30);
  const double surface = dim == 1 ? 2.0 : (dim == 2 ? 2.0 * kPi : 4.0 * kPi);
  return surface * radial;
}

namespace {

struct PairGrid {
  std::vector<std::array<double, 3>> xs, ys;  // matched pairs
  std::vector<double> sep;                    // |x-y|
};

// Pairs spanning separations from 0 to ~2, split by parity into a coarse fit
// set and a fine held-out set.  The corner base point carries the sup of the
// kernel (every cosine equals one there).
PairGrid make_pairs(int dim, bool coarse) {
  PairGrid g;
  const int nbase = 5;
  const int noff = 12;
  const double invsqrt = 1.0 / std::sqrt(double(dim));
  for (int b = 0; b < nbase; ++b) {
    std::array<double, 3> x{0, 0, 0};
    for (int i = 0; i < dim; ++i)
      x[i] = b == 0 ? 0.0 : kPi * (0.12 + 0.76 * double(b - 1) / (nbase - 2));
    for (int o = 0; o <= noff; ++o) {
      if ((o % 2 == 0) != coarse) continue;
      double r = o == 0 ? 0.0 : 0.04 * std::pow(2.2 / 0.04, double(o - 1) / (noff - 1));
      std::array<double, 3> y = x;
      bool inside = true;
      for (int i = 0; i < dim; ++i) {
        y[i] = x[i] + r * invsqrt;
        if (y[i] > kPi) inside = false;
      }
      if (!inside) continue;
      g.xs.push_back(x);
      g.ys.push_back(y);
      g.sep.push_back(r);
    }
  }
  return g;
}

double ls_slope(std::span<const double> lx, std::span<const double> ly) {
  const int n = int(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = n * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

double deriv_time_power(GreenDeriv deriv, int dim) {
  switch (deriv) {
    case GreenDeriv::none: return dim / 4.0;
    case GreenDeriv::dx1: return (dim + 1) / 4.0;
    case GreenDeriv::dxx1:
    case GreenDeriv::dx1dx2: return (dim + 2) / 4.0;
    case GreenDeriv::time: return (dim + 4) / 4.0;
    case GreenDeriv::laplacian: return (dim + 2) / 4.0;
  }
  return dim / 4.0;
}

}  // namespace

KernelBoundFit verify_pointwise_bounds(int dim, GreenDeriv deriv,
                                       std::span<const double> t_grid,
                                       const OperatorSpec& op,
                                       std::optional<double> forced_c2) {
  KernelBoundFit fit;
  const double p = deriv_time_power(deriv, dim);
  const PairGrid coarse = make_pairs(dim, true);
  const PairGrid fine = make_pairs(dim, false);

  // regression of the sup against t
  std::vector<double> lt, lsup;
  std::vector<double> xi_c, yy_c;  // coarse cloud for the (c1, c2) fit
  for (double t : t_grid) {
    const int trunc = suggest_truncation(t, op);
    double sup = 0.0;
    auto sweep = [&](const PairGrid& g, bool collect) {
      for (std::size_t i = 0; i < g.xs.size(); ++i) {
        const double v = std::abs(green_eval({g.xs[i].data(), size_t(dim)},
                                             {g.ys[i].data(), size_t(dim)}, t, trunc, op,
                                             deriv));
        sup = std::max(sup, v);
        if (collect && v > 1e-280) {
          xi_c.push_back(std::pow(g.sep[i], 4.0 / 3.0) * std::pow(t, -1.0 / 3.0));
          yy_c.push_back(std::log(v) + p * std::log(t));
        }
      }
    };
    sweep(coarse, true);
    sweep(fine, false);
    lt.push_back(std::log(t));
    lsup.push_back(std::log(std::max(sup, 1e-300)));
  }
  fit.exponent_fit = ls_slope(lt, lsup);

  // c1 always comes from the regression fit of c2 on the coarse cloud; a
  // forced c2 only replaces the decay constant in the check stage, so the
  // claimed bound is falsifiable.
  const double c2_fit = std::max(1e-3, -ls_slope(xi_c, yy_c));
  double log_c1 = -1e300;
  for (std::size_t i = 0; i < xi_c.size(); ++i)
    log_c1 = std::max(log_c1, yy_c[i] + c2_fit * xi_c[i]);
  fit.c1 = std::exp(log_c1);
  const double c2 = forced_c2.value_or(c2_fit);
  fit.c2 = c2;
  fit.fitted = true;

  double viol = 0.0;
  for (double t : t_grid) {
    const int trunc = suggest_truncation(t, op);
    for (std::size_t i = 0; i < fine.xs.size(); ++i) {
      const double v = std::abs(green_eval({fine.xs[i].data(), size_t(dim)},
                                           {fine.ys[i].data(), size_t(dim)}, t, trunc, op,
                                           deriv));
      const double xi = std::pow(fine.sep[i], 4.0 / 3.0) * std::pow(t, -1.0 / 3.0);
      const double bound = fit.c1 * std::pow(t, -p) * std::exp(-c2 * xi);
      if (bound > 0.0) viol = std::max(viol, v / bound);
    }
  }
  fit.max_violation = viol;
  return fit;
}

IncrementExponents verify_increment_integrals(int dim, const OperatorSpec& op) {
  IncrementExponents out;
  const int trunc = 400;
  std::array<double, 3> x{kPi / 3.0, kPi / 3.0, kPi / 3.0};
  const double t = 0.1;

  std::vector<double> lh, li;
  for (int j = 0; j < 6; ++j) {
    const double h = 0.005 * std::pow(2.0, j);
    std::array<double, 3> y = x;
    for (int i = 0; i < dim; ++i) y[i] += h / std::sqrt(double(dim));
    const double v = space_increment_integral({x.data(), size_t(dim)},
                                              {y.data(), size_t(dim)}, t, trunc, op);
    lh.push_back(std::log(h));
    li.push_back(std::log(v));
  }
  out.space_slope = ls_slope(lh, li);

  std::vector<double> ltau, l5, l6;
  const double s = 0.05;
  for (int j = 0; j < 6; ++j) {
    const double tau = 2e-4 * std::pow(2.0, j);
    const double v5 = time_increment_integral({x.data(), size_t(dim)}, s + tau, s, trunc, op);
    const double v6 = tail_increment_integral({x.data(), size_t(dim)}, s + tau, s, trunc, op);
    ltau.push_back(std::log(tau));
    l5.push_back(std::log(v5));
    l6.push_back(std::log(v6));
  }
  out.time5_slope = ls_slope(ltau, l5);
  out.time6_slope = ls_slope(ltau, l6);
  out.converged = true;
  return out;
}

}  // namespace chac
