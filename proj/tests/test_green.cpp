#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "chac/green.hpp"
#include "chac/verify.hpp"

using namespace chac;

namespace {

constexpr double kPi = std::numbers::pi;

// quadrature oracle for int_D g1(z) g2(z) dz on n midpoints (d=1)
template <typename F1, typename F2>
double z_quad(F1&& g1, F2&& g2, int n) {
  const double h = kPi / n;
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double z = kPi * (j + 0.5) / n;
    s += h * g1(z) * g2(z);
  }
  return s;
}

// graded midpoint rule on [a, b] refining toward b
template <typename F>
double graded_time_quad(F&& f, double a, double b, int coarse, int fine) {
  const double split = b - (b - a) / 64.0;
  double s = 0.0;
  for (int j = 0; j < coarse; ++j) {
    const double r = a + (split - a) * (j + 0.5) / coarse;
    s += (split - a) / coarse * f(r);
  }
  for (int j = 0; j < fine; ++j) {
    const double r = split + (b - split) * (j + 0.5) / fine;
    s += (b - split) / fine * f(r);
  }
  return s;
}

}  // namespace

TEST_CASE("green_eval basics: limit, symmetry, mass, domain error") {
  OperatorSpec op;
  const std::vector<double> x{0.7}, y{2.1};

  // only the k = 0 term survives at large t; the k = 1 mode decays like
  // e^{-2t}, so t = 12 brings it below 1e-10
  CHECK(std::abs(green_eval(x, y, 12.0, 8, op) - 1.0 / kPi) < 1e-10);

  const double t = 0.03;
  const int trunc = suggest_truncation(t, op);
  CHECK(truncation_tail_ok(trunc, t, op));
  CHECK(green_eval(x, y, t, trunc, op) ==
        doctest::Approx(green_eval(y, x, t, trunc, op)).epsilon(1e-15));

  // int_D G(x,y,t) dy = 1 by quadrature
  double mass = 0.0;
  const int n = 128;
  for (int j = 0; j < n; ++j) {
    const std::vector<double> yq{kPi * (j + 0.5) / n};
    mass += (kPi / n) * green_eval(x, yq, t, trunc, op);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(green_eval(x, y, 0.0, 8, op), std::domain_error);
  CHECK_THROWS_AS(green_eval(x, y, -1.0, 8, op), std::domain_error);
}

TEST_CASE("composition identities reproduce the kernel") {
  OperatorSpec op;
  const std::vector<double> x{0.9}, y{1.7};
  const double t = 0.02, s = 0.01;
  const int trunc = suggest_truncation(t, op);

  const double plain = green_compose(x, y, t, s, false, op);
  CHECK(std::abs(plain - green_eval(x, y, t, trunc, op)) < 1e-8);

  const double with_lap = green_compose(x, y, t, s, true, op);
  CHECK(std::abs(with_lap - green_eval(x, y, t, trunc, op, GreenDeriv::laplacian)) < 1e-8);

  const double a = green_compose(x, y, t, t / 2.0, false, op);
  const double b = green_compose(x, y, t, t / 3.0, false, op);
  CHECK(std::abs(a - b) < 1e-10);

  CHECK_THROWS_AS(green_compose(x, y, t, 0.0, false, op), std::domain_error);
  CHECK_THROWS_AS(green_compose(x, y, t, t, false, op), std::domain_error);
}

TEST_CASE("exponential integral: scaling ratios and gamma-function oracle") {
  for (int d : {1, 2, 3}) {
    const double i1 = exp_integral(1.0, 1.0, d);
    const double i16 = exp_integral(1.0, 16.0, d);
    CHECK(i16 / i1 == doctest::Approx(std::pow(2.0, d)).epsilon(0.01 * d));

    // closed form S_{d-1} (3/4) Gamma(3d/4) a^{-3d/4}, a = c t^{-1/3}
    const double surface = d == 1 ? 2.0 : (d == 2 ? 2.0 * kPi : 4.0 * kPi);
    const double oracle = surface * 0.75 * std::exp(std::lgamma(0.75 * d));
    CHECK(i1 == doctest::Approx(oracle).epsilon(1e-8));
  }
  // I(t)/t^{3/4} constant across a dyadic sweep, d = 3
  const double base = exp_integral(1.0, 1.0, 3);
  for (double t : {2.0, 4.0, 8.0}) {
    const double c = exp_integral(1.0, t, 3) / std::pow(t, 0.75);
    CHECK(c == doctest::Approx(base).epsilon(0.01));
  }
  CHECK_THROWS_AS(exp_integral(-1.0, 1.0, 1), std::domain_error);
}

TEST_CASE("increment integrals match a brute-force quadrature oracle") {
  OperatorSpec op;
  const int trunc = 16;
  const int nz = 64;
  const std::vector<double> x{1.1}, y{1.4};
  const double t = 0.02, s = 0.012;

  auto Gx = [&](double r) {
    return [&, r](double z) {
      const std::vector<double> zz{z};
      return green_eval(x, zz, r, trunc, op);
    };
  };
  auto Gy = [&](double r) {
    return [&, r](double z) {
      const std::vector<double> zz{z};
      return green_eval(y, zz, r, trunc, op);
    };
  };

  SUBCASE("space increment") {
    const double impl = space_increment_integral(x, y, t, trunc, op);
    auto integrand = [&](double r) {
      auto gx = Gx(t - r);
      auto gy = Gy(t - r);
      auto diff = [&](double z) { return gx(z) - gy(z); };
      return z_quad(diff, diff, nz);
    };
    const double oracle = graded_time_quad(integrand, 0.0, t, 512, 4096);
    CHECK(impl == doctest::Approx(oracle).epsilon(5e-3));
  }

  SUBCASE("moving-time increment") {
    const double impl = time_increment_integral(x, t, s, trunc, op);
    auto integrand = [&](double r) {
      auto g1 = Gx(t - r);
      auto g2 = Gx(s - r);
      auto diff = [&](double z) { return g1(z) - g2(z); };
      return z_quad(diff, diff, nz);
    };
    const double oracle = graded_time_quad(integrand, 0.0, s, 512, 4096);
    CHECK(impl == doctest::Approx(oracle).epsilon(5e-3));
  }

  SUBCASE("tail integral and its empty-interval limit") {
    const double impl = tail_increment_integral(x, t, s, trunc, op);
    auto integrand = [&](double r) {
      auto g = Gx(t - r);
      return z_quad(g, g, nz);
    };
    const double oracle = graded_time_quad(integrand, s, t, 512, 4096);
    CHECK(impl == doctest::Approx(oracle).epsilon(5e-3));
    CHECK(tail_increment_integral(x, t, t, trunc, op) == 0.0);
  }
}

TEST_CASE("pointwise bound fit: exponents, held-out violation, falsifiability") {
  OperatorSpec op;
  std::vector<double> t_grid;
  for (int i = 0; i < 10; ++i) t_grid.push_back(1e-3 * std::pow(100.0, i / 9.0));

  const KernelBoundFit fit = verify_pointwise_bounds(1, GreenDeriv::none, t_grid, op);
  CHECK(fit.fitted);
  CHECK(std::abs(fit.exponent_fit + 0.25) < 0.05);
  CHECK(fit.max_violation <= 1.05);
  CHECK(fit.c1 > 0.0);
  CHECK(fit.c2 > 0.0);

  const KernelBoundFit dt_fit = verify_pointwise_bounds(1, GreenDeriv::time, t_grid, op);
  CHECK(std::abs(dt_fit.exponent_fit + 1.25) < 0.1);

  // a decay constant far above the fitted one must break the bound
  const KernelBoundFit forced =
      verify_pointwise_bounds(1, GreenDeriv::none, t_grid, op, fit.c2 * 50.0 + 5.0);
  CHECK(forced.max_violation > 1.05);

  // monotonicity: a smaller c2 still admits some c1 on the held-out grid
  const KernelBoundFit relaxed =
      verify_pointwise_bounds(1, GreenDeriv::none, t_grid, op, fit.c2 * 0.5);
  CHECK(relaxed.max_violation <= 1.05);
}

TEST_CASE("increment-integral exponents reach the lemma windows") {
  OperatorSpec op;
  const IncrementExponents inc = verify_increment_integrals(1, op);
  CHECK(inc.converged);
  CHECK(inc.space_slope >= 1.9);   // gamma caps at 2
  CHECK(inc.time5_slope >= 0.70);  // gamma' < 3/4 at d = 1
  CHECK(inc.time6_slope >= 0.70);
}

TEST_CASE("convolve_initial: identity at t=0, constant mode, monotone L2") {
  OperatorSpec op;
  SpectralFieldd u0 = SpectralFieldd::zero(32, 1);
  for (int i = 0; i < 32; ++i) u0.coeffs[i] = std::cos(0.3 * i) / (1.0 + i);

  const SpectralFieldd at0 = convolve_initial(u0, 0.0, op);
  CHECK((at0.coeffs - u0.coeffs).abs().maxCoeff() == 0.0);

  SpectralFieldd mean = SpectralFieldd::zero(32, 1);
  mean.coeffs[0] = 2.0;
  for (double t : {0.1, 1.0, 5.0})
    CHECK(convolve_initial(mean, t, op).coeffs[0] == 2.0);

  double prev = u0.l2_norm();
  for (double t : {0.001, 0.01, 0.1, 1.0}) {
    const double cur = convolve_initial(u0, t, op).l2_norm();
    CHECK(cur <= prev);
    prev = cur;
  }
}
