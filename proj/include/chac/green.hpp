#pragma once

#include <optional>
#include <span>
#include <vector>

#include "chac/field.hpp"
#include "chac/spectral.hpp"

namespace chac {

// Green's function of d/dt - (-rho Lap^2 + qtilde Lap) with Neumann conditions,
//   G(x,y,t) = sum_k exp(-(rho lambda_k^2 + qtilde lambda_k) t) eps_k(x) eps_k(y),
// evaluated as a truncated eigen-sum, plus the kernel-estimate verification
// machinery built on it.

enum class GreenDeriv {
  none,       // G itself
  dx1,        // d/dx_1
  dxx1,       // d^2/dx_1^2
  dx1dx2,     // mixed d^2/dx_1 dx_2 (dim >= 2)
  time,       // d/dt
  laplacian,  // Lap_x G
};

/// Smallest K with rho K^4 t > 30, so the dropped tail is below e^{-30}.
int suggest_truncation(double t, const OperatorSpec& op);

/// True when the K^4-tail at time t is below ~1e-12.
bool truncation_tail_ok(int trunc, double t, const OperatorSpec& op);

double green_eval(std::span<const double> x, std::span<const double> y, double t,
                  int trunc, const OperatorSpec& op,
                  GreenDeriv deriv = GreenDeriv::none);

/// Quadrature of int_D G(x,z,t-s) {G or Lap G}(z,y,s) dz on the midpoint grid,
/// refined by doubling until the relative change drops below rel_tol.
double green_compose(std::span<const double> x, std::span<const double> y, double t,
                     double s, bool with_laplacian, const OperatorSpec& op,
                     double rel_tol = 1e-8);

/// G_t u0 (identity at t = 0).
SpectralFieldd convolve_initial(const SpectralFieldd& u0, double t, const OperatorSpec& op);
SpectralFieldd convolve_initial(const NodalFieldd& u0, double t, const OperatorSpec& op);

// The three increment integrals of the kernel lemma, reduced over z by
// orthonormality and integrated in time mode-wise (exact at truncation K).
double space_increment_integral(std::span<const double> x, std::span<const double> y,
                                double t, int trunc, const OperatorSpec& op);
double time_increment_integral(std::span<const double> x, double t, double s, int trunc,
                               const OperatorSpec& op);
double tail_increment_integral(std::span<const double> x, double t, double s, int trunc,
                               const OperatorSpec& op);

/// Adaptive quadrature of int_{R^d} exp(-c |x|^{4/3} t^{-1/3}) dx.
double exp_integral(double c, double t, int dim, double rel_tol = 1e-10);

/// Fit-then-check result for one pointwise kernel bound
/// |dG| <= c1 t^{-p} exp(-c2 |x-y|^{4/3} t^{-1/3}).
struct KernelBoundFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double max_violation = 0.0;  // on the fine (held-out) grid
  double exponent_fit = 0.0;   // regressed slope of log sup|dG| vs log t
  bool fitted = false;
};

KernelBoundFit verify_pointwise_bounds(int dim, GreenDeriv deriv,
                                       std::span<const double> t_grid,
                                       const OperatorSpec& op,
                                       std::optional<double> forced_c2 = std::nullopt);

struct IncrementExponents {
  double space_slope = 0.0;   // log integral vs log |x-y|
  double time5_slope = 0.0;   // log integral vs log (t-s), moving-time increment
  double time6_slope = 0.0;   // log integral vs log (t-s), tail integral
  bool converged = false;
};

IncrementExponents verify_increment_integrals(int dim, const OperatorSpec& op);

}  // namespace chac
