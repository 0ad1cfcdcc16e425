#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chac/field.hpp"
#include "chac/noise.hpp"
#include "chac/spectral.hpp"

namespace chac {

/// Nonlinearity f(u) = a u^3 + b u^2 + c u + e; the default is the double-well
/// derivative u^3 - u.  A disabled poly means f == 0 (linear flow).
struct CubicPoly {
  double a = 1.0, b = 0.0, c = -1.0, e = 0.0;
  bool enabled = true;

  double operator()(double u) const {
    return enabled ? ((a * u + b) * u + c) * u + e : 0.0;
  }
  double antiderivative(double u) const {
    return enabled ? ((a * u / 4.0 + b / 3.0) * u + c / 2.0) * u * u + e * u : 0.0;
  }
};

double f_eval(double u, const CubicPoly& f);

enum class NoiseWeight { leftpoint, phi1 };

struct SimConfig {
  OperatorSpec op;
  SigmaSpec sigma;
  CutoffSpec cutoff;
  CubicPoly f;
  int dim = 1;
  int modes = 256;
  double dt = 1e-4;
  double t_end = 0.5;
  double q_norm = 4.0;
  SpectralFieldd u0;
  std::uint64_t seed = 20260809;
  int paths = 1;
  int snapshot_stride = 0;  // 0: initial + final snapshots only
  std::vector<std::int64_t> probes;
  NoiseWeight noise_weight = NoiseWeight::leftpoint;
  double dealias_pad = 2.0;
  bool track_stochastic_convolution = false;
  bool record_norms = true;
  double blowup_l2 = 1e12;

  int steps() const { return int(std::llround(t_end / dt)); }
  int padded_modes() const {
    int m = int(std::ceil(dealias_pad * modes));
    return m < modes ? modes : m;
  }
};

struct ConfigIssue {
  std::string field;
  std::string message;
  bool fatal = false;
};

/// Model/discretization checks, including the (d, q, alpha) admissibility
/// condition and the alpha in (0, 1/9) window for sub-linear noise.
std::vector<ConfigIssue> validate(const SimConfig& cfg);

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralFieldd> snapshots;
  std::vector<double> norm_series;  // ||u(t_m)||_q for m = 0..steps
  Eigen::MatrixXd probe_series;     // (steps+1) x probes
  std::vector<std::int64_t> probe_indices;
  double sup_conv_abs = 0.0;  // sup_{x,t} |L(u)| when tracked
  std::optional<double> stopping_time;
  bool frozen = false;
  bool blowup = false;
  std::uint64_t path_id = 0;
  int steps = 0;
};

/// Precomputed mode tables for the exponential Euler step of the cut-off SPDE
/// in mild form.  Immutable; safe to share across path workers.
class Stepper {
 public:
  explicit Stepper(const SimConfig& cfg);

  struct State {
    SpectralFieldd u;
    SpectralFieldd conv;  // running stochastic convolution, if tracked
    double norm_q = 0.0;
    double chi = 1.0;
    bool blowup = false;
  };

  State initial_state() const;
  /// One step from t_m to t_{m+1}; fills st.norm_q / st.chi with the values
  /// used at time t_m.
  void step(State& st, std::uint64_t path, std::uint64_t step_index) const;

  double norm_q(const SpectralFieldd& u) const;
  SpectralFieldd drift(const SpectralFieldd& u) const;

  const Eigen::ArrayXd& lambda() const { return lam_; }
  const Eigen::ArrayXd& decay() const { return decay_; }
  const SimConfig& config() const { return cfg_; }

 private:
  SimConfig cfg_;
  int padded_;
  Eigen::ArrayXd lam_, omega_, decay_, phi1dt_, drift_factor_, noise_weight_;
  double noise_sd_ = 0.0;
};

Trajectory run_path(const SimConfig& cfg, std::uint64_t path_id);
std::vector<Trajectory> run_ensemble(const SimConfig& cfg, int workers);

struct PicardResult {
  SpectralFieldd final;
  std::vector<double> iterate_distance;  // sup-in-time L2 distance per sweep
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

/// Fixed-point iteration of the discrete mild equation
///   u = G_t u0 + M(u) + L(u)
/// on the step grid, drift quadrature by left rectangles on the kernel and the
/// same noise increments run_path consumes.
PicardResult picard_solve(const SimConfig& cfg, std::uint64_t path_id, int max_iters,
                          double tol);

struct EnergyReport {
  std::vector<double> t;
  std::vector<double> mass;
  std::vector<double> l2_sq;
  std::vector<double> h1_sq;  // ||grad u||_2^2
  std::vector<double> h2_sq;  // ||Lap u||_2^2
  std::vector<double> free_energy;
  double b_u0 = 0.0;
};

EnergyReport energy_diagnostics(const Trajectory& traj, const SimConfig& cfg);

/// B(u0) = 1/2 sum_k w_k^{-1} (u0, eps_k)^2 with w_k = rho lambda_k + qtilde;
/// the k = 0 term is dropped when qtilde = 0.
double b_functional(const SpectralFieldd& u0, const OperatorSpec& op);

SpectralFieldd drift_spectral(const SpectralFieldd& u, const SimConfig& cfg);

/// Fan path indices [0, paths) over a worker pool; fn must be pure per path.
void parallel_paths(int paths, int workers, const std::function<void(int)>& fn);

}  // namespace chac
