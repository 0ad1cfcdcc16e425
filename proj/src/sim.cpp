#include "chac/sim.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace chac {

double f_eval(double u, const CubicPoly& f) { return f(u); }

std::vector<ConfigIssue> validate(const SimConfig& cfg) {
  std::vector<ConfigIssue> issues;
  auto fatal = [&](std::string field, std::string msg) {
    issues.push_back({std::move(field), std::move(msg), true});
  };
  auto warn = [&](std::string field, std::string msg) {
    issues.push_back({std::move(field), std::move(msg), false});
  };

  if (cfg.dim < 1 || cfg.dim > 3) fatal("dim", "dimension must be 1, 2 or 3");
  if (cfg.modes < 4) fatal("modes", "need at least 4 modes per axis");
  if (cfg.dt <= 0.0) fatal("dt", "time step must be positive");
  if (cfg.t_end <= 0.0) fatal("t_end", "final time must be positive");
  if (cfg.paths < 1) fatal("paths", "need at least one path");
  if (cfg.dealias_pad < 1.0) fatal("dealias_pad", "padding factor must be >= 1");
  if (cfg.op.rho <= 0.0) fatal("rho", "physical diffusion rho must be positive");
  if (cfg.op.qtilde < 0.0) fatal("qtilde", "qtilde must be non-negative");
  if (cfg.f.enabled && cfg.f.a <= 0.0)
    fatal("f_poly", "cubic nonlinearity needs a positive leading coefficient");
  if (cfg.sigma.c < 0.0) fatal("sigma.c", "noise amplitude must be non-negative");
  if (cfg.cutoff.enabled && cfg.cutoff.level < 1.0)
    fatal("cutoff.level", "cut-off level must be >= 1");
  if (cfg.u0.dim != cfg.dim || cfg.u0.modes != cfg.modes ||
      cfg.u0.coeffs.size() != pow_int(cfg.modes, cfg.dim))
    fatal("u0", "initial field shape does not match (modes, dim)");

  const double a = cfg.sigma.alpha;
  if (cfg.sigma.form == SigmaSpec::Form::sublinear && !(a > 0.0 && a < 1.0 / 9.0))
    warn("sigma.alpha", "alpha outside (0,1/9): global existence is not guaranteed");

  const double q = cfg.q_norm;
  const bool cond =
      ((cfg.dim == 1 || cfg.dim == 2) && q >= 4.0) || (cfg.dim == 3 && q >= 6.0) ||
      (cfg.dim == 3 && q >= 4.0 && q > std::max(6.0 * (1.0 - a), 6.0 * a) && q < 6.0);
  if (!cond)
    warn("q_norm", "(d, q, alpha) fails the admissibility condition: need q >= 4 for "
                   "d=1,2; q >= 6 or q in (max(6(1-alpha),6alpha), 6) for d=3");
  return issues;
}

Stepper::Stepper(const SimConfig& cfg) : cfg_(cfg), padded_(cfg.padded_modes()) {
  lam_ = lambda_lattice(cfg.modes, cfg.dim);
  omega_ = cfg.op.rho * lam_.square() + cfg.op.qtilde * lam_;
  decay_ = (-omega_ * cfg.dt).exp();
  phi1dt_.resize(omega_.size());
  for (Eigen::Index i = 0; i < omega_.size(); ++i) {
    const double z = omega_[i] * cfg.dt;
    phi1dt_[i] = z < 1e-12 ? cfg.dt : -std::expm1(-z) / omega_[i];
  }
  drift_factor_ = -(cfg.op.rho * lam_ + cfg.op.qtilde);
  noise_weight_ = cfg.noise_weight == NoiseWeight::leftpoint
                      ? decay_
                      : (phi1dt_ / cfg.dt).eval();
  const double h = std::numbers::pi / cfg.modes;
  noise_sd_ = std::sqrt(cfg.dt / std::pow(h, cfg.dim));
  // warm the plan cache so path workers never race on construction
  cosine_plan<double>(cfg.modes);
  cosine_plan<double>(padded_);
}

Stepper::State Stepper::initial_state() const {
  State st;
  st.u = cfg_.u0;
  if (cfg_.track_stochastic_convolution)
    st.conv = SpectralFieldd::zero(cfg_.modes, cfg_.dim);
  return st;
}

double Stepper::norm_q(const SpectralFieldd& u) const {
  SpectralFieldd up;
  pad_coeffs(u, up, padded_);
  return nodal_lq_norm(to_nodal(up), cfg_.q_norm);
}

SpectralFieldd Stepper::drift(const SpectralFieldd& u) const {
  SpectralFieldd up;
  pad_coeffs(u, up, padded_);
  NodalFieldd nod = to_nodal(up);
  for (Eigen::Index i = 0; i < nod.values.size(); ++i)
    nod.values[i] = cfg_.f(nod.values[i]);
  SpectralFieldd fu = to_spectral(nod);
  SpectralFieldd out;
  truncate_coeffs(fu, out, cfg_.modes);
  out.coeffs *= drift_factor_;
  return out;
}

void Stepper::step(State& st, std::uint64_t path, std::uint64_t step_index) const {
  const bool need_padded = cfg_.f.enabled || cfg_.cutoff.enabled || cfg_.record_norms;

  SpectralFieldd drift_hat;
  if (need_padded) {
    SpectralFieldd up;
    pad_coeffs(st.u, up, padded_);
    NodalFieldd nod = to_nodal(up);
    st.norm_q = nodal_lq_norm(nod, cfg_.q_norm);
    if (cfg_.f.enabled) {
      for (Eigen::Index i = 0; i < nod.values.size(); ++i)
        nod.values[i] = cfg_.f(nod.values[i]);
      SpectralFieldd fu = to_spectral(nod);
      truncate_coeffs(fu, drift_hat, cfg_.modes);
      drift_hat.coeffs *= drift_factor_;
    }
  }
  st.chi = cfg_.cutoff.enabled ? cutoff_eval(st.norm_q, cfg_.cutoff) : 1.0;

  SpectralFieldd noise_hat;
  const bool noisy = !cfg_.sigma.is_zero();
  if (noisy) {
    NodalFieldd un = to_nodal(st.u);
    GaussianStream g(cfg_.seed, /*stream=*/1, path, step_index);
    for (Eigen::Index i = 0; i < un.values.size(); ++i)
      un.values[i] = sigma_eval(un.values[i], cfg_.sigma) * noise_sd_ * g.next();
    noise_hat = to_spectral(un);
  }

  st.u.coeffs *= decay_;
  if (cfg_.f.enabled && st.chi != 0.0)
    st.u.coeffs += st.chi * phi1dt_ * drift_hat.coeffs;
  if (noisy && st.chi != 0.0)
    st.u.coeffs += st.chi * noise_weight_ * noise_hat.coeffs;

  if (cfg_.track_stochastic_convolution) {
    st.conv.coeffs *= decay_;
    if (noisy && st.chi != 0.0)
      st.conv.coeffs += st.chi * noise_weight_ * noise_hat.coeffs;
  }

  if (!st.u.coeffs.isFinite().all() || st.u.l2_norm() > cfg_.blowup_l2)
    st.blowup = true;
}

Trajectory run_path(const SimConfig& cfg, std::uint64_t path_id) {
  const Stepper stepper(cfg);
  const int steps = cfg.steps();
  Trajectory traj;
  traj.path_id = path_id;
  traj.steps = steps;
  traj.probe_indices = cfg.probes;

  Stepper::State st = stepper.initial_state();
  const bool probing = !cfg.probes.empty();
  if (probing) traj.probe_series.resize(steps + 1, int(cfg.probes.size()));

  auto record_probes = [&](int row) {
    const NodalFieldd nod = to_nodal(st.u);
    for (std::size_t j = 0; j < cfg.probes.size(); ++j)
      traj.probe_series(row, int(j)) = nod.values[cfg.probes[j]];
  };
  auto snapshot = [&](double t) {
    traj.times.push_back(t);
    traj.snapshots.push_back(st.u);
  };
  auto track_sup = [&]() {
    if (!cfg.track_stochastic_convolution) return;
    const NodalFieldd nod = to_nodal(st.conv);
    traj.sup_conv_abs = std::max(traj.sup_conv_abs, nod.values.abs().maxCoeff());
  };

  snapshot(0.0);
  if (probing) record_probes(0);

  for (int m = 0; m < steps; ++m) {
    stepper.step(st, path_id, std::uint64_t(m));
    if (cfg.record_norms || cfg.cutoff.enabled) {
      traj.norm_series.push_back(st.norm_q);
      if (!traj.stopping_time && cfg.cutoff.enabled && st.norm_q >= cfg.cutoff.level)
        traj.stopping_time = m * cfg.dt;
      if (st.chi == 0.0) traj.frozen = true;
    }
    if (st.blowup) {
      traj.blowup = true;
      break;
    }
    if (probing) record_probes(m + 1);
    track_sup();
    const bool last = m + 1 == steps;
    if ((cfg.snapshot_stride > 0 && (m + 1) % cfg.snapshot_stride == 0 && !last) || last)
      snapshot((m + 1) * cfg.dt);
  }
  return traj;
}

void parallel_paths(int paths, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, paths));
  if (workers == 1) {
    for (int p = 0; p < paths; ++p) fn(p);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int p = next.fetch_add(1);
        if (p >= paths) return;
        fn(p);
      }
    });
  for (auto& th : pool) th.join();
}

std::vector<Trajectory> run_ensemble(const SimConfig& cfg, int workers) {
  std::vector<Trajectory> out(cfg.paths);
  parallel_paths(cfg.paths, workers,
                 [&](int p) { out[p] = run_path(cfg, std::uint64_t(p)); });
  return out;
}

PicardResult picard_solve(const SimConfig& cfg, std::uint64_t path_id, int max_iters,
                          double tol) {
  const Stepper stepper(cfg);
  const int steps = cfg.steps();
  const std::int64_t total = pow_int(cfg.modes, cfg.dim);
  if (std::int64_t(steps + 1) * total > (std::int64_t(1) << 27))
    throw std::invalid_argument("picard_solve: time grid too large to store");

  const Eigen::ArrayXd& decay = stepper.decay();
  const double h = std::numbers::pi / cfg.modes;
  const double noise_sd = std::sqrt(cfg.dt / std::pow(h, cfg.dim));

  // shared noise realization, nodal per step
  std::vector<Eigen::ArrayXd> xi(steps);
  for (int m = 0; m < steps; ++m) {
    GaussianStream g(cfg.seed, 1, path_id, std::uint64_t(m));
    xi[m].resize(total);
    for (std::int64_t i = 0; i < total; ++i) xi[m][i] = noise_sd * g.next();
  }

  // iterate u^{(0)} = linear flow of u0
  std::vector<SpectralFieldd> cur(steps + 1);
  cur[0] = cfg.u0;
  for (int m = 1; m <= steps; ++m) {
    cur[m] = cur[m - 1];
    cur[m].coeffs *= decay;
  }

  PicardResult res;
  res.final = cur[steps];
  const bool noisy = !cfg.sigma.is_zero();
  for (int it = 0; it < max_iters; ++it) {
    std::vector<SpectralFieldd> nxt(steps + 1);
    nxt[0] = cfg.u0;
    Eigen::ArrayXd conv = Eigen::ArrayXd::Zero(total);   // sum_{i<m} E^{m-i} g_i
    Eigen::ArrayXd lin = cfg.u0.coeffs;                  // e^{-omega t_m} u0
    double dist = 0.0;
    for (int m = 0; m < steps; ++m) {
      const double chi =
          cfg.cutoff.enabled ? cutoff_eval(stepper.norm_q(cur[m]), cfg.cutoff) : 1.0;
      Eigen::ArrayXd g = Eigen::ArrayXd::Zero(total);
      if (cfg.f.enabled && chi != 0.0)
        g += chi * cfg.dt * stepper.drift(cur[m]).coeffs;
      if (noisy && chi != 0.0) {
        NodalFieldd un = to_nodal(cur[m]);
        for (std::int64_t i = 0; i < total; ++i)
          un.values[i] = sigma_eval(un.values[i], cfg.sigma) * xi[m][i];
        g += chi * to_spectral(un).coeffs;
      }
      conv = decay * (conv + g);
      lin *= decay;
      nxt[m + 1] = cfg.u0;
      nxt[m + 1].coeffs = lin + conv;
      dist = std::max(dist, std::sqrt((nxt[m + 1].coeffs - cur[m + 1].coeffs).square().sum()));
    }
    cur.swap(nxt);
    res.iterate_distance.push_back(dist);
    res.iterations = it + 1;
    if (!std::isfinite(dist) || dist > 1e100) {
      res.diverged = true;
      break;
    }
    if (dist < tol) {
      res.converged = true;
      break;
    }
  }
  res.final = cur[steps];
  return res;
}

double b_functional(const SpectralFieldd& u0, const OperatorSpec& op) {
  const Eigen::ArrayXd lam = lambda_lattice(u0.modes, u0.dim);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double w = op.rho * lam[i] + op.qtilde;
    if (w <= 0.0) continue;  // qtilde = 0 drops the zero mode
    sum += u0.coeffs[i] * u0.coeffs[i] / w;
  }
  return 0.5 * sum;
}

EnergyReport energy_diagnostics(const Trajectory& traj, const SimConfig& cfg) {
  EnergyReport rep;
  rep.b_u0 = traj.snapshots.empty() ? 0.0 : b_functional(traj.snapshots.front(), cfg.op);
  const Eigen::ArrayXd lam = lambda_lattice(cfg.modes, cfg.dim);
  const int padded = cfg.padded_modes();
  const double cell = std::pow(std::numbers::pi / padded, cfg.dim);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const SpectralFieldd& u = traj.snapshots[i];
    rep.t.push_back(traj.times[i]);
    rep.mass.push_back(u.coeffs[0]);
    rep.l2_sq.push_back(u.coeffs.square().sum());
    rep.h1_sq.push_back((lam * u.coeffs.square()).sum());
    rep.h2_sq.push_back((lam.square() * u.coeffs.square()).sum());
    double fe = 0.5 * rep.h1_sq.back();
    if (cfg.f.enabled) {
      SpectralFieldd up;
      pad_coeffs(u, up, padded);
      const NodalFieldd nod = to_nodal(up);
      double pot = 0.0;
      for (Eigen::Index j = 0; j < nod.values.size(); ++j)
        pot += cfg.f.antiderivative(nod.values[j]);
      fe += cell * pot;
    }
    rep.free_energy.push_back(fe);
  }
  return rep;
}

SpectralFieldd drift_spectral(const SpectralFieldd& u, const SimConfig& cfg) {
  SimConfig local = cfg;
  local.dim = u.dim;
  local.modes = u.modes;
  local.u0 = u;
  return Stepper(local).drift(u);
}

}  // namespace chac
