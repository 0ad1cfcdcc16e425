#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chac/sim.hpp"

using namespace chac;

namespace {

constexpr double kPi = std::numbers::pi;

SimConfig base_config(int dim, int modes) {
  SimConfig cfg;
  cfg.dim = dim;
  cfg.modes = modes;
  cfg.u0 = SpectralFieldd::zero(modes, dim);
  cfg.cutoff.enabled = false;
  cfg.record_norms = false;
  return cfg;
}

SimConfig linear_config(int dim, int modes) {
  SimConfig cfg = base_config(dim, modes);
  cfg.f.enabled = false;
  cfg.sigma = SigmaSpec{SigmaSpec::Form::constant, 0.0, 0.0, {}, {}};
  return cfg;
}

}  // namespace

TEST_CASE("f_eval: double-well roots, values, coercivity of f'") {
  CubicPoly f;  // u^3 - u
  CHECK(f_eval(0.0, f) == 0.0);
  CHECK(f_eval(1.0, f) == 0.0);
  CHECK(f_eval(-1.0, f) == 0.0);
  CHECK(f_eval(2.0, f) == 6.0);

  // f'(u) >= 2 a u^2 - c_tilde on the lattice with a finite fitted c_tilde
  double ctilde = -1e300;
  for (int i = 0; i <= 2000; ++i) {
    const double u = -10.0 + 20.0 * i / 2000.0;
    const double fp = 3.0 * f.a * u * u + 2.0 * f.b * u + f.c;
    ctilde = std::max(ctilde, 2.0 * f.a * u * u - fp);
  }
  CHECK(ctilde == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isfinite(ctilde));
}

TEST_CASE("config validation: alpha window, admissibility, fatal errors") {
  SimConfig cfg = base_config(1, 16);

  auto has_issue = [](const std::vector<ConfigIssue>& issues, const std::string& field,
                      bool fatal) {
    for (const auto& i : issues)
      if (i.field == field && i.fatal == fatal) return true;
    return false;
  };

  CHECK(validate(cfg).empty());

  cfg.sigma.alpha = 0.2;
  CHECK(has_issue(validate(cfg), "sigma.alpha", false));
  cfg.sigma.alpha = 0.1;

  cfg.q_norm = 3.0;
  CHECK(has_issue(validate(cfg), "q_norm", false));
  cfg.q_norm = 4.0;

  cfg.f.a = -1.0;
  CHECK(has_issue(validate(cfg), "f_poly", true));
  cfg.f.a = 1.0;

  // d = 3 branches of the admissibility condition
  SimConfig c3 = base_config(3, 8);
  c3.q_norm = 6.0;
  CHECK(validate(c3).empty());
  c3.q_norm = 5.0;
  c3.sigma.alpha = 0.05;  // needs q > max(6(1-alpha), 6 alpha) = 5.7
  CHECK(has_issue(validate(c3), "q_norm", false));
  c3.sigma.alpha = 0.2;  // 6(1-alpha) = 4.8 < q = 5 < 6 admits branch (ii)
  CHECK(!has_issue(validate(c3), "q_norm", false));
}

TEST_CASE("drift_spectral: zero field, constant field, single-mode cubic") {
  SimConfig cfg = base_config(1, 16);

  SpectralFieldd zero = SpectralFieldd::zero(16, 1);
  CHECK(drift_spectral(zero, cfg).coeffs.abs().maxCoeff() == 0.0);

  // constant field u(x) = c: only k = 0 survives with factor -qtilde
  const double c = 0.8;
  SpectralFieldd cst = SpectralFieldd::zero(16, 1);
  cst.coeffs[0] = c * std::sqrt(kPi);
  const SpectralFieldd dc = drift_spectral(cst, cfg);
  const double expected = -cfg.op.qtilde * (c * c * c - c) * std::sqrt(kPi);
  CHECK(dc.coeffs[0] == doctest::Approx(expected).epsilon(1e-13));
  CHECK(dc.coeffs.tail(15).abs().maxCoeff() < 1e-13);

  // single mode eps_1: trig-product oracle, modes {1, 3} only
  SpectralFieldd e1 = SpectralFieldd::zero(16, 1);
  e1.coeffs[1] = 1.0;
  const SpectralFieldd d1 = drift_spectral(e1, cfg);
  // eps_1^3 = (3/(2 pi)) eps_1 + (1/(2 pi)) eps_3
  const double c1 = (3.0 / (2.0 * kPi) - 1.0) * -(cfg.op.rho * 1.0 + cfg.op.qtilde);
  const double c3 = (1.0 / (2.0 * kPi)) * -(cfg.op.rho * 9.0 + cfg.op.qtilde);
  CHECK(d1.coeffs[1] == doctest::Approx(c1).epsilon(1e-12));
  CHECK(d1.coeffs[3] == doctest::Approx(c3).epsilon(1e-12));
  for (int k : {0, 2, 4, 5, 6, 7})
    CHECK(std::abs(d1.coeffs[k]) < 1e-13);
}

TEST_CASE("step: pure linear flow matches the closed form to 1e-13 relative") {
  for (int dim : {1, 2}) {
    SimConfig cfg = linear_config(dim, 8);
    cfg.dt = 1e-3;
    MultiIndex m;
    m.dim = dim;
    m.k[0] = 2;
    if (dim > 1) m.k[1] = 1;
    cfg.u0.coeffs[flatten_index(m, 8)] = 1.0;

    const Stepper stepper(cfg);
    Stepper::State st = stepper.initial_state();
    for (int i = 0; i < 10; ++i) stepper.step(st, 0, i);

    const double lam = m.lambda();
    const double omega = cfg.op.rho * lam * lam + cfg.op.qtilde * lam;
    const double expect = std::exp(-omega * 10 * cfg.dt);
    CHECK(st.u.coeffs[flatten_index(m, 8)] ==
          doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("step: frozen regime is exactly the semigroup") {
  SimConfig cfg = base_config(1, 32);
  cfg.sigma = SigmaSpec{SigmaSpec::Form::sublinear, 0.1, 1.0, {}, {}};
  cfg.cutoff.enabled = true;
  cfg.cutoff.level = 1.0;
  cfg.record_norms = true;
  cfg.dt = 1e-4;
  // ||u0||_q far above n + 1 = 2
  cfg.u0.coeffs[0] = 20.0 * std::sqrt(kPi);
  cfg.u0.coeffs[3] = 5.0;

  const Stepper stepper(cfg);
  Stepper::State st = stepper.initial_state();
  const SpectralFieldd before = st.u;
  stepper.step(st, 0, 0);
  CHECK(st.chi == 0.0);

  const SpectralFieldd pure = semigroup_apply(before, cfg.dt, cfg.op);
  CHECK((st.u.coeffs - pure.coeffs).abs().maxCoeff() == 0.0);
}

TEST_CASE("mass conservation at qtilde = 0, sigma = 0") {
  SimConfig cfg = base_config(1, 32);
  cfg.op.qtilde = 0.0;
  cfg.sigma = SigmaSpec{SigmaSpec::Form::constant, 0.0, 0.0, {}, {}};
  cfg.dt = 1e-4;
  cfg.t_end = 0.05;
  GaussianStream g(5, 2, 0, 0);
  for (int i = 0; i < 32; ++i) cfg.u0.coeffs[i] = 0.3 * g.next() * std::exp(-i * i / 32.0);
  const double mass0 = cfg.u0.coeffs[0];

  const Stepper stepper(cfg);
  Stepper::State st = stepper.initial_state();
  for (int m = 0; m < cfg.steps(); ++m) {
    stepper.step(st, 0, m);
    CHECK(std::abs(st.u.coeffs[0] - mass0) < 1e-12);
  }
}

TEST_CASE("run_path: fixed point at zero, well convergence, determinism") {
  // u0 = 0 with sigma = 0 stays 0
  SimConfig cfg = linear_config(1, 16);
  cfg.f.enabled = true;
  cfg.dt = 1e-3;
  cfg.t_end = 0.1;
  const Trajectory t0 = run_path(cfg, 0);
  CHECK(t0.snapshots.back().coeffs.abs().maxCoeff() == 0.0);

  // constant u0 near the +1 well: k=0 ODE dy/dt = -qtilde f(y), RK4 oracle
  SimConfig cw = cfg;
  cw.dt = 1e-3;
  cw.t_end = 1.0;
  const double y0 = 0.6;
  cw.u0.coeffs[0] = y0 * std::sqrt(kPi);
  const Trajectory tw = run_path(cw, 0);
  const double y_sim = tw.snapshots.back().coeffs[0] / std::sqrt(kPi);

  double y = y0;
  const double hs = 1e-5;
  CubicPoly f;
  for (int i = 0; i < int(cw.t_end / hs); ++i) {
    auto rhs = [&](double v) { return -cw.op.qtilde * f(v); };
    const double k1 = rhs(y), k2 = rhs(y + 0.5 * hs * k1), k3 = rhs(y + 0.5 * hs * k2),
                 k4 = rhs(y + hs * k3);
    y += hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  CHECK(y_sim == doctest::Approx(y).epsilon(1e-3));
  CHECK(std::abs(y_sim - 1.0) < std::abs(y0 - 1.0));  // moved toward the well

  // bit-for-bit determinism of a noisy path
  SimConfig nd = base_config(1, 32);
  nd.dt = 1e-3;
  nd.t_end = 0.05;
  nd.snapshot_stride = 10;
  const Trajectory a = run_path(nd, 3);
  const Trajectory b = run_path(nd, 3);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i)
    CHECK((a.snapshots[i].coeffs - b.snapshots[i].coeffs).abs().maxCoeff() == 0.0);
  const Trajectory c = run_path(nd, 4);
  CHECK((a.snapshots.back().coeffs - c.snapshots.back().coeffs).abs().maxCoeff() > 0.0);
}

TEST_CASE("picard: linear one-sweep fixed point and geometric contraction") {
  SimConfig lin = linear_config(1, 16);
  lin.dt = 1e-3;
  lin.t_end = 0.01;
  GaussianStream g(9, 2, 0, 0);
  for (int i = 0; i < 16; ++i) lin.u0.coeffs[i] = g.next() * std::exp(-i / 4.0);

  const PicardResult pr = picard_solve(lin, 0, 8, 1e-14);
  CHECK(pr.converged);
  CHECK(pr.iterations <= 2);  // M = L = 0: the first sweep already lands on G_t u0
  const SpectralFieldd direct = semigroup_apply(lin.u0, lin.t_end, lin.op);
  CHECK((pr.final.coeffs - direct.coeffs).abs().maxCoeff() < 1e-14);

  SimConfig full = base_config(1, 32);
  full.dt = 2.5e-4;
  full.t_end = 0.005;
  full.u0.coeffs[0] = 0.5;
  full.u0.coeffs[2] = 0.3;
  const PicardResult pf = picard_solve(full, 1, 12, 1e-13);
  CHECK(pf.converged);
  REQUIRE(pf.iterate_distance.size() >= 3);
  for (std::size_t i = 1; i + 1 < pf.iterate_distance.size(); ++i)
    CHECK(pf.iterate_distance[i + 1] < 0.7 * pf.iterate_distance[i]);
}

TEST_CASE("picard vs exponential Euler: first-order distance in dt") {
  SimConfig cfg = base_config(1, 32);
  cfg.t_end = 0.01;
  cfg.u0.coeffs[0] = 0.4;
  cfg.u0.coeffs[1] = 0.2;
  cfg.u0.coeffs[4] = 0.1;
  // moderate noise keeps the drift-quadrature gap dominant over the
  // state-roughness feedback through sigma(u)
  cfg.sigma.c = 0.1;

  std::vector<double> errs;
  for (double dt : {1e-3, 5e-4, 2.5e-4}) {
    cfg.dt = dt;
    const Trajectory etd = run_path(cfg, 0);
    const PicardResult pic = picard_solve(cfg, 0, 30, 1e-13);
    REQUIRE(pic.converged);
    errs.push_back(
        std::sqrt((etd.snapshots.back().coeffs - pic.final.coeffs).square().sum()));
  }
  CHECK(errs[0] / errs[1] == doctest::Approx(2.0).epsilon(0.35));
  CHECK(errs[1] / errs[2] == doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("energy diagnostics: B(u0) values and the free-energy identity") {
  OperatorSpec op;  // rho = qtilde = 1
  SpectralFieldd e0 = SpectralFieldd::zero(8, 1);
  e0.coeffs[0] = 1.0;
  CHECK(b_functional(e0, op) == doctest::Approx(0.5).epsilon(1e-15));

  SpectralFieldd e1 = SpectralFieldd::zero(8, 1);
  e1.coeffs[1] = 1.0;  // lambda = 1
  CHECK(b_functional(e1, op) == doctest::Approx(0.25).epsilon(1e-15));

  GaussianStream g(3, 2, 0, 0);
  SpectralFieldd u = SpectralFieldd::zero(16, 1);
  for (int i = 0; i < 16; ++i) u.coeffs[i] = g.next();
  CHECK(b_functional(u, op) <= 0.5 * u.coeffs.square().sum() + 1e-14);

  // qtilde = 0 drops the mean mode
  OperatorSpec ch{1.0, 0.0};
  SpectralFieldd mean = SpectralFieldd::zero(8, 1);
  mean.coeffs[0] = 3.0;
  CHECK(b_functional(mean, ch) == 0.0);
}

TEST_CASE("deterministic free energy is non-increasing along run_path") {
  SimConfig cfg = base_config(1, 64);
  cfg.sigma = SigmaSpec{SigmaSpec::Form::constant, 0.0, 0.0, {}, {}};
  cfg.dt = 1e-4;
  cfg.t_end = 0.1;
  cfg.snapshot_stride = 1;
  GaussianStream g(12, 2, 0, 0);
  const Eigen::ArrayXd lam = lambda_lattice(64, 1);
  for (int i = 0; i < 64; ++i) cfg.u0.coeffs[i] = 0.5 * g.next() * std::exp(-lam[i] / 64.0);

  const Trajectory traj = run_path(cfg, 0);
  const EnergyReport rep = energy_diagnostics(traj, cfg);
  for (std::size_t i = 1; i < rep.free_energy.size(); ++i)
    CHECK(rep.free_energy[i] <= rep.free_energy[i - 1] + 1e-8);

  // mass column is constant when qtilde = 0 and sigma = 0
  SimConfig ch = cfg;
  ch.op.qtilde = 0.0;
  const Trajectory tch = run_path(ch, 0);
  const EnergyReport rch = energy_diagnostics(tch, ch);
  for (double mv : rch.mass) CHECK(mv == doctest::Approx(rch.mass[0]).epsilon(1e-14));
}

TEST_CASE("cut-off semantics: freeze and stopping-time monotonicity") {
  SimConfig cfg = base_config(1, 32);
  cfg.cutoff.enabled = true;
  cfg.record_norms = true;
  cfg.dt = 1e-4;
  cfg.t_end = 0.05;
  // mean-zero start with a large decaying part
  cfg.u0.coeffs[1] = 9.0;
  cfg.u0.coeffs[2] = 5.0;

  std::optional<double> prev_tn;
  for (double level : {1.0, 2.0, 4.0, 8.0}) {
    cfg.cutoff.level = level;
    const Trajectory traj = run_path(cfg, 0);
    REQUIRE(traj.stopping_time.has_value());
    if (prev_tn) CHECK(*traj.stopping_time >= *prev_tn);
    prev_tn = traj.stopping_time;
  }
}
