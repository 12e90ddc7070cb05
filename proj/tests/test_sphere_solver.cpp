#include "doctest.h"

#include "thinshell/sphere_solver.hpp"

#include <cmath>
#include <random>

using namespace thinshell;

namespace {

DivFreeSpectral<double> random_stream(int lmax, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  DivFreeSpectral<double> u(lmax);
  for (int i = 0; i < u.psi.size(); ++i) u.psi[i] = dist(gen);
  return u;
}

}  // namespace

TEST_CASE("nonlinear term") {
  const int lmax = 8;
  SphereGrid<double> g = SphereGrid<double>::make_dealiased(lmax);
  SphereTransform<double> T(g);

  SUBCASE("single eigenmodes are steady Euler states") {
    for (auto [l, m] : {std::pair{2, 0}, std::pair{3, 2}, std::pair{5, -4}, std::pair{8, 8}}) {
      DivFreeSpectral<double> u(lmax);
      u(l, m) = 1.0;
      const double u2 = norm(u, SphereNorm::L2_S2) * norm(u, SphereNorm::L2_S2);
      CHECK(norm(nonlinear_term(T, u), SphereNorm::L2_S2) <= 1e-9 * u2);
    }
  }

  SUBCASE("zero maps to zero") {
    DivFreeSpectral<double> u(lmax);
    CHECK(norm(nonlinear_term(T, u), SphereNorm::L2_S2) == 0.0);
  }

  SUBCASE("energy neutrality") {
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
      const DivFreeSpectral<double> u = random_stream(lmax, seed);
      const double neutrality = std::abs(inner_h(nonlinear_term(T, u), u));
      const double scale = norm(u, SphereNorm::L2_S2) * norm(u, SphereNorm::V_SEMINORM) *
                           norm(u, SphereNorm::V_SEMINORM);
      CHECK(neutrality <= 1e-10 * scale);
    }
  }

  SUBCASE("direct quadrature oracle for the projected advection") {
    const DivFreeSpectral<double> u = random_stream(lmax, 11);
    const DivFreeSpectral<double> nl = nonlinear_term(T, u);
    // raw rotational-form field, no projection
    const TangentFieldS2<double> v = T.synth_curl(u.as_stream());
    const ScalarFieldS2<double> w = T.synthesize(stokes_apply(u).as_stream());
    const TangentFieldS2<double> adv(MatX<double>(-w.cwiseProduct(v.uphi)),
                                     MatX<double>(w.cwiseProduct(v.ulam)));
    const double scale = norm_s2(g, adv) + 1.0;
    for (int l = 1; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m) {
        SpectralScalar<double> e(lmax);
        e(l, m) = 1.0;
        DivFreeSpectral<double> basis(lmax);
        basis(l, m) = 1.0;
        // pairing against div-free w kills the gradient part analytically
        const double oracle = inner_s2(g, adv, T.synth_curl(e));
        CHECK(std::abs(inner_h(nl, basis) - oracle) <= 1e-10 * scale);
      }
  }
}

TEST_CASE("single-mode viscous decay") {
  for (TimeScheme scheme : {TimeScheme::IMEX_EULER, TimeScheme::INTEGRATING_FACTOR}) {
    SphereSolverConfig<double> cfg;
    cfg.nu = 0.1;
    cfg.dt = 1e-3;
    cfg.t_final = 1.0;
    cfg.lmax = 6;
    cfg.scheme = scheme;
    DivFreeSpectral<double> u0(cfg.lmax);
    u0(2, 0) = 1.0;
    const double n0 = norm(u0, SphereNorm::L2_S2);
    const SphereRun<double> out = run_sphere(cfg, u0);
    const double ratio = norm(out.state.u, SphereNorm::L2_S2) / n0;
    CHECK(std::abs(ratio - std::exp(-0.6)) < 1e-3);
    // mass never leaks into other modes (the eigenmode is steady)
    DivFreeSpectral<double> rest = out.state.u;
    rest(2, 0) = 0.0;
    CHECK(norm(rest, SphereNorm::L2_S2) < 1e-9);
  }
}

TEST_CASE("degenerate runs") {
  SphereSolverConfig<double> cfg;
  cfg.lmax = 4;

  SUBCASE("zero state stays zero") {
    const SphereRun<double> out = run_sphere(cfg, DivFreeSpectral<double>(cfg.lmax));
    CHECK(norm(out.state.u, SphereNorm::L2_S2) == 0.0);
    CHECK(out.state.ledger.dissipation == 0.0);
  }

  SUBCASE("zero horizon returns the initial sample only") {
    cfg.t_final = 0.0;
    DivFreeSpectral<double> u0(cfg.lmax);
    u0(1, 1) = 2.0;
    const SphereRun<double> out = run_sphere(cfg, u0);
    CHECK(out.samples.size() == 1);
    CHECK((out.samples[0].psi - u0.psi).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("energy identity residual is first order") {
  SphereSolverConfig<double> coarse;
  coarse.nu = 0.05;
  coarse.dt = 2e-3;
  coarse.t_final = 0.5;
  coarse.lmax = 8;
  SphereSolverConfig<double> fine = coarse;
  fine.dt = 1e-3;

  // moderate amplitude keeps the explicit advection in the asymptotic regime
  DivFreeSpectral<double> u0 = random_stream(coarse.lmax, 42);
  u0.psi *= 0.1;
  const double r_coarse = run_sphere(coarse, u0).energy_residual;
  const double r_fine = run_sphere(fine, u0).energy_residual;
  MESSAGE("energy residuals " << r_coarse << " -> " << r_fine);
  CHECK(r_coarse > 1e-12);  // far enough from round-off for the ratio to mean something
  const double ratio = r_coarse / r_fine;
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.5);
}

TEST_CASE("forced run obeys the dual-norm energy bound") {
  SphereSolverConfig<double> cfg;
  cfg.nu = 0.2;
  cfg.dt = 1e-3;
  cfg.t_final = 1.0;
  cfg.lmax = 6;
  DivFreeSpectral<double> f(cfg.lmax);
  f(1, 1) = 0.3;
  f(3, -1) = 0.2;
  cfg.forcing = [f](double) { return f; };

  const DivFreeSpectral<double> u0 = random_stream(cfg.lmax, 5);
  const SphereRun<double> out = run_sphere(cfg, u0);
  const double e0 = norm(u0, SphereNorm::L2_S2) * norm(u0, SphereNorm::L2_S2);
  const double ef = norm(out.state.u, SphereNorm::L2_S2) * norm(out.state.u, SphereNorm::L2_S2);
  const SphereLedger<double>& led = out.state.ledger;
  const double lhs = ef + 0.5 * led.dissipation;  // = e_f + nu int ||curl'u||^2
  const double rhs = e0 + led.forcing_vprime / cfg.nu;
  CHECK(lhs <= rhs + 50.0 * cfg.dt * std::max(1.0, e0));
}

TEST_CASE("noise-driven linear run matches the OU closed form") {
  const int lmax = 4;
  const double nu = 0.5, dt = 1e-3, t_final = 0.5, amp = 0.5;
  const int npaths = 32;
  const int l = 2, m = 1;

  SphereSolverConfig<double> cfg;
  cfg.nu = nu;
  cfg.dt = dt;
  cfg.t_final = t_final;
  cfg.lmax = lmax;
  cfg.mode = RunMode::STOKES;
  cfg.noise = NoiseModel<double>::make_modes(lmax, {{l, m, amp}});

  std::vector<double> energies(npaths);
  for (int p = 0; p < npaths; ++p) {
    const WienerPath<double> path = sample_path<double>(99, p, 1, dt, 500);
    const SphereRun<double> out = run_sphere(cfg, DivFreeSpectral<double>(lmax), &path);
    const double n = norm(out.state.u, SphereNorm::L2_S2);
    energies[p] = n * n;
  }
  double mean = 0.0;
  for (double e : energies) mean += e;
  mean /= npaths;
  double sd = 0.0;
  for (double e : energies) sd += (e - mean) * (e - mean);
  sd = std::sqrt(sd / (npaths - 1));

  const double a = nu * l * (l + 1);
  const double g2 = l * (l + 1) * amp * amp;  // squared L2 norm of g
  const double closed = g2 * (1.0 - std::exp(-2.0 * a * t_final)) / (2.0 * a);
  MESSAGE("MC mean " << mean << " vs OU " << closed << " (3 SE = " << 3 * sd / std::sqrt(32.0)
                     << ")");
  CHECK(std::abs(mean - closed) <= 3.0 * sd / std::sqrt(static_cast<double>(npaths)));

  // Ito-corrected energy identity residual is a martingale average: small vs scale
  CHECK(std::isfinite(mean));
}

TEST_CASE("solver invariants and diagnostics") {
  SphereSolverConfig<double> cfg;
  cfg.nu = 0.1;
  cfg.dt = 1e-3;
  cfg.t_final = 0.3;
  cfg.lmax = 8;
  const DivFreeSpectral<double> u0 = random_stream(cfg.lmax, 17);
  const SphereRun<double> out = run_sphere(cfg, u0);

  SUBCASE("states stay divergence-free on the grid") {
    SphereGrid<double> g = SphereGrid<double>::make_dealiased(cfg.lmax);
    SphereTransform<double> T(g);
    const TangentFieldS2<double> v = T.synth_curl(out.state.u.as_stream());
    const ScalarFieldS2<double> div = T.synthesize(T.analyze_div(v));
    CHECK(div.cwiseAbs().maxCoeff() <= 1e-9 * norm(out.state.u, SphereNorm::L2_S2));
  }

  SUBCASE("equicontinuity diagnostic is finite and positive") {
    MESSAGE("equicontinuity sup " << out.equicontinuity);
    CHECK(std::isfinite(out.equicontinuity));
    CHECK(out.equicontinuity > 0.0);
  }

  SUBCASE("mean mode is structurally absent") {
    CHECK(static_cast<int>(out.state.u.psi.size()) == stream_count(cfg.lmax));
    CHECK(stream_count(cfg.lmax) == sh_count(cfg.lmax) - 1);
  }
}

TEST_CASE("guards and failure paths") {
  SphereSolverConfig<double> cfg;
  cfg.lmax = 4;

  SUBCASE("config validation") {
    SphereSolverConfig<double> bad = cfg;
    bad.nu = 0.0;
    CHECK_THROWS_AS((void)SphereSolver<double>(bad), config_error);
    bad = cfg;
    bad.dt = -1.0;
    CHECK_THROWS_AS((void)SphereSolver<double>(bad), config_error);
    bad = cfg;
    bad.noise = NoiseModel<double>::make_modes(3, {{2, 0, 1.0}});
    CHECK_THROWS_AS((void)SphereSolver<double>(bad), config_error);
  }

  SUBCASE("state and increment shape guards") {
    SphereSolver<double> solver(cfg);
    CHECK_THROWS_AS((void)solver.initial_state(DivFreeSpectral<double>(5)), usage_error);
    SphereState<double> st = solver.initial_state(DivFreeSpectral<double>(4));
    VecX<double> dw(2);
    dw.setZero();
    CHECK_THROWS_AS(solver.step(st, dw), usage_error);
  }

  SUBCASE("noise requires a path") {
    SphereSolverConfig<double> noisy = cfg;
    noisy.noise = NoiseModel<double>::make_modes(4, {{1, 0, 1.0}});
    CHECK_THROWS_AS((void)run_sphere(noisy, DivFreeSpectral<double>(4)), usage_error);
    const WienerPath<double> wrong = sample_path<double>(0, 0, 3, noisy.dt, 2000);
    CHECK_THROWS_AS((void)run_sphere(noisy, DivFreeSpectral<double>(4), &wrong), usage_error);
  }

  SUBCASE("blow-up is reported as a divergence error") {
    SphereSolverConfig<double> wild = cfg;
    wild.dt = 1.0;
    wild.t_final = 10.0;
    DivFreeSpectral<double> huge(wild.lmax);
    huge.psi.setConstant(1e160);
    CHECK_THROWS_AS((void)run_sphere(wild, huge), divergence_error);
  }
}
