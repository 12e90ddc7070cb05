#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "thinshell/noise.hpp"
#include "thinshell/shell_solver.hpp"
#include "thinshell/sphere_solver.hpp"
#include "thinshell/study.hpp"

namespace thinshell {

// ---- result rows ----------------------------------------------------------------------

struct PropertyCheck {
  std::string name;
  double measured = 0;
  double threshold = 0;
  std::string relation = "<=";  // "<=", ">=", or "in [lo, hi]"
  bool pass = false;
  std::string detail;
};

inline PropertyCheck check_le(std::string name, double measured, double threshold,
                              std::string detail = "") {
  return {std::move(name), measured, threshold, "<=",
          std::isfinite(measured) && measured <= threshold, std::move(detail)};
}

inline PropertyCheck check_ge(std::string name, double measured, double threshold,
                              std::string detail = "") {
  return {std::move(name), measured, threshold, ">=",
          std::isfinite(measured) && measured >= threshold, std::move(detail)};
}

inline PropertyCheck check_band(std::string name, double measured, double lo, double hi,
                                std::string detail = "") {
  PropertyCheck c{std::move(name), measured, hi, "", false, std::move(detail)};
  c.relation = "in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  c.pass = std::isfinite(measured) && measured >= lo && measured <= hi;
  return c;
}

inline bool all_pass(const std::vector<PropertyCheck>& checks) {
  for (const PropertyCheck& c : checks)
    if (!c.pass) return false;
  return true;
}

inline void print_checks(std::ostream& os, const std::vector<PropertyCheck>& checks) {
  for (const PropertyCheck& c : checks) {
    char buf[160];
    if (c.relation.rfind("in ", 0) == 0)  // band relation already names both bounds
      std::snprintf(buf, sizeof buf, "[%s] %-38s measured %.6e  %s", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.measured, c.relation.c_str());
    else
      std::snprintf(buf, sizeof buf, "[%s] %-38s measured %.6e  %s %.6e", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.measured, c.relation.c_str(), c.threshold);
    os << buf;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << '\n';
  }
}

inline nlohmann::ordered_json checks_json(const std::vector<PropertyCheck>& checks) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const PropertyCheck& c : checks) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["measured"] = c.measured;
    j["relation"] = c.relation;
    j["threshold"] = c.threshold;
    j["pass"] = c.pass;
    if (!c.detail.empty()) j["detail"] = c.detail;
    arr.push_back(std::move(j));
  }
  return arr;
}

// ---- helpers --------------------------------------------------------------------------

namespace detail {

inline MatX<double> randn_mat(int rows, int cols, std::mt19937& gen) {
  std::normal_distribution<double> d;
  MatX<double> m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(gen);
  return m;
}

inline VecX<double> rand_poly_at(const VecX<double>& r, double rc, int deg, std::mt19937& gen) {
  std::normal_distribution<double> d;
  VecX<double> coef(deg + 1);
  for (int i = 0; i <= deg; ++i) coef[i] = d(gen);
  VecX<double> out = VecX<double>::Zero(r.size());
  for (int k = 0; k < r.size(); ++k) {
    double acc = 0;
    for (int i = deg; i >= 0; --i) acc = acc * (r[k] - rc) + coef[i];
    out[k] = acc;
  }
  return out;
}

// divergence-free impermeable field: toroidal modes with free polynomial
// profiles plus poloidal modes whose radial profile vanishes at both walls
inline ShellVector<double> manufactured_v_eps(const ShellGeometry<double>& geom,
                                              const SphereTransform<double>& T,
                                              std::mt19937& gen) {
  const double rc = 1 + geom.eps / 2;
  const int lmax = geom.grid.lmax;
  ShellVector<double> u(geom.nr, geom.nang());
  std::uniform_int_distribution<int> pick_l(1, lmax);
  for (int n = 0; n < 4; ++n) {
    const int l = pick_l(gen);
    std::uniform_int_distribution<int> pick_m(-l, l);
    const int m = pick_m(gen);
    const VecX<double> tp = rand_poly_at(geom.r, rc, std::min(3, geom.nr - 2), gen);
    u = u + toroidal_mode(geom, T, l, m, tp);
    if (geom.nr >= 5) {
      const VecX<double> core = rand_poly_at(geom.r, rc, std::min(2, geom.nr - 4), gen);
      const VecX<double> mask = (geom.r.array() - 1.0) * ((1.0 + geom.eps) - geom.r.array());
      u = u + poloidal_mode(geom, T, l, m, VecX<double>(mask.cwiseProduct(core)));
    }
  }
  return u;
}

struct ResidualTable {
  std::map<std::string, double> worst;
  void feed(const std::string& name, double residual) {
    double& w = worst[name];
    w = std::max(w, residual);
  }
};

}  // namespace detail

// ---- selector: operators ----------------------------------------------------------------
//
// Randomized exact-identity suite for the averaging/retraction algebra:
// M∘R = Id, projector idempotence and annihilation, mean/fluctuation
// orthogonality and Pythagoras, retraction norm scalings, the noise-lift
// scaling, the pointwise r-moment of fluctuations, and the dual pairing.

inline std::vector<PropertyCheck> check_operators(int cases, std::uint64_t seed,
                                                  double tol = 1e-9) {
  const int lmax = 10, nr = 8;
  const std::vector<double> sweep{0.4, 0.2, 0.1, 0.05};
  const SphereGrid<double> grid = SphereGrid<double>::make(lmax);
  const SphereTransform<double> T(grid);
  std::vector<ShellGeometry<double>> geoms;
  for (double eps : sweep) geoms.push_back(ShellGeometry<double>::make(eps, nr, grid));

  std::mt19937 gen(static_cast<unsigned>(splitmix64(seed ^ 0x6f70735full)));
  std::normal_distribution<double> d;
  detail::ResidualTable tab;

  for (int i = 0; i < cases; ++i) {
    const ShellGeometry<double>& geom = geoms[i % geoms.size()];
    const double eps = geom.eps;

    // raw nodal data: the identities are quadrature-exact for arbitrary fields
    ShellScalar<double> f(detail::randn_mat(nr, geom.nang(), gen));
    ShellVector<double> u(detail::randn_mat(nr, geom.nang(), gen),
                          detail::randn_mat(nr, geom.nang(), gen),
                          detail::randn_mat(nr, geom.nang(), gen));
    const ScalarFieldS2<double> phi = detail::randn_mat(grid.nlat, grid.nlon, gen);
    const TangentFieldS2<double> v(detail::randn_mat(grid.nlat, grid.nlon, gen),
                                   detail::randn_mat(grid.nlat, grid.nlon, gen));

    const double fs = f.vals.cwiseAbs().maxCoeff();
    const double us = std::max({u.ur.cwiseAbs().maxCoeff(), u.ulam.cwiseAbs().maxCoeff(),
                                u.uphi.cwiseAbs().maxCoeff()});

    // M∘R = Id, both flavours
    tab.feed("m_after_r_scalar",
             (average_m_scalar(geom, retract_scalar(geom, phi)) - phi).cwiseAbs().maxCoeff() /
                 phi.cwiseAbs().maxCoeff());
    const TangentFieldS2<double> back = average_mring(geom, retract_ring(geom, v));
    tab.feed("m_after_r_ring",
             std::max((back.ulam - v.ulam).cwiseAbs().maxCoeff(),
                      (back.uphi - v.uphi).cwiseAbs().maxCoeff()) /
                 std::max(v.ulam.cwiseAbs().maxCoeff(), v.uphi.cwiseAbs().maxCoeff()));

    // projector algebra on shell scalars
    const ShellScalar<double> mf = average_mhat(geom, f);
    const ShellScalar<double> nf = average_nhat(geom, f);
    tab.feed("mhat_idempotent",
             (average_mhat(geom, mf).vals - mf.vals).cwiseAbs().maxCoeff() / fs);
    tab.feed("nhat_annihilated", average_m_scalar(geom, nf).cwiseAbs().maxCoeff() / fs);

    // projector algebra on shell vectors
    const ShellDecomposition<double> dec = decompose(geom, u);
    const ShellVector<double> mm = average_mtilde(geom, dec.mean);
    const ShellVector<double> nn = average_ntilde(geom, dec.fluct);
    tab.feed("mtilde_idempotent",
             std::max((mm.ulam - dec.mean.ulam).cwiseAbs().maxCoeff(),
                      (mm.uphi - dec.mean.uphi).cwiseAbs().maxCoeff()) /
                 us);
    tab.feed("ntilde_idempotent",
             std::max((nn.ulam - dec.fluct.ulam).cwiseAbs().maxCoeff(),
                      (nn.uphi - dec.fluct.uphi).cwiseAbs().maxCoeff()) /
                 us);
    tab.feed("mtilde_of_fluct_zero",
             norm_shell(geom, average_mtilde(geom, dec.fluct)) / norm_shell(geom, u));

    // orthogonality and Pythagoras in L2(Q_eps)
    const double mn = inner_shell(geom, dec.mean, dec.fluct);
    const double m2 = inner_shell(geom, dec.mean, dec.mean);
    const double n2 = inner_shell(geom, dec.fluct, dec.fluct);
    const double u2 = inner_shell(geom, u, u);
    tab.feed("mean_fluct_orthogonal", std::abs(mn) / (std::sqrt(m2) * std::sqrt(n2)));
    tab.feed("pythagoras", std::abs(u2 - m2 - n2) / u2);

    // retraction norm scalings
    const ShellScalar<double> rphi = retract_scalar(geom, phi);
    const double sph2 = inner_s2(grid, phi, phi);
    tab.feed("retract_scalar_scaling",
             std::abs(inner_shell(geom, rphi.vals, rphi.vals) - eps * sph2) / (eps * sph2));
    const ShellVector<double> rv = retract_ring(geom, v);
    const double v2 = inner_s2(grid, v, v);
    tab.feed("retract_ring_scaling",
             std::abs(inner_shell(geom, rv, rv) - eps * v2) / (eps * v2));
    tab.feed("trace_energy_scaling",
             std::abs(m2 - eps * inner_s2(grid, dec.trace, dec.trace)) / u2);

    // noise lift: norm scaling and exact trace recovery
    DivFreeSpectral<double> gj(lmax);
    for (int k = 0; k < gj.psi.size(); ++k) gj.psi[k] = 0.2 * d(gen);
    const ShellVector<double> lifted = lift_noise(T, geom, gj);
    const double g2 = inner_h(gj, gj);
    tab.feed("noise_lift_scaling",
             std::abs(inner_shell(geom, lifted, lifted) - eps * g2) / (eps * g2));
    const TangentFieldS2<double> gback = average_mring(geom, lifted);
    const TangentFieldS2<double> gref = T.synth_curl(gj.as_stream());
    tab.feed("noise_lift_trace",
             std::max((gback.ulam - gref.ulam).cwiseAbs().maxCoeff(),
                      (gback.uphi - gref.uphi).cwiseAbs().maxCoeff()) /
                 std::max(gref.ulam.cwiseAbs().maxCoeff(), gref.uphi.cwiseAbs().maxCoeff()));

    // pointwise r-weighted radial moment of the fluctuation
    tab.feed("fluct_r_moment",
             std::max((geom.w1.transpose() * dec.fluct.ulam).cwiseAbs().maxCoeff(),
                      (geom.w1.transpose() * dec.fluct.uphi).cwiseAbs().maxCoeff()) /
                 (eps * us));

    // dual pairing against a band-limited sphere field
    SpectralScalar<double> a(lmax);
    for (int k = 0; k < a.coef.size(); ++k) a.coef[k] = d(gen);
    const ScalarFieldS2<double> phib = T.synthesize(a);
    tab.feed("dual_pairing",
             dual_pair_check(geom, f, phib) / (norm_shell(geom, f) * norm_s2(grid, phib)));
  }

  std::vector<PropertyCheck> out;
  for (const auto& [name, worst] : tab.worst) out.push_back(check_le("operators/" + name, worst, tol));
  return out;
}

// ---- selector: poincare (inequality suite) -------------------------------------------------
//
// Poincare with the exact constant 2*eps on manufactured divergence-free
// impermeable fields, the plain/weighted norm equivalence with constants
// [1, 9/4], and the Ladyzhenskaya L6 ratio reported across the eps sweep.

inline std::vector<PropertyCheck> check_inequalities(int cases_per_eps, std::uint64_t seed) {
  const int lmax = 10, nr = 8;
  const std::vector<double> sweep{0.4, 0.2, 0.1, 0.05};
  const SphereGrid<double> grid = SphereGrid<double>::make(lmax);
  const SphereTransform<double> T(grid);
  std::mt19937 gen(static_cast<unsigned>(splitmix64(seed ^ 0x706f696eull)));

  double poincare = 0, equiv_lo = 1e300, equiv_hi = 0, lady = 0;
  for (double eps : sweep) {
    const ShellGeometry<double> geom = ShellGeometry<double>::make(eps, nr, grid);
    for (int i = 0; i < cases_per_eps; ++i) {
      const ShellVector<double> u = detail::manufactured_v_eps(geom, T, gen);
      const ShellVector<double> nu = average_ntilde(geom, u);
      const ShellVector<double> cnu = curl3(geom, T, nu);
      poincare = std::max(poincare, norm_shell(geom, nu) / (2 * eps * norm_shell(geom, cnu)));
      lady = std::max(lady, norm_shell_lp(geom, nu, 6.0) / norm_shell(geom, cnu));

      const ShellVector<double> w(detail::randn_mat(nr, geom.nang(), gen),
                                  detail::randn_mat(nr, geom.nang(), gen),
                                  detail::randn_mat(nr, geom.nang(), gen));
      const double ratio = inner_shell_weighted(geom, w, w) / inner_shell(geom, w, w);
      equiv_lo = std::min(equiv_lo, ratio);
      equiv_hi = std::max(equiv_hi, ratio);
    }
  }

  std::vector<PropertyCheck> out;
  out.push_back(check_le("poincare/fluct_2eps_ratio", poincare, 1 + 1e-6));
  out.push_back(check_ge("poincare/norm_equiv_lower", equiv_lo, 1 - 1e-12));
  out.push_back(check_le("poincare/norm_equiv_upper", equiv_hi, 2.25 * (1 + 1e-12)));
  out.push_back(check_le("poincare/ladyzhenskaya_L6_ratio", lady, 10.0,
                         "eps-uniform constant, reported across the sweep"));
  return out;
}

// ---- selector: adjoint (exact-identity oracles) ---------------------------------------------

inline std::vector<PropertyCheck> check_identities(std::uint64_t seed, int lmax_eig = 31,
                                                   int l_cap = 20, double tol = 1e-8) {
  std::mt19937 gen(static_cast<unsigned>(splitmix64(seed ^ 0x61646a6full)));
  std::normal_distribution<double> d;
  std::vector<PropertyCheck> out;

  {  // Laplacian of a retracted scalar equals r^-3 times the surface Laplacian
    const SphereGrid<double> grid = SphereGrid<double>::make(6);
    const SphereTransform<double> T(grid);
    const ShellGeometry<double> geom = ShellGeometry<double>::make(0.2, 16, grid);
    SpectralScalar<double> a(grid.lmax);
    for (int k = 0; k < a.coef.size(); ++k) a.coef[k] = d(gen);
    const ScalarFieldS2<double> psi = T.synthesize(a);
    const Eigen::RowVectorX<double> lb = flatten(T.synthesize(laplace_beltrami(a)));
    const ShellScalar<double> lap = laplacian3(geom, T, retract_scalar(geom, psi));
    ShellScalar<double> want(geom.nr, geom.nang());
    for (int k = 0; k < geom.nr; ++k) want.vals.row(k) = lb / std::pow(geom.r[k], 3);
    const double rel =
        norm_shell(geom, ShellScalar<double>{MatX<double>(lap.vals - want.vals)}) /
        norm_shell(geom, want);
    out.push_back(check_le("adjoint/laplacian_of_lift", rel, tol));
  }

  {  // surface-Laplacian eigenvalues through the full grid round trip
    const SphereGrid<double> grid = SphereGrid<double>::make(lmax_eig);
    const SphereTransform<double> T(grid);
    double worst = 0;
    for (int l = 1; l <= l_cap; ++l)
      for (int m : {-l, -(l + 1) / 2, 0, l / 2, l}) {
        SpectralScalar<double> unit(lmax_eig);
        unit(l, m) = 1.0;
        const SpectralScalar<double> back = T.analyze(laplace_beltrami(T, T.synthesize(unit)));
        SpectralScalar<double> want(lmax_eig);
        want(l, m) = -static_cast<double>(l) * (l + 1);
        worst = std::max(worst,
                         (back.coef - want.coef).cwiseAbs().maxCoeff() / (double(l) * (l + 1)));
      }
    out.push_back(check_le("adjoint/beltrami_eigenvalues", worst, tol,
                           "l <= " + std::to_string(l_cap) + " at lmax = " +
                               std::to_string(lmax_eig)));
  }

  {  // curl'-Stokes adjointness: (curl' psi, v)_{S^2} = (psi, curl v)_{S^2}
    const SphereGrid<double> grid = SphereGrid<double>::make(12);
    const SphereTransform<double> T(grid);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      SpectralScalar<double> psi(grid.lmax), sa(grid.lmax), sb(grid.lmax);
      for (int k = 0; k < psi.coef.size(); ++k) {
        psi.coef[k] = d(gen);
        sa.coef[k] = d(gen);
        sb.coef[k] = d(gen);
      }
      const TangentFieldS2<double> v = T.synth_curl(sa) + T.synth_grad(sb);
      const double lhs = inner_s2(grid, T.synth_curl(psi), v);
      const double rhs = psi.coef.dot(T.analyze_curl(v).coef);
      worst = std::max(worst, std::abs(lhs - rhs) /
                                  (norm_s2(grid, T.synth_curl(psi)) * norm_s2(grid, v)));
    }
    out.push_back(check_le("adjoint/curl_stokes_pairing", worst, tol));
  }
  return out;
}

// ---- selector: energy (dynamics sanity) ------------------------------------------------------

inline std::vector<PropertyCheck> check_energy(std::uint64_t seed) {
  std::mt19937 gen(static_cast<unsigned>(splitmix64(seed ^ 0x656e6572ull)));
  std::normal_distribution<double> d;
  std::vector<PropertyCheck> out;

  {  // single spectral mode decays like exp(-nu l(l+1) t)
    SphereSolverConfig<double> cfg;
    cfg.nu = 0.1, cfg.dt = 1e-3, cfg.t_final = 1.0, cfg.lmax = 2, cfg.mode = RunMode::STOKES;
    DivFreeSpectral<double> u0(cfg.lmax);
    u0(2, 1) = 1.0;
    const SphereRun<double> run = run_sphere(cfg, u0);
    const double want = std::exp(-cfg.nu * 6.0 * cfg.t_final);
    out.push_back(check_le("energy/single_mode_decay",
                           std::abs(run.state.u(2, 1) - want) / want, 1e-3));
  }

  {  // rotational advection is energy neutral relative to the dissipation rate
    const SphereGrid<double> grid = SphereGrid<double>::make_dealiased(8);
    const SphereTransform<double> T(grid);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      DivFreeSpectral<double> u(8);
      for (int k = 0; k < u.psi.size(); ++k) u.psi[k] = d(gen);
      const double vn = norm(u, SphereNorm::V_SEMINORM);
      worst = std::max(worst, std::abs(inner_h(nonlinear_term(T, u), u)) / (0.1 * vn * vn));
    }
    out.push_back(check_le("energy/nonlinear_neutrality", worst, 1e-9,
                           "relative to nu*||curl u||^2 with nu = 0.1"));
  }

  {  // the discrete energy-identity residual is O(dt): halving dt halves it
    SphereSolverConfig<double> cfg;
    cfg.nu = 0.1, cfg.t_final = 0.2, cfg.lmax = 8, cfg.mode = RunMode::NSE;
    DivFreeSpectral<double> u0(cfg.lmax);
    u0(1, 0) = 0.8, u0(2, 1) = 0.5, u0(3, -2) = 0.4, u0(4, 2) = 0.3;
    cfg.dt = 2e-3;
    const double r1 = run_sphere(cfg, u0).energy_residual;
    cfg.dt = 1e-3;
    const double r2 = run_sphere(cfg, u0).energy_residual;
    out.push_back(check_band("energy/residual_halving_sphere", r1 / r2, 1.5, 2.5));
  }

  {  // same first-order behaviour for the shell ledger
    ShellSolverConfig<double> cfg;
    cfg.nu = 0.1, cfg.t_final = 0.2, cfg.eps = 0.2, cfg.lmax = 8, cfg.nr = 6;
    cfg.mode = RunMode::STOKES;
    DivFreeSpectral<double> u0(cfg.lmax);
    u0(1, 0) = 0.8, u0(2, 1) = 0.5, u0(3, -2) = 0.4;
    cfg.dt = 2e-3;
    const double r1 = run_shell(cfg, u0).energy_residual;
    cfg.dt = 1e-3;
    const double r2 = run_shell(cfg, u0).energy_residual;
    out.push_back(check_band("energy/residual_halving_shell", r1 / r2, 1.4, 2.6));
  }
  return out;
}

// ---- selector: moment (fluctuation moment diagnostics) ---------------------------------------

inline std::vector<PropertyCheck> check_moment(int moment_p, std::uint64_t seed) {
  const int lmax = 6, nr = 6;
  const std::vector<double> sweep{0.4, 0.2, 0.1};
  ShellSolverConfig<double> cfg;
  cfg.nu = 0.1, cfg.dt = 1e-3, cfg.t_final = 0.1, cfg.lmax = lmax, cfg.nr = nr;
  cfg.mode = RunMode::STOKES;
  cfg.noise = default_noise_model(lmax);
  const WienerPath<double> path =
      sample_path<double>(seed, 0, cfg.noise.mode_count(), cfg.dt, 100);
  const DivFreeSpectral<double> u0 = default_initial_state(lmax);

  std::vector<double> diag;
  for (double eps : sweep) {
    cfg.eps = eps;
    const ShellRun<double> run = run_shell(cfg, u0, &path);
    double sup = 0;
    for (const ShellSample<double>& s : run.samples)
      sup = std::max(sup, std::pow(s.fluct_energy, 0.5 * moment_p));
    diag.push_back(sup / std::pow(eps, 0.5 * moment_p));
  }
  std::string detail = "sup_t ||fluct||^p / eps^{p/2} per eps:";
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " %.3e", diag[i]);
    detail += buf;
  }
  const double growth = *std::max_element(diag.begin(), diag.end()) / diag.front();
  std::vector<PropertyCheck> out;
  out.push_back(check_le("moment/p" + std::to_string(moment_p) + "_bounded_across_sweep", growth,
                         10.0, detail));
  return out;
}

// ---- dispatch ---------------------------------------------------------------------------------

struct PropertySuiteConfig {
  std::string selector = "all";
  int cases = 25;
  std::uint64_t seed = 1;
  int moment_p = 2;
};

inline std::vector<PropertyCheck> run_property_suite(const PropertySuiteConfig& cfg) {
  if (cfg.cases < 1) throw config_error("property suite: cases must be at least 1");
  if (cfg.moment_p < 1) throw config_error("property suite: moment_p must be at least 1");
  std::vector<PropertyCheck> out;
  bool known = false;
  const auto want = [&](const char* sel) {
    const bool w = cfg.selector == sel || cfg.selector == "all";
    known = known || cfg.selector == sel;
    return w;
  };
  if (want("operators")) {
    auto c = check_operators(cfg.cases, cfg.seed);
    out.insert(out.end(), c.begin(), c.end());
  }
  if (want("poincare")) {
    auto c = check_inequalities(std::max(1, cfg.cases / 4), cfg.seed);
    out.insert(out.end(), c.begin(), c.end());
  }
  if (want("adjoint")) {
    auto c = check_identities(cfg.seed, 15, 10);  // desk-scale; acceptance pins 31/20
    out.insert(out.end(), c.begin(), c.end());
  }
  if (want("energy")) {
    auto c = check_energy(cfg.seed);
    out.insert(out.end(), c.begin(), c.end());
  }
  if (want("moment")) {
    auto c = check_moment(cfg.moment_p, cfg.seed);
    out.insert(out.end(), c.begin(), c.end());
  }
  if (!known && cfg.selector != "all")
    throw usage_error("unknown selector '" + cfg.selector +
                      "' (operators|poincare|adjoint|energy|moment|all)");
  return out;
}

}  // namespace thinshell
