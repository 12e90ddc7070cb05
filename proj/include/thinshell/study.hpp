#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "thinshell/noise.hpp"
#include "thinshell/shell_solver.hpp"
#include "thinshell/sphere_solver.hpp"

#ifndef THINSHELL_GIT_HASH
#define THINSHELL_GIT_HASH "unknown"
#endif

namespace thinshell {

// ---- configuration ------------------------------------------------------------------
//
// One StudyConfig describes a full thin-shell convergence sweep: a sphere
// reference run plus one shell run per (eps, path) cell, all sharing dt and,
// in stochastic mode, the same Wiener increments per path id.

struct StudyConfig {
  std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05};
  int lmax = 10;
  int nr = 6;
  double nu = 0.1;
  double dt = 1e-3;
  double t_final = 0.5;
  RunMode mode = RunMode::STOKES;
  bool stochastic = false;
  int paths = 1;           // Monte Carlo count (stochastic mode)
  std::uint64_t seed = 0;  // counter-based; identical seeds reproduce bit-for-bit
  int moment_p = 2;        // exponent of the fluctuation moment diagnostic
  double init_fluct = 0;   // relative O(eps) pollution of the lifted initial state
  bool self_consistency = false;  // replace shell dynamics by the exact lift (pipeline test)
  int workers = 1;                // scheduling only; never affects results
  std::string out_dir = ".";
};

inline const char* to_string(RunMode m) { return m == RunMode::NSE ? "nse" : "stokes"; }

inline RunMode run_mode_from_string(const std::string& s) {
  if (s == "nse") return RunMode::NSE;
  if (s == "stokes") return RunMode::STOKES;
  throw config_error("unknown run mode '" + s + "' (expected stokes|nse)");
}

inline void validate(const StudyConfig& c) {
  if (c.eps_list.empty()) throw config_error("study: eps_list must not be empty");
  for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
    if (!(c.eps_list[i] > 0) || !(c.eps_list[i] < 0.5))
      throw config_error("study: every eps must lie in (0, 1/2)");
    if (i > 0 && !(c.eps_list[i] < c.eps_list[i - 1]))
      throw config_error("study: eps_list must be strictly decreasing");
  }
  if (c.lmax < 1) throw config_error("study: lmax must be at least 1");
  if (c.nr < 6) throw config_error("study: need nr >= 6 radial nodes");
  if (!(c.nu > 0)) throw config_error("study: nu must be positive");
  if (!(c.dt > 0)) throw config_error("study: dt must be positive");
  if (!(c.t_final > 0)) throw config_error("study: t_final must be positive");
  if (c.paths < 1) throw config_error("study: paths must be at least 1");
  if (c.moment_p < 1) throw config_error("study: moment_p must be at least 1");
  if (!(c.init_fluct >= 0)) throw config_error("study: init_fluct must be nonnegative");
  if (c.workers < 1) throw config_error("study: workers must be at least 1");
}

// `include_process_fields = false` drops the knobs that may legitimately differ
// between byte-identical runs (worker count, output location).
inline nlohmann::ordered_json study_config_json(const StudyConfig& c,
                                                bool include_process_fields = true) {
  nlohmann::ordered_json j;
  j["eps_list"] = c.eps_list;
  j["lmax"] = c.lmax;
  j["nr"] = c.nr;
  j["nu"] = c.nu;
  j["dt"] = c.dt;
  j["t_final"] = c.t_final;
  j["mode"] = to_string(c.mode);
  j["stochastic"] = c.stochastic;
  j["paths"] = c.paths;
  j["seed"] = c.seed;
  j["moment_p"] = c.moment_p;
  j["init_fluct"] = c.init_fluct;
  j["self_consistency"] = c.self_consistency;
  if (include_process_fields) {
    j["workers"] = c.workers;
    j["out_dir"] = c.out_dir;
  }
  return j;
}

inline StudyConfig study_config_parse(const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("study config: expected a JSON object");
  static const std::vector<std::string> known = {
      "eps_list", "lmax",     "nr",   "nu",       "dt",         "t_final",
      "mode",     "stochastic", "paths", "seed",   "moment_p",   "init_fluct",
      "self_consistency",      "workers", "out_dir"};
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw config_error("study config: unknown field '" + item.key() + "'");
  StudyConfig c;
  try {
    c.eps_list = j.value("eps_list", c.eps_list);
    c.lmax = j.value("lmax", c.lmax);
    c.nr = j.value("nr", c.nr);
    c.nu = j.value("nu", c.nu);
    c.dt = j.value("dt", c.dt);
    c.t_final = j.value("t_final", c.t_final);
    if (j.contains("mode")) c.mode = run_mode_from_string(j.at("mode").get<std::string>());
    c.stochastic = j.value("stochastic", c.stochastic);
    c.paths = j.value("paths", c.paths);
    c.seed = j.value("seed", c.seed);
    c.moment_p = j.value("moment_p", c.moment_p);
    c.init_fluct = j.value("init_fluct", c.init_fluct);
    c.self_consistency = j.value("self_consistency", c.self_consistency);
    c.workers = j.value("workers", c.workers);
    c.out_dir = j.value("out_dir", c.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("study config: ") + e.what());
  }
  validate(c);
  return c;
}

// ---- problem data ---------------------------------------------------------------------
//
// The sphere-side data (u0, f, noise modes); the shell data is always the lift.

struct StudyProblem {
  DivFreeSpectral<double> u0{1};
  std::function<DivFreeSpectral<double>(double)> forcing;  // empty = unforced
  NoiseModel<double> noise;                                // consulted when stochastic
};

inline DivFreeSpectral<double> default_initial_state(int lmax) {
  DivFreeSpectral<double> u0(lmax);
  const struct {
    int l, m;
    double a;
  } modes[] = {{1, 0, 0.6}, {2, 1, 0.4}, {2, -1, 0.3}, {3, 2, 0.2}};
  for (const auto& md : modes)
    if (md.l <= lmax) u0(md.l, md.m) = md.a;
  return u0;
}

inline NoiseModel<double> default_noise_model(int lmax) {
  std::vector<NoiseMode<double>> modes;
  modes.push_back({1, 0, 0.3});
  if (lmax >= 2) {
    modes.push_back({2, 1, 0.2});
    modes.push_back({2, -2, 0.15});
  }
  return NoiseModel<double>::make_modes(lmax, modes);
}

inline StudyProblem default_problem(const StudyConfig& cfg) {
  StudyProblem p;
  p.u0 = default_initial_state(cfg.lmax);
  if (cfg.stochastic) p.noise = default_noise_model(cfg.lmax);
  return p;
}

// Lifted initial state, optionally polluted: the lift is augmented by a fixed
// divergence-free fluctuation (zero r-weighted radial mean, projected onto the
// constrained space) normalized so the relative perturbation is fluct_amp*eps.
// This exercises data that is eps-close to, but not exactly on, the mean sector.
inline ShellState<double> study_initial_state(const ShellSolver<double>& solver,
                                              const DivFreeSpectral<double>& u0,
                                              double fluct_amp) {
  ShellState<double> st = solver.state_from_sphere(u0);
  if (fluct_amp == 0) return st;

  const int lmax = solver.config().lmax;
  SpectralScalar<double> h(lmax);
  if (lmax >= 2) h(2, 1) = 1.0;
  if (lmax >= 3) h(3, -2) = 0.7;
  if (lmax < 2) h(1, 0) = 1.0;
  const DivFreeSpectral<double> zero(lmax);
  const ShellVector<double> eta =
      lift_noise_polluted(solver.transform(), solver.geometry(), zero, h);

  const ShellDual<double> d = solver.galerkin_pair(eta);
  const ShellBasis<double>& basis = solver.basis();
  ShellState<double> fl = solver.initial_state();
  for (int l = 1; l <= lmax; ++l) {
    const int off = stream_index(l, -l);
    const int w = 2 * l + 1;
    fl.zt.middleCols(off, w) = basis.mass_llt_t[l].solve(d.ft.middleCols(off, w));
    fl.zp.middleCols(off, w) = basis.mass_llt_p[l].solve(d.fp.middleCols(off, w));
  }
  const double e_fl = solver.energy(fl);
  const double e_0 = solver.energy(st);
  if (!(e_fl > 0)) return st;
  const double scale = fluct_amp * solver.geometry().eps * std::sqrt(e_0 / e_fl);
  st.zt += scale * fl.zt;
  st.zp += scale * fl.zp;
  return st;
}

// ---- rate fitting -----------------------------------------------------------------------

struct RateFit {
  double rate = 0;
  double residual = 0;  // RMS of log-error about the fitted line
  bool fitted = false;
  std::string note;  // "ok" | "no convergence" | "fit skipped: ..."
};

inline RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() != err.size()) throw usage_error("fit_rate: eps and err sizes differ");
  RateFit f;
  for (std::size_t i = 0; i < err.size(); ++i)
    if (!(eps[i] > 0) || !(err[i] > 0) || !std::isfinite(err[i])) {
      f.note = "fit skipped: non-positive (eps, err) pair";
      return f;
    }
  const int n = static_cast<int>(eps.size());
  if (n < 3) {
    f.note = "fit skipped: needs at least 3 (eps, err) pairs";
    return f;
  }
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += std::log(eps[i]);
    my += std::log(err[i]);
  }
  mx /= n, my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double dx = std::log(eps[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(err[i]) - my);
  }
  if (!(sxx > 0)) {
    f.note = "fit skipped: eps values are not distinct";
    return f;
  }
  f.rate = sxy / sxx;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double pred = my + f.rate * (std::log(eps[i]) - mx);
    const double r = std::log(err[i]) - pred;
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  f.fitted = true;
  f.note = std::abs(f.rate) < 0.05 ? "no convergence" : "ok";
  return f;
}

// ---- per-cell results ----------------------------------------------------------------------

// One (eps, path) cell: the error time series of the shell run against the
// shared sphere reference, plus the scalar summaries the report aggregates.
struct CellSeries {
  double eps = 0;
  int path_id = 0;
  bool ok = false;
  std::string failure;  // label when !ok ("diverged at step N", ...)

  std::vector<double> t;
  std::vector<double> err_l2;         // || alpha_eps(t) - u(t) ||_{L2(S2)}
  std::vector<double> err_dainv;      // D(A^{-1}) distance of the stream parts
  std::vector<double> energy_sphere;  // || u(t) ||^2_{L2(S2)}
  std::vector<double> energy_mean;    // || Mtilde u ||^2 per unit thickness
  std::vector<double> energy_fluct;   // || Ntilde u ||^2 per unit thickness

  double err_l2_sup = 0;
  double err_l2_time2 = 0;  // int_0^T err_l2(t)^2 dt (trapezoid)
  double err_dainv_sup = 0;
  double fluct_sup = 0;     // sup_t || Ntilde u ||^2 (raw shell norm)
  double fluct_diss = 0;    // nu * int || curl Ntilde u ||^2 dt (raw)
  double moment_sup = 0;    // sup_t || Ntilde u ||^p
  double dual_ratio = 0;    // max_t err_dainv / err_l2 (spectral bound <= 1/2)
  double shell_energy_residual = 0;
};

// Per-eps aggregation over paths. "ok" requires every path to have finished;
// failed cells carry labels and the eps is excluded from the rate fit.
struct EpsSummary {
  double eps = 0;
  bool ok = false;
  int paths_ok = 0;
  std::vector<std::string> failures;
  double err_l2_sup = 0;     // mean over paths of sup_t err_l2
  double err_l2_time = 0;    // sqrt(mean over paths of int err_l2^2 dt)
  double err_dainv_sup = 0;  // mean over paths of sup_t err_dainv
  double fluct_sup = 0;      // mean of sup_t ||Ntilde u||^2
  double fluct_diss = 0;     // mean of nu int ||curl Ntilde u||^2 dt
  double fluct_energy = 0;   // fluct_sup + fluct_diss (energy-inequality composite)
  double moment_diag = 0;    // mean of sup_t ||Ntilde u||^p / eps^{p/2}
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<EpsSummary> summaries;  // one per eps, in config order
  std::vector<CellSeries> cells;      // all (eps, path) series, CSV row source
  RateFit rate_l2_sup, rate_l2_time, rate_dainv;
  double dual_ratio_max = 0;
  double sphere_energy_residual = 0;  // max over reference runs
  double sphere_equicontinuity = 0;   // max over reference runs
};

// ---- study internals --------------------------------------------------------------------

namespace detail {

// Fixed-size worker pool over [0, n); results must be keyed by index so that
// scheduling cannot influence the aggregate. Exceptions are re-thrown in index
// order after the join.
template <class F>
void parallel_for(int n, int workers, F&& body) {
  workers = std::max(1, std::min(workers, n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

inline SphereSolverConfig<double> sphere_config(const StudyConfig& c, const StudyProblem& prob) {
  SphereSolverConfig<double> s;
  s.nu = c.nu;
  s.dt = c.dt;
  s.t_final = c.t_final;
  s.lmax = c.lmax;
  s.mode = c.mode;
  s.scheme = TimeScheme::IMEX_EULER;
  s.forcing = prob.forcing;
  if (c.stochastic) s.noise = prob.noise;
  return s;
}

inline ShellSolverConfig<double> shell_config(const StudyConfig& c, const StudyProblem& prob,
                                              double eps) {
  ShellSolverConfig<double> s;
  s.nu = c.nu;
  s.dt = c.dt;
  s.t_final = c.t_final;
  s.eps = eps;
  s.lmax = c.lmax;
  s.nr = c.nr;
  s.mode = c.mode;
  s.forcing = prob.forcing;
  if (c.stochastic) s.noise = prob.noise;
  return s;
}

inline void fill_series(CellSeries& cell, const StudyConfig& cfg, const ShellRun<double>& run,
                        const SphereRun<double>& ref) {
  if (run.samples.size() != ref.samples.size())
    throw usage_error("study: shell and sphere sample grids do not align");
  const std::size_t n = run.samples.size();
  cell.t.reserve(n), cell.err_l2.reserve(n), cell.err_dainv.reserve(n);
  cell.energy_sphere.reserve(n), cell.energy_mean.reserve(n), cell.energy_fluct.reserve(n);
  std::vector<double> fc2(n);
  const double half_p = 0.5 * cfg.moment_p;
  for (std::size_t i = 0; i < n; ++i) {
    const ShellSample<double>& s = run.samples[i];
    if (std::abs(s.t - ref.times[i]) > 1e-12 * (1.0 + std::abs(ref.times[i])))
      throw usage_error("study: shell and sphere sample times drifted apart");
    DivFreeSpectral<double> diff = s.trace_psi;
    diff.psi -= ref.samples[i].psi;
    const double e_stream = norm(diff, SphereNorm::L2_S2);
    const double e_grad = norm(s.trace_chi, SphereNorm::L2_S2);
    const double el2 = std::hypot(e_stream, e_grad);
    const double eda = norm(diff, SphereNorm::DA_INV);

    cell.t.push_back(s.t);
    cell.err_l2.push_back(el2);
    cell.err_dainv.push_back(eda);
    cell.energy_sphere.push_back(inner_h(ref.samples[i], ref.samples[i]));
    cell.energy_mean.push_back(s.mean_energy / cell.eps);
    cell.energy_fluct.push_back(s.fluct_energy / cell.eps);
    fc2[i] = s.fluct_curl2;

    cell.err_l2_sup = std::max(cell.err_l2_sup, el2);
    cell.err_dainv_sup = std::max(cell.err_dainv_sup, eda);
    cell.fluct_sup = std::max(cell.fluct_sup, s.fluct_energy);
    cell.moment_sup = std::max(cell.moment_sup, std::pow(s.fluct_energy, half_p));
    if (el2 > 0) cell.dual_ratio = std::max(cell.dual_ratio, eda / el2);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dt = cell.t[i + 1] - cell.t[i];
    cell.err_l2_time2 +=
        0.5 * dt * (cell.err_l2[i] * cell.err_l2[i] + cell.err_l2[i + 1] * cell.err_l2[i + 1]);
    cell.fluct_diss += 0.5 * dt * cfg.nu * (fc2[i] + fc2[i + 1]);
  }
  cell.shell_energy_residual = run.energy_residual;
}

inline CellSeries run_study_cell(const StudyConfig& cfg, const StudyProblem& prob, double eps,
                                 int path_id, const WienerPath<double>* path,
                                 const SphereRun<double>& ref, int stride) {
  CellSeries cell;
  cell.eps = eps;
  cell.path_id = path_id;
  try {
    const ShellSolver<double> solver(shell_config(cfg, prob, eps));
    ShellRun<double> run;
    if (cfg.self_consistency) {
      // bypass the shell dynamics: lift each reference sample exactly and push
      // it through the same trace/metric pipeline (errors must vanish)
      run.samples.reserve(ref.samples.size());
      for (const DivFreeSpectral<double>& u : ref.samples) {
        ShellState<double> st = solver.state_from_sphere(u);
        ShellSample<double> s = sample_state(solver, st);
        s.t = ref.times[run.samples.size()];
        run.samples.push_back(std::move(s));
      }
    } else {
      ShellState<double> st = study_initial_state(solver, prob.u0, cfg.init_fluct);
      run = run_shell_from(solver, std::move(st), path, stride);
    }
    fill_series(cell, cfg, run, ref);
    cell.ok = true;
  } catch (const divergence_error& e) {
    cell.ok = false;
    cell.failure = "diverged at step " + std::to_string(e.step);
  }
  return cell;
}

}  // namespace detail

// ---- the study ------------------------------------------------------------------------------

inline ConvergenceReport run_convergence_study(const StudyConfig& cfg_in,
                                               const StudyProblem& prob) {
  StudyConfig cfg = cfg_in;
  validate(cfg);
  if (!cfg.stochastic) cfg.paths = 1;  // deterministic replicates would be identical
  if (prob.u0.lmax != cfg.lmax) throw config_error("study: u0 truncation does not match lmax");
  if (cfg.stochastic && prob.noise.mode_count() == 0)
    throw config_error("study: stochastic mode needs at least one noise mode");

  const long nsteps = std::lround(cfg.t_final / cfg.dt);
  const int stride = static_cast<int>(std::max<long>(1, nsteps / 64));
  const int neps = static_cast<int>(cfg.eps_list.size());
  const int npaths = cfg.paths;
  const int nmodes = cfg.stochastic ? prob.noise.mode_count() : 0;

  // phase 1: one Wiener path and one sphere reference per path id, shared by
  // every eps (the common-noise coupling that makes pathwise errors meaningful)
  std::vector<WienerPath<double>> paths(static_cast<std::size_t>(npaths));
  std::vector<std::optional<SphereRun<double>>> refs(static_cast<std::size_t>(npaths));
  std::vector<std::string> ref_failure(static_cast<std::size_t>(npaths));
  detail::parallel_for(npaths, cfg.workers, [&](int p) {
    if (nmodes > 0)
      paths[p] = sample_path<double>(cfg.seed, static_cast<std::uint64_t>(p), nmodes, cfg.dt,
                                     static_cast<int>(nsteps));
    try {
      refs[p] = run_sphere(detail::sphere_config(cfg, prob), prob.u0,
                           nmodes > 0 ? &paths[p] : nullptr, stride);
    } catch (const divergence_error& e) {
      ref_failure[p] = "sphere reference diverged at step " + std::to_string(e.step);
    }
  });

  // phase 2: the (eps, path) cells
  std::vector<CellSeries> cells(static_cast<std::size_t>(neps) * npaths);
  detail::parallel_for(neps * npaths, cfg.workers, [&](int i) {
    const int e = i / npaths;
    const int p = i % npaths;
    if (!ref_failure[p].empty()) {
      cells[i].eps = cfg.eps_list[e];
      cells[i].path_id = p;
      cells[i].ok = false;
      cells[i].failure = ref_failure[p];
      return;
    }
    cells[i] = detail::run_study_cell(cfg, prob, cfg.eps_list[e], p,
                                      nmodes > 0 ? &paths[p] : nullptr, *refs[p], stride);
  });

  // aggregation, in fixed (eps, path) order regardless of scheduling
  ConvergenceReport rep;
  rep.config = cfg;
  rep.summaries.resize(static_cast<std::size_t>(neps));
  for (int e = 0; e < neps; ++e) {
    EpsSummary& sum = rep.summaries[e];
    sum.eps = cfg.eps_list[e];
    for (int p = 0; p < npaths; ++p) {
      const CellSeries& cell = cells[static_cast<std::size_t>(e) * npaths + p];
      if (!cell.ok) {
        sum.failures.push_back("path " + std::to_string(p) + ": " + cell.failure);
        continue;
      }
      ++sum.paths_ok;
      sum.err_l2_sup += cell.err_l2_sup;
      sum.err_l2_time += cell.err_l2_time2;
      sum.err_dainv_sup += cell.err_dainv_sup;
      sum.fluct_sup += cell.fluct_sup;
      sum.fluct_diss += cell.fluct_diss;
      sum.moment_diag += cell.moment_sup;
      rep.dual_ratio_max = std::max(rep.dual_ratio_max, cell.dual_ratio);
    }
    sum.ok = sum.paths_ok == npaths;
    if (sum.paths_ok > 0) {
      const double inv = 1.0 / sum.paths_ok;
      sum.err_l2_sup *= inv;
      sum.err_l2_time = std::sqrt(sum.err_l2_time * inv);
      sum.err_dainv_sup *= inv;
      sum.fluct_sup *= inv;
      sum.fluct_diss *= inv;
      sum.fluct_energy = sum.fluct_sup + sum.fluct_diss;
      sum.moment_diag = sum.moment_diag * inv / std::pow(sum.eps, 0.5 * cfg.moment_p);
    }
  }
  rep.cells = std::move(cells);

  for (int p = 0; p < npaths; ++p)
    if (refs[p]) {
      rep.sphere_energy_residual = std::max(rep.sphere_energy_residual, refs[p]->energy_residual);
      rep.sphere_equicontinuity = std::max(rep.sphere_equicontinuity, refs[p]->equicontinuity);
    }

  std::vector<double> eps_ok, e_sup, e_time, e_da;
  for (const EpsSummary& s : rep.summaries)
    if (s.ok) {
      eps_ok.push_back(s.eps);
      e_sup.push_back(s.err_l2_sup);
      e_time.push_back(s.err_l2_time);
      e_da.push_back(s.err_dainv_sup);
    }
  rep.rate_l2_sup = fit_rate(eps_ok, e_sup);
  rep.rate_l2_time = fit_rate(eps_ok, e_time);
  rep.rate_dainv = fit_rate(eps_ok, e_da);
  return rep;
}

inline ConvergenceReport run_convergence_study(const StudyConfig& cfg) {
  return run_convergence_study(cfg, default_problem(cfg));
}

// ---- emission ---------------------------------------------------------------------------------

inline nlohmann::ordered_json rate_json(const RateFit& f) {
  nlohmann::ordered_json j;
  j["fitted"] = f.fitted;
  j["rate"] = f.rate;
  j["residual"] = f.residual;
  j["note"] = f.note;
  return j;
}

inline nlohmann::ordered_json report_json(const ConvergenceReport& rep) {
  using J = nlohmann::ordered_json;
  J j;
  j["study"] = "thin-shell-limit convergence";
  J meta;
  meta["git_hash"] = THINSHELL_GIT_HASH;
  meta["seed"] = rep.config.seed;
  meta["convergence_caveat"] =
      "coupled pathwise probe: shell and sphere runs share one Wiener path per path id; "
      "the underlying limit theorems assert convergence without a rate (deterministic case "
      "in C([0,T];V'), stochastic case in mean square), so the fitted rate is descriptive";
  J tol;
  tol["rate_fit_min_points"] = 3;
  tol["no_convergence_band"] = 0.05;
  meta["tolerances"] = tol;
  meta["config"] = study_config_json(rep.config, false);
  j["metadata"] = meta;

  J cells = J::array();
  for (const EpsSummary& s : rep.summaries) {
    J c;
    c["eps"] = s.eps;
    c["ok"] = s.ok;
    c["paths_ok"] = s.paths_ok;
    if (!s.failures.empty()) c["failures"] = s.failures;
    if (s.paths_ok > 0) {
      c["err_l2_sup"] = s.err_l2_sup;
      c["err_l2_time"] = s.err_l2_time;
      c["err_dainv_sup"] = s.err_dainv_sup;
      c["fluct_sup"] = s.fluct_sup;
      c["fluct_diss"] = s.fluct_diss;
      c["fluct_energy"] = s.fluct_energy;
      c["moment_diag"] = s.moment_diag;
    }
    cells.push_back(std::move(c));
  }
  j["cells"] = cells;

  J rates;
  rates["l2_sup"] = rate_json(rep.rate_l2_sup);
  rates["l2_time"] = rate_json(rep.rate_l2_time);
  rates["dainv_sup"] = rate_json(rep.rate_dainv);
  j["rates"] = rates;

  J mc;
  mc["max_dainv_over_l2"] = rep.dual_ratio_max;
  mc["spectral_bound"] = 0.5;
  j["metric_consistency"] = mc;

  J ref;
  ref["energy_residual"] = rep.sphere_energy_residual;
  ref["equicontinuity"] = rep.sphere_equicontinuity;
  j["sphere_reference"] = ref;
  return j;
}

namespace detail {
inline std::string csv_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace detail

// errors.csv: one row per (eps, path, sample time) of every finished cell, in
// config order. Shell energies are reported per unit thickness so they are
// directly comparable with the sphere energy across the eps sweep.
inline void write_errors_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "eps,path_id,t,err_l2,err_dainv,energy_sphere,energy_mean,energy_fluct\n";
  for (const CellSeries& cell : rep.cells) {
    if (!cell.ok) continue;
    for (std::size_t i = 0; i < cell.t.size(); ++i)
      os << detail::csv_num(cell.eps) << ',' << cell.path_id << ',' << detail::csv_num(cell.t[i])
         << ',' << detail::csv_num(cell.err_l2[i]) << ',' << detail::csv_num(cell.err_dainv[i])
         << ',' << detail::csv_num(cell.energy_sphere[i]) << ','
         << detail::csv_num(cell.energy_mean[i]) << ',' << detail::csv_num(cell.energy_fluct[i])
         << '\n';
  }
}

// writes report.json and errors.csv; returns the report.json path
inline std::string write_report_files(const ConvergenceReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw usage_error("study: cannot create output directory '" + dir + "'");
  const fs::path base(dir);
  const fs::path report_path = base / "report.json";
  {
    std::ofstream os(report_path, std::ios::binary);
    if (!os) throw usage_error("study: cannot open '" + report_path.string() + "'");
    os << report_json(rep).dump(2) << '\n';
  }
  {
    const fs::path csv_path = base / "errors.csv";
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw usage_error("study: cannot open '" + csv_path.string() + "'");
    write_errors_csv(os, rep);
  }
  return report_path.string();
}

}  // namespace thinshell
