#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "thinshell/checks.hpp"
#include "thinshell/study.hpp"

namespace ts = thinshell;

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ts::usage_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ts::config_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return j;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ts::usage_error("cannot write '" + p.string() + "'");
  return os;
}

// ---- check ------------------------------------------------------------------------

int cmd_check(const std::string& selector, int cases, std::uint64_t seed, int moment_p,
              const std::string& out_dir) {
  ts::PropertySuiteConfig cfg;
  cfg.selector = selector;
  cfg.cases = cases;
  cfg.seed = seed;
  cfg.moment_p = moment_p;
  const std::vector<ts::PropertyCheck> checks = ts::run_property_suite(cfg);
  ts::print_checks(std::cout, checks);
  const bool ok = ts::all_pass(checks);
  std::cout << (ok ? "all checks passed" : "CHECK FAILURES PRESENT") << " (" << checks.size()
            << " checks)\n";
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path p = std::filesystem::path(out_dir) / "checks.json";
    open_out(p) << ts::checks_json(checks).dump(2) << '\n';
    std::cout << "wrote " << p.string() << '\n';
  }
  return ok ? 0 : 1;
}

// ---- sphere -----------------------------------------------------------------------

struct SingleRunArgs {
  double eps = 0.2;  // shell only
  int lmax = 8;
  int nr = 6;  // shell only
  double nu = 0.1;
  double dt = 1e-3;
  double t_final = 1.0;
  std::string mode = "nse";
  bool stochastic = false;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int cmd_sphere(const SingleRunArgs& a) {
  ts::SphereSolverConfig<double> cfg;
  cfg.lmax = a.lmax;
  cfg.nu = a.nu;
  cfg.dt = a.dt;
  cfg.t_final = a.t_final;
  cfg.mode = ts::run_mode_from_string(a.mode);
  const ts::DivFreeSpectral<double> u0 = ts::default_initial_state(cfg.lmax);
  ts::WienerPath<double> path;
  const long nsteps = std::lround(cfg.t_final / cfg.dt);
  if (a.stochastic) {
    cfg.noise = ts::default_noise_model(cfg.lmax);
    path = ts::sample_path<double>(a.seed, 0, cfg.noise.mode_count(), cfg.dt, nsteps);
  }
  const ts::SphereRun<double> run =
      ts::run_sphere(cfg, u0, a.stochastic ? &path : nullptr);

  nlohmann::ordered_json j;
  j["t_final"] = run.state.t;
  j["steps"] = run.state.step_index;
  j["energy"] = ts::inner_h(run.state.u, run.state.u);
  const double vn = ts::norm(run.state.u, ts::SphereNorm::V_SEMINORM);
  j["enstrophy"] = vn * vn;
  j["energy_residual"] = run.energy_residual;
  j["equicontinuity"] = run.equicontinuity;
  j["ledger"] = {{"dissipation", run.state.ledger.dissipation},
                 {"forcing_work", run.state.ledger.forcing_work},
                 {"noise_work", run.state.ledger.noise_work},
                 {"noise_qv", run.state.ledger.noise_qv}};
  std::cout << j.dump(2) << '\n';

  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    const std::filesystem::path p = std::filesystem::path(a.out_dir) / "sphere_trajectory.csv";
    std::ofstream os = open_out(p);
    os << "t,energy,enstrophy\n";
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      const double e = ts::inner_h(run.samples[i], run.samples[i]);
      const double v = ts::norm(run.samples[i], ts::SphereNorm::V_SEMINORM);
      os << ts::detail::csv_num(run.times[i]) << ',' << ts::detail::csv_num(e) << ','
         << ts::detail::csv_num(v * v) << '\n';
    }
    std::cout << "wrote " << p.string() << '\n';
  }
  return 0;
}

// ---- shell ------------------------------------------------------------------------

int cmd_shell(const SingleRunArgs& a) {
  ts::ShellSolverConfig<double> cfg;
  cfg.eps = a.eps;
  cfg.lmax = a.lmax;
  cfg.nr = a.nr;
  cfg.nu = a.nu;
  cfg.dt = a.dt;
  cfg.t_final = a.t_final;
  cfg.mode = ts::run_mode_from_string(a.mode);
  const ts::DivFreeSpectral<double> u0 = ts::default_initial_state(cfg.lmax);
  ts::WienerPath<double> path;
  const long nsteps = std::lround(cfg.t_final / cfg.dt);
  if (a.stochastic) {
    cfg.noise = ts::default_noise_model(cfg.lmax);
    path = ts::sample_path<double>(a.seed, 0, cfg.noise.mode_count(), cfg.dt, nsteps);
  }
  const ts::ShellRun<double> run = ts::run_shell(cfg, u0, a.stochastic ? &path : nullptr);

  const ts::ShellSample<double>& last = run.samples.back();
  nlohmann::ordered_json j;
  j["eps"] = cfg.eps;
  j["t_final"] = run.final_state.t;
  j["steps"] = run.final_state.step_index;
  j["energy"] = last.energy;
  j["mean_energy"] = last.mean_energy;
  j["fluct_energy"] = last.fluct_energy;
  j["energy_residual"] = run.energy_residual;
  j["ledger"] = {{"dissipation", run.final_state.ledger.dissipation},
                 {"forcing_work", run.final_state.ledger.forcing_work},
                 {"noise_work", run.final_state.ledger.noise_work},
                 {"noise_qv", run.final_state.ledger.noise_qv}};
  std::cout << j.dump(2) << '\n';

  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    const std::filesystem::path p = std::filesystem::path(a.out_dir) / "shell_trajectory.csv";
    std::ofstream os = open_out(p);
    os << "t,energy,mean_energy,fluct_energy,fluct_curl2,div_residual,bc_residual\n";
    for (const ts::ShellSample<double>& s : run.samples)
      os << ts::detail::csv_num(s.t) << ',' << ts::detail::csv_num(s.energy) << ','
         << ts::detail::csv_num(s.mean_energy) << ',' << ts::detail::csv_num(s.fluct_energy)
         << ',' << ts::detail::csv_num(s.fluct_curl2) << ','
         << ts::detail::csv_num(s.div_residual) << ',' << ts::detail::csv_num(s.bc_residual)
         << '\n';
    std::cout << "wrote " << p.string() << '\n';
  }
  return 0;
}

// ---- converge ---------------------------------------------------------------------

int cmd_converge(const ts::StudyConfig& cfg) {
  const ts::ConvergenceReport rep = ts::run_convergence_study(cfg);
  const std::string path = ts::write_report_files(rep, cfg.out_dir);

  int failed = 0;
  for (const ts::EpsSummary& s : rep.summaries) {
    std::cout << "eps " << s.eps << ": ";
    if (s.ok) {
      std::cout << "sup_t err_l2 " << s.err_l2_sup << ", time-int err_l2 " << s.err_l2_time
                << ", sup_t err_dainv " << s.err_dainv_sup << '\n';
    } else {
      ++failed;
      std::cout << "FAILED";
      for (const std::string& f : s.failures) std::cout << " [" << f << "]";
      std::cout << '\n';
    }
  }
  const auto show_rate = [](const char* name, const ts::RateFit& f) {
    std::cout << name << ": ";
    if (f.fitted)
      std::cout << f.rate << " (residual " << f.residual << ", " << f.note << ")\n";
    else
      std::cout << f.note << '\n';
  };
  show_rate("rate sup_t L2", rep.rate_l2_sup);
  show_rate("rate time-integrated L2", rep.rate_l2_time);
  show_rate("rate sup_t D(A^-1)", rep.rate_dainv);
  std::cout << "wrote " << path << '\n';
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thin spherical shell Navier-Stokes toolkit: property checks, single runs, "
               "and the thin-shell convergence study"};
  app.require_subcommand(1);
  int rc = 0;

  // check
  auto* check = app.add_subcommand("check", "run the property suite");
  std::string selector = "all", check_out;
  int cases = 25, check_moment_p = 2;
  std::uint64_t check_seed = 1;
  check->add_option("--selector", selector,
                    "operators|poincare|adjoint|energy|moment|all");
  check->add_option("--cases", cases, "randomized cases per identity");
  check->add_option("--seed", check_seed, "RNG seed");
  check->add_option("--moment-p", check_moment_p, "moment exponent for the moment selector");
  check->add_option("--out", check_out, "directory for checks.json");
  check->callback(
      [&] { rc = cmd_check(selector, cases, check_seed, check_moment_p, check_out); });

  // sphere / shell single runs share one argument block
  SingleRunArgs sa, ha;
  const auto add_single_flags = [](CLI::App* cmd, SingleRunArgs& a, bool shell) {
    if (shell) {
      cmd->add_option("--eps", a.eps, "shell thickness")->check(CLI::Range(1e-6, 0.5));
      cmd->add_option("--nr", a.nr, "radial collocation points");
    }
    cmd->add_option("--lmax", a.lmax, "spherical-harmonic truncation");
    cmd->add_option("--nu", a.nu, "viscosity");
    cmd->add_option("--dt", a.dt, "time step");
    cmd->add_option("--t-final", a.t_final, "final time");
    cmd->add_option("--mode", a.mode, "stokes|nse");
    cmd->add_flag("--stochastic", a.stochastic, "drive with the default noise model");
    cmd->add_option("--seed", a.seed, "Wiener path seed");
    cmd->add_option("--out", a.out_dir, "directory for the trajectory CSV");
  };
  auto* sphere = app.add_subcommand("sphere", "single sphere run");
  add_single_flags(sphere, sa, false);
  sphere->callback([&] { rc = cmd_sphere(sa); });
  auto* shell = app.add_subcommand("shell", "single thin-shell run");
  add_single_flags(shell, ha, true);
  ha.t_final = 0.5;
  shell->callback([&] { rc = cmd_shell(ha); });

  // converge
  auto* conv = app.add_subcommand("converge", "thin-shell convergence sweep");
  std::string config_path, mode_str, out_dir;
  std::vector<double> eps_list;
  int lmax = 0, nr = 0, paths = 0, moment_p = 0, workers = 0;
  double nu = 0, dt = 0, t_final = 0, init_fluct = 0;
  std::uint64_t seed = 0;
  bool stochastic = false, self_consistency = false;
  conv->add_option("--config", config_path, "JSON file with study-config fields")
      ->check(CLI::ExistingFile);
  conv->add_option("--eps-list", eps_list, "strictly decreasing thicknesses")
      ->delimiter(',');
  conv->add_option("--lmax", lmax, "spherical-harmonic truncation");
  conv->add_option("--nr", nr, "radial collocation points");
  conv->add_option("--nu", nu, "viscosity");
  conv->add_option("--dt", dt, "time step");
  conv->add_option("--t-final", t_final, "final time");
  conv->add_option("--mode", mode_str, "stokes|nse");
  conv->add_flag("--stochastic", stochastic, "common-noise Monte Carlo study");
  conv->add_option("--paths", paths, "Monte Carlo path count");
  conv->add_option("--seed", seed, "study seed");
  conv->add_option("--moment-p", moment_p, "fluctuation moment exponent");
  conv->add_option("--init-fluct", init_fluct, "relative O(eps) initial-state pollution");
  conv->add_flag("--self-consistency", self_consistency,
                 "replace shell dynamics by the exact lift (pipeline test)");
  conv->add_option("--workers", workers, "worker threads (never affects results)");
  conv->add_option("--out", out_dir, "report directory");
  conv->callback([&] {
    ts::StudyConfig cfg;
    if (!config_path.empty()) cfg = ts::study_config_parse(load_json(config_path));
    if (conv->count("--eps-list")) cfg.eps_list = eps_list;
    if (conv->count("--lmax")) cfg.lmax = lmax;
    if (conv->count("--nr")) cfg.nr = nr;
    if (conv->count("--nu")) cfg.nu = nu;
    if (conv->count("--dt")) cfg.dt = dt;
    if (conv->count("--t-final")) cfg.t_final = t_final;
    if (conv->count("--mode")) cfg.mode = ts::run_mode_from_string(mode_str);
    if (conv->count("--stochastic")) cfg.stochastic = stochastic;
    if (conv->count("--paths")) cfg.paths = paths;
    if (conv->count("--seed")) cfg.seed = seed;
    if (conv->count("--moment-p")) cfg.moment_p = moment_p;
    if (conv->count("--init-fluct")) cfg.init_fluct = init_fluct;
    if (conv->count("--self-consistency")) cfg.self_consistency = self_consistency;
    if (conv->count("--workers")) cfg.workers = workers;
    if (conv->count("--out")) cfg.out_dir = out_dir;
    ts::validate(cfg);
    rc = cmd_converge(cfg);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ts::divergence_error& e) {
    std::cerr << "error: solver diverged: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
