#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "thinshell/noise.hpp"
#include "thinshell/sphere_ops.hpp"

namespace thinshell {

enum class TimeScheme { IMEX_EULER, INTEGRATING_FACTOR };
enum class RunMode { NSE, STOKES };

// cumulative terms of the discrete energy identity
// d||u||^2 = -2 nu ||curl'u||^2 dt + 2 (f,u) dt + 2 (u, G dW) + ||G||_HS^2 dt
template <class S>
struct SphereLedger {
  S dissipation = S(0);     // 2 nu int ||curl'u||^2 ds
  S forcing_work = S(0);    // 2 int (f, u) ds
  S forcing_vprime = S(0);  // int ||A^{-1/2} f||^2 ds  (dual-norm monitor)
  S noise_work = S(0);      // 2 sum (u, g^j) dβ_j      (martingale term)
  S noise_qv = S(0);        // int ||G||_HS^2 ds        (Ito correction)
};

template <class S>
struct SphereSolverConfig {
  S nu = S(0.1);
  S dt = S(1e-3);
  S t_final = S(1);
  int lmax = 8;
  RunMode mode = RunMode::NSE;
  TimeScheme scheme = TimeScheme::IMEX_EULER;
  std::function<DivFreeSpectral<S>(S)> forcing;  // projected forcing Pf(t); empty = none
  NoiseModel<S> noise;                           // mode_count() == 0 = deterministic
};

template <class S>
struct SphereState {
  S t = S(0);
  long step_index = 0;
  DivFreeSpectral<S> u;
  SphereLedger<S> ledger;
};

// Rotational-form advection P[grad'_u u] = P[omega * (n x u)], evaluated
// pseudo-spectrally.  With the caller's grid dealiased for quadratics the
// projection annihilates the gradient part exactly and (N(u), u) = 0 to
// round-off.
template <class S>
DivFreeSpectral<S> nonlinear_term(const SphereTransform<S>& T, const DivFreeSpectral<S>& u) {
  const TangentFieldS2<S> v = T.synth_curl(u.as_stream());
  const ScalarFieldS2<S> omega = T.synthesize(stokes_apply(u).as_stream());
  TangentFieldS2<S> adv(MatX<S>(-omega.cwiseProduct(v.uphi)), MatX<S>(omega.cwiseProduct(v.ulam)));
  return leray_project(T, adv);
}

template <class S>
class SphereSolver {
 public:
  explicit SphereSolver(SphereSolverConfig<S> cfg)
      : cfg_(std::move(cfg)),
        grid_(SphereGrid<S>::make_dealiased(cfg_.lmax)),
        transform_(grid_),
        factor_(stream_count(cfg_.lmax)) {
    if (!(cfg_.nu > S(0))) throw config_error("sphere solver: nu must be positive");
    if (!(cfg_.dt > S(0))) throw config_error("sphere solver: dt must be positive");
    if (cfg_.t_final < S(0)) throw config_error("sphere solver: negative horizon");
    if (cfg_.noise.mode_count() > 0 && cfg_.noise.lmax != cfg_.lmax)
      throw config_error("sphere solver: noise truncation does not match lmax");
    for (int l = 1; l <= cfg_.lmax; ++l)
      for (int m = -l; m <= l; ++m)
        factor_[stream_index(l, m)] = std::exp(-cfg_.nu * S(l) * S(l + 1) * cfg_.dt);
    hs_cache_ = hs_norm(cfg_.noise);
  }

  const SphereSolverConfig<S>& config() const { return cfg_; }
  const SphereTransform<S>& transform() const { return transform_; }

  SphereState<S> initial_state(DivFreeSpectral<S> u0) const {
    if (u0.lmax != cfg_.lmax) throw usage_error("sphere solver: initial state truncation");
    SphereState<S> st;
    st.u = std::move(u0);
    return st;
  }

  // one step; dW must carry exactly one increment per noise mode
  void step(SphereState<S>& st, const VecX<S>& dW) const {
    const int nmodes = cfg_.noise.mode_count();
    if (static_cast<int>(dW.size()) != nmodes)
      throw usage_error("sphere solver: increment slice does not match the noise model");

    const S vnorm = norm(st.u, SphereNorm::V_SEMINORM);
    st.ledger.dissipation += cfg_.dt * S(2) * cfg_.nu * vnorm * vnorm;

    VecX<S> expl = VecX<S>::Zero(st.u.psi.size());
    if (cfg_.mode == RunMode::NSE) expl -= nonlinear_term(transform_, st.u).psi;
    if (cfg_.forcing) {
      const DivFreeSpectral<S> f = cfg_.forcing(st.t);
      if (f.lmax != cfg_.lmax) throw usage_error("sphere solver: forcing truncation");
      expl += f.psi;
      st.ledger.forcing_work += S(2) * cfg_.dt * inner_h(f, st.u);
      const S dual = norm(f, SphereNorm::DA_INV);
      st.ledger.forcing_vprime += cfg_.dt * dual * dual;
    }

    VecX<S> gdb = VecX<S>::Zero(st.u.psi.size());
    if (nmodes > 0) {
      const S mod = cfg_.noise.modulation(st.t);
      for (int j = 0; j < nmodes; ++j) gdb += (mod * dW[j]) * cfg_.noise.g[j].psi;
      DivFreeSpectral<S> dg(cfg_.lmax);
      dg.psi = gdb;
      st.ledger.noise_work += S(2) * inner_h(st.u, dg);
      st.ledger.noise_qv += cfg_.dt * mod * mod * hs_cache_;
    }

    if (cfg_.scheme == TimeScheme::IMEX_EULER)
      st.u.psi = factor_.cwiseProduct(st.u.psi) + cfg_.dt * expl + gdb;
    else
      st.u.psi = factor_.cwiseProduct(VecX<S>(st.u.psi + cfg_.dt * expl + gdb));

    st.t += cfg_.dt;
    ++st.step_index;
    if (!st.u.psi.allFinite()) throw divergence_error(static_cast<std::size_t>(st.step_index));
  }

  void step(SphereState<S>& st) const { step(st, VecX<S>()); }

 private:
  SphereSolverConfig<S> cfg_;
  SphereGrid<S> grid_;
  SphereTransform<S> transform_;
  VecX<S> factor_;
  S hs_cache_ = S(0);
};

template <class S>
struct SphereRun {
  std::vector<S> times;
  std::vector<DivFreeSpectral<S>> samples;
  SphereState<S> state;        // at t_final
  S energy_residual = S(0);    // |closing error of the discrete energy identity|
  S equicontinuity = S(0);     // sup ||u(t)-u(s)||_{D(A^{-1})} / sqrt(t-s)
};

template <class S>
SphereRun<S> run_sphere(const SphereSolverConfig<S>& cfg, DivFreeSpectral<S> u0,
                        const WienerPath<S>* path = nullptr, int sample_stride = 0) {
  SphereSolver<S> solver(cfg);
  const long nsteps = std::lround(cfg.t_final / cfg.dt);
  const int nmodes = cfg.noise.mode_count();
  if (nmodes > 0) {
    if (path == nullptr) throw usage_error("run_sphere: noise model given but no Wiener path");
    if (path->nmodes() != nmodes || path->nsteps() < nsteps)
      throw usage_error("run_sphere: Wiener path shape does not match the run");
    if (std::abs(path->dt - cfg.dt) > S(1e-12) * cfg.dt)
      throw usage_error("run_sphere: Wiener path step size does not match dt");
  }
  if (sample_stride <= 0) sample_stride = static_cast<int>(std::max<long>(1, nsteps / 64));

  SphereRun<S> out;
  SphereState<S> st = solver.initial_state(std::move(u0));
  const S e0 = norm(st.u, SphereNorm::L2_S2) * norm(st.u, SphereNorm::L2_S2);
  out.times.push_back(st.t);
  out.samples.push_back(st.u);
  for (long k = 0; k < nsteps; ++k) {
    if (nmodes > 0)
      solver.step(st, VecX<S>(path->increments.row(k).transpose()));
    else
      solver.step(st);
    if ((k + 1) % sample_stride == 0 || k + 1 == nsteps) {
      out.times.push_back(st.t);
      out.samples.push_back(st.u);
    }
  }

  const S ef = norm(st.u, SphereNorm::L2_S2) * norm(st.u, SphereNorm::L2_S2);
  out.energy_residual = std::abs(ef + st.ledger.dissipation - e0 - st.ledger.forcing_work -
                                 st.ledger.noise_work - st.ledger.noise_qv);

  for (std::size_t i = 0; i < out.samples.size(); ++i)
    for (std::size_t j = i + 1; j < out.samples.size(); ++j) {
      const S theta = out.times[j] - out.times[i];
      if (theta <= S(0)) continue;
      const S holder = norm(out.samples[j] - out.samples[i], SphereNorm::DA_INV) / std::sqrt(theta);
      out.equicontinuity = std::max(out.equicontinuity, holder);
    }

  out.state = std::move(st);
  return out;
}

}  // namespace thinshell
