#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "thinshell/noise.hpp"
#include "thinshell/shell_basis.hpp"
#include "thinshell/shell_ops.hpp"
#include "thinshell/sphere_solver.hpp"

namespace thinshell {

// ---- pointwise nonlinear algebra on nodal shell fields ---------------------------

// cross product in the right-handed orthonormal frame (e_r, e_lam, e_phi)
template <class S>
ShellVector<S> cross3(const ShellVector<S>& a, const ShellVector<S>& b) {
  return {MatX<S>(a.ulam.cwiseProduct(b.uphi) - a.uphi.cwiseProduct(b.ulam)),
          MatX<S>(a.uphi.cwiseProduct(b.ur) - a.ur.cwiseProduct(b.uphi)),
          MatX<S>(a.ur.cwiseProduct(b.ulam) - a.ulam.cwiseProduct(b.ur))};
}

namespace detail {
// Cartesian components of the spherical frame at every angular node
template <class S>
struct ShellFrame {
  Eigen::RowVectorX<S> rx, ry, rz, lx, ly, lz, px, py, pz;

  explicit ShellFrame(const SphereGrid<S>& g) {
    const int n = g.nlat * g.nlon;
    rx.resize(n), ry.resize(n), rz.resize(n);
    lx.resize(n), ly.resize(n), lz.resize(n);
    px.resize(n), py.resize(n), pz.resize(n);
    for (int i = 0; i < g.nlat; ++i) {
      const S sl = g.sin_colat[i], cl = g.x[i];
      for (int j = 0; j < g.nlon; ++j) {
        const S cp = std::cos(g.lon[j]), sp = std::sin(g.lon[j]);
        const int c = i * g.nlon + j;
        rx[c] = sl * cp, ry[c] = sl * sp, rz[c] = cl;
        lx[c] = cl * cp, ly[c] = cl * sp, lz[c] = -sl;
        px[c] = -sp, py[c] = cp, pz[c] = S(0);
      }
    }
  }
};
}  // namespace detail

// (u·∇)v by the Cartesian detour: differentiate the Cartesian components of v
// as shell scalars, contract with u pointwise, and map back to the spherical
// frame. Exact (up to quadrature) when the Cartesian components of v are
// resolved by the geometry's grid, i.e. v band-limited one degree below lmax.
template <class S>
ShellVector<S> shell_advection(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                               const ShellVector<S>& u, const ShellVector<S>& v) {
  const detail::ShellFrame<S> fr(geom.grid);
  auto cart = [&](const Eigen::RowVectorX<S>& cr, const Eigen::RowVectorX<S>& cl,
                  const Eigen::RowVectorX<S>& cp) {
    ShellScalar<S> comp(geom.nr, geom.nang());
    comp.vals = v.ur * cr.asDiagonal() + v.ulam * cl.asDiagonal() + v.uphi * cp.asDiagonal();
    return comp;
  };
  auto directional = [&](const ShellScalar<S>& f) {
    const ShellVector<S> g3 = grad3(geom, T, f);
    return MatX<S>(u.ur.cwiseProduct(g3.ur) + u.ulam.cwiseProduct(g3.ulam) +
                   u.uphi.cwiseProduct(g3.uphi));
  };
  const MatX<S> ax = directional(cart(fr.rx, fr.lx, fr.px));
  const MatX<S> ay = directional(cart(fr.ry, fr.ly, fr.py));
  const MatX<S> az = directional(cart(fr.rz, fr.lz, fr.pz));
  ShellVector<S> out(geom.nr, geom.nang());
  out.ur = ax * fr.rx.asDiagonal() + ay * fr.ry.asDiagonal() + az * fr.rz.asDiagonal();
  out.ulam = ax * fr.lx.asDiagonal() + ay * fr.ly.asDiagonal() + az * fr.lz.asDiagonal();
  out.uphi = ax * fr.px.asDiagonal() + ay * fr.py.asDiagonal() + az * fr.pz.asDiagonal();
  return out;
}

// quadrature trilinear form b(u, v, w) = ∫ (u·∇)v · w over the shell
template <class S>
S shell_b_quad(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
               const ShellVector<S>& u, const ShellVector<S>& v, const ShellVector<S>& w) {
  return inner_shell(geom, shell_advection(geom, T, u, v), w);
}

// skew-symmetrized trilinear form: equals b on exactly divergence-free data and
// vanishes identically in the last two arguments
template <class S>
S shell_b_skew(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
               const ShellVector<S>& u, const ShellVector<S>& v, const ShellVector<S>& w) {
  return (shell_b_quad(geom, T, u, v, w) - shell_b_quad(geom, T, u, w, v)) / S(2);
}

// ---- Stokes operator --------------------------------------------------------------

// A_eps u = curl curl u, which on the divergence-free impermeable space equals
// -Laplacian. The membership check guards against accidentally feeding fields
// with radial boundary leakage, for which the identity does not hold.
template <class S>
ShellVector<S> apply_stokes_eps(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                                const ShellVector<S>& u, S tol = S(1e-4)) {
  if (!in_H_eps(geom, T, u).within(tol))
    throw usage_error("apply_stokes_eps: field is not (numerically) divergence-free and impermeable");
  return curl3(geom, T, curl3(geom, T, u));
}

// ---- modal solver -----------------------------------------------------------------

template <class S>
struct ShellLedger {
  S dissipation = S(0);   // 2 nu int ||curl u||^2 ds  (right endpoint)
  S forcing_work = S(0);  // 2 int (f, u) ds           (right endpoint)
  S noise_work = S(0);    // 2 sum (u, G dbeta)        (left endpoint, Ito)
  S noise_qv = S(0);      // int ||G||_HS^2 ds
};

template <class S>
struct ShellSolverConfig {
  S nu = S(0.1);
  S dt = S(1e-3);
  S t_final = S(1);
  S eps = S(0.2);
  int lmax = 10;
  int nr = 6;
  RunMode mode = RunMode::STOKES;
  std::function<DivFreeSpectral<S>(S)> forcing;  // sphere-side f(t), lifted with profile 1/r
  NoiseModel<S> noise;                           // sphere-side modes, lifted the same way
};

// Coefficients of the constrained radial bases, one column per spherical
// harmonic (l,m) at stream_index(l, m).
template <class S>
struct ShellState {
  S t = S(0);
  long step_index = 0;
  MatX<S> zt;  // kt x stream_count(lmax)
  MatX<S> zp;  // kp x stream_count(lmax)
  ShellLedger<S> ledger;
};

// dual-space coefficients (pairings against the constrained basis fields)
template <class S>
struct ShellDual {
  MatX<S> ft;  // kt x stream_count
  MatX<S> fp;  // kp x stream_count
};

template <class S>
struct ShellTrace {
  DivFreeSpectral<S> psi;  // stream function of the divergence-free trace part
  SpectralScalar<S> chi;   // potential of the gradient trace part
};

template <class S>
class ShellSolver {
 public:
  explicit ShellSolver(ShellSolverConfig<S> cfg)
      : cfg_(checked(std::move(cfg))),
        geom_(ShellGeometry<S>::make(cfg_.eps, cfg_.nr, SphereGrid<S>::make_dealiased(cfg_.lmax))),
        transform_(geom_.grid),
        basis_(ShellBasis<S>::make(geom_, cfg_.nu * cfg_.dt)),
        nstream_(stream_count(cfg_.lmax)),
        ev_(nstream_) {
    for (int l = 1; l <= cfg_.lmax; ++l)
      for (int m = -l; m <= l; ++m) ev_[stream_index(l, m)] = S(l) * S(l + 1);
    hs_cache_ = hs_norm(cfg_.noise);  // squared HS norm of the sphere-side model
  }

  const ShellSolverConfig<S>& config() const { return cfg_; }
  const ShellGeometry<S>& geometry() const { return geom_; }
  const SphereTransform<S>& transform() const { return transform_; }
  const ShellBasis<S>& basis() const { return basis_; }

  ShellState<S> initial_state() const {
    ShellState<S> st;
    st.zt = MatX<S>::Zero(basis_.kt(), nstream_);
    st.zp = MatX<S>::Zero(basis_.kp(), nstream_);
    return st;
  }

  // L2(Q_eps)-orthogonal projection of the lifted sphere field onto the
  // constrained space. The 1/r toroidal profile satisfies the boundary rows
  // exactly, so the projection reproduces the lift to round-off.
  ShellState<S> state_from_sphere(const DivFreeSpectral<S>& u0) const {
    if (u0.lmax != cfg_.lmax) throw usage_error("shell solver: initial state truncation");
    ShellState<S> st = initial_state();
    const MatX<S> d = lift_dual(u0);
    for (int l = 1; l <= cfg_.lmax; ++l)
      st.zt.middleCols(offset(l), 2 * l + 1) =
          basis_.mass_llt_t[l].solve(d.middleCols(offset(l), 2 * l + 1));
    return st;
  }

  // nodal synthesis: per level, u_r from the poloidal potential, tangential
  // parts from the toroidal stream and poloidal gradient profiles
  ShellVector<S> to_nodal(const ShellState<S>& st) const {
    const MatX<S> pt = basis_.zt * st.zt;
    const MatX<S> pp = basis_.zp * st.zp;
    const MatX<S> qp = basis_.gp_zp * st.zp;
    ShellVector<S> out(cfg_.nr, geom_.nang());
    SpectralScalar<S> ar(cfg_.lmax), psi(cfg_.lmax), chi(cfg_.lmax);
    for (int k = 0; k < cfg_.nr; ++k) {
      ar.coef.tail(nstream_) = ev_.cwiseProduct(pp.row(k).transpose());
      psi.coef.tail(nstream_) = pt.row(k).transpose();
      chi.coef.tail(nstream_) = qp.row(k).transpose();
      out.ur.row(k) = flatten(transform_.synthesize(ar));
      const TangentFieldS2<S> tc = transform_.synth_curl(psi);
      const TangentFieldS2<S> tg = transform_.synth_grad(chi);
      out.ulam.row(k) = flatten(tc.ulam) + flatten(tg.ulam);
      out.uphi.row(k) = flatten(tc.uphi) + flatten(tg.uphi);
    }
    return out;
  }

  // radial average (M-ring) of the state, split into stream and gradient parts
  ShellTrace<S> trace(const ShellState<S>& st) const {
    ShellTrace<S> tr{DivFreeSpectral<S>(cfg_.lmax), SpectralScalar<S>(cfg_.lmax)};
    tr.psi.psi = (basis_.pair_t.transpose() * st.zt).transpose() / cfg_.eps;
    tr.chi.coef.tail(nstream_) = (basis_.pair_p_grad.transpose() * st.zp).transpose() / cfg_.eps;
    return tr;
  }

  S energy(const ShellState<S>& st) const { return quad_form(basis_.mass_t, basis_.mass_p, st); }
  S curl_energy(const ShellState<S>& st) const {
    return quad_form(basis_.stiff_t, basis_.stiff_p, st);
  }

  // pairings (f, basis field) for a nodal field, via per-level angular analysis
  ShellDual<S> galerkin_pair(const ShellVector<S>& f) const {
    MatX<S> ar(cfg_.nr, nstream_), ac(cfg_.nr, nstream_), ad(cfg_.nr, nstream_);
    for (int k = 0; k < cfg_.nr; ++k) {
      const TangentFieldS2<S> lev = f.tangent_level(geom_.grid, k);
      ar.row(k) = transform_.analyze(unflatten<S>(geom_.grid, f.ur.row(k)))
                      .coef.tail(nstream_)
                      .transpose();
      ac.row(k) = transform_.analyze_curl(lev).coef.tail(nstream_).transpose();
      ad.row(k) = transform_.analyze_div(lev).coef.tail(nstream_).transpose();
    }
    const auto w2d = geom_.w2.asDiagonal();
    ShellDual<S> d;
    d.ft = basis_.zt.transpose() * (w2d * ac);
    // (f_tan, grad'Y) = -analyze_div(f_tan); radial pairing carries l(l+1)
    d.fp = (basis_.zp.transpose() * (w2d * ar)) * ev_.asDiagonal() -
           basis_.gp_zp.transpose() * (w2d * ad);
    return d;
  }

  // rotational bilinear advection B(u, v) = (curl u) x v. It has the same
  // pairing against divergence-free impermeable fields as (u.grad)v (the
  // gradient remainder integrates to zero there) and is pointwise orthogonal
  // to v, so the discrete energy neutrality is exact rather than O(dt).
  ShellDual<S> nonlinear_term(const ShellVector<S>& u, const ShellVector<S>& v) const {
    return galerkin_pair(cross3(curl3(geom_, transform_, u), v));
  }

  S pair_state(const ShellDual<S>& d, const ShellState<S>& st) const {
    return d.ft.cwiseProduct(st.zt).sum() + d.fp.cwiseProduct(st.zp).sum();
  }

  // toroidal dual coefficients of the lifted sphere field (profile 1/r)
  MatX<S> lift_dual(const DivFreeSpectral<S>& f) const {
    return basis_.pair_t * ev_.cwiseProduct(f.psi).transpose();
  }

  // one IMEX Euler step: Stokes implicit per (l, m), advection and noise explicit
  void step(ShellState<S>& st, const VecX<S>& dW) const {
    const int nmodes = cfg_.noise.mode_count();
    if (static_cast<int>(dW.size()) != nmodes)
      throw usage_error("shell solver: increment slice does not match the noise model");
    const S mod = cfg_.noise.modulation(st.t);

    // Ito ledger contributions against the pre-step state
    if (nmodes > 0) {
      const Eigen::RowVectorX<S> tor = basis_.pair_t.transpose() * st.zt;
      for (int j = 0; j < nmodes; ++j)
        st.ledger.noise_work +=
            S(2) * mod * dW[j] * tor.dot(ev_.cwiseProduct(cfg_.noise.g[j].psi));
      st.ledger.noise_qv += cfg_.dt * mod * mod * cfg_.eps * hs_cache_;
    }

    // assemble right-hand sides: mass-apply + dt (forcing - advection) + noise
    MatX<S> rhs_t(basis_.kt(), nstream_), rhs_p(basis_.kp(), nstream_);
    for (int l = 1; l <= cfg_.lmax; ++l) {
      rhs_t.middleCols(offset(l), 2 * l + 1) =
          basis_.mass_t[l] * st.zt.middleCols(offset(l), 2 * l + 1);
      rhs_p.middleCols(offset(l), 2 * l + 1) =
          basis_.mass_p[l] * st.zp.middleCols(offset(l), 2 * l + 1);
    }
    if (cfg_.mode == RunMode::NSE) {
      const ShellVector<S> u = to_nodal(st);
      const ShellDual<S> adv = nonlinear_term(u, u);
      rhs_t -= cfg_.dt * adv.ft;
      rhs_p -= cfg_.dt * adv.fp;
    }
    MatX<S> force_dual;
    if (cfg_.forcing) {
      const DivFreeSpectral<S> f = cfg_.forcing(st.t);
      if (f.lmax != cfg_.lmax) throw usage_error("shell solver: forcing truncation");
      force_dual = lift_dual(f);
      rhs_t += cfg_.dt * force_dual;
    }
    if (nmodes > 0) {
      DivFreeSpectral<S> gsum(cfg_.lmax);
      for (int j = 0; j < nmodes; ++j) gsum.psi += (mod * dW[j]) * cfg_.noise.g[j].psi;
      rhs_t += lift_dual(gsum);
    }

    for (int l = 1; l <= cfg_.lmax; ++l) {
      st.zt.middleCols(offset(l), 2 * l + 1) =
          basis_.step_llt_t[l].solve(rhs_t.middleCols(offset(l), 2 * l + 1));
      st.zp.middleCols(offset(l), 2 * l + 1) =
          basis_.step_llt_p[l].solve(rhs_p.middleCols(offset(l), 2 * l + 1));
    }
    if (!st.zt.allFinite() || !st.zp.allFinite())
      throw divergence_error(static_cast<std::size_t>(st.step_index));

    st.t += cfg_.dt;
    ++st.step_index;
    st.ledger.dissipation += S(2) * cfg_.nu * cfg_.dt * curl_energy(st);
    if (cfg_.forcing)
      st.ledger.forcing_work += S(2) * cfg_.dt * force_dual.cwiseProduct(st.zt).sum();
  }

 private:
  static ShellSolverConfig<S> checked(ShellSolverConfig<S> cfg) {
    if (!(cfg.nu > S(0))) throw config_error("shell solver: nu must be positive");
    if (!(cfg.dt > S(0))) throw config_error("shell solver: dt must be positive");
    if (cfg.t_final < S(0)) throw config_error("shell solver: negative horizon");
    if (!(cfg.eps > S(0))) throw config_error("shell solver: eps must be positive");
    if (cfg.lmax < 1) throw config_error("shell solver: lmax must be at least 1");
    if (cfg.nr < 6) throw config_error("shell solver: need nr >= 6 radial nodes");
    if (cfg.mode == RunMode::NSE && cfg.lmax > 15)
      throw config_error("shell solver: NSE mode is capped at lmax = 15");
    if (cfg.noise.mode_count() > 0 && cfg.noise.lmax != cfg.lmax)
      throw config_error("shell solver: noise truncation does not match lmax");
    return cfg;
  }

  static int offset(int l) { return stream_index(l, -l); }

  S quad_form(const std::vector<MatX<S>>& qt, const std::vector<MatX<S>>& qp,
              const ShellState<S>& st) const {
    S acc = S(0);
    for (int l = 1; l <= cfg_.lmax; ++l) {
      const auto bt = st.zt.middleCols(offset(l), 2 * l + 1);
      const auto bp = st.zp.middleCols(offset(l), 2 * l + 1);
      acc += (qt[l] * bt).cwiseProduct(bt).sum() + (qp[l] * bp).cwiseProduct(bp).sum();
    }
    return acc;
  }

  ShellSolverConfig<S> cfg_;
  ShellGeometry<S> geom_;
  SphereTransform<S> transform_;
  ShellBasis<S> basis_;
  int nstream_ = 0;
  VecX<S> ev_;
  S hs_cache_ = S(0);
};

// ---- trajectory driver -------------------------------------------------------------

template <class S>
struct ShellSample {
  S t = S(0);
  DivFreeSpectral<S> trace_psi;  // stream part of the radial average
  SpectralScalar<S> trace_chi;   // gradient part of the radial average
  S energy = S(0);               // ||u||^2 over the shell
  S mean_energy = S(0);          // ||Mtilde u||^2
  S fluct_energy = S(0);         // ||Ntilde u||^2
  S fluct_curl2 = S(0);          // ||curl Ntilde u||^2
  S div_residual = S(0);
  S bc_residual = S(0);
};

template <class S>
struct ShellRun {
  std::vector<ShellSample<S>> samples;
  ShellState<S> final_state;
  S energy_residual = S(0);
};

template <class S>
ShellSample<S> sample_state(const ShellSolver<S>& solver, const ShellState<S>& st) {
  const ShellGeometry<S>& geom = solver.geometry();
  const SphereTransform<S>& T = solver.transform();
  ShellSample<S> s;
  s.t = st.t;
  const ShellTrace<S> tr = solver.trace(st);
  s.trace_psi = tr.psi;
  s.trace_chi = tr.chi;
  const ShellVector<S> u = solver.to_nodal(st);
  const ShellDecomposition<S> dec = decompose(geom, u);
  s.energy = inner_shell(geom, u, u);
  s.mean_energy = inner_shell(geom, dec.mean, dec.mean);
  s.fluct_energy = inner_shell(geom, dec.fluct, dec.fluct);
  const ShellVector<S> cf = curl3(geom, T, dec.fluct);
  s.fluct_curl2 = inner_shell(geom, cf, cf);
  const HepsResidual<S> hr = in_H_eps(geom, T, u);
  s.div_residual = hr.div_residual;
  s.bc_residual = hr.bc_residual;
  return s;
}

template <class S>
ShellRun<S> run_shell_from(const ShellSolver<S>& solver, ShellState<S> st,
                           const WienerPath<S>* path = nullptr, int sample_stride = 0) {
  const ShellSolverConfig<S>& cfg = solver.config();
  const long nsteps = std::lround(cfg.t_final / cfg.dt);
  const int nmodes = cfg.noise.mode_count();
  if (nmodes > 0) {
    if (path == nullptr) throw usage_error("run_shell: stochastic config needs a sampled path");
    if (path->increments.rows() < nsteps || path->increments.cols() != nmodes)
      throw usage_error("run_shell: path shape does not match the run");
  }
  if (sample_stride <= 0) sample_stride = static_cast<int>(std::max<long>(1, nsteps / 64));

  ShellRun<S> out;
  out.samples.push_back(sample_state(solver, st));
  const S e0 = solver.energy(st);
  VecX<S> dw = VecX<S>::Zero(nmodes);
  for (long k = 0; k < nsteps; ++k) {
    if (nmodes > 0) dw = path->increments.row(static_cast<int>(k)).transpose();
    solver.step(st, dw);
    if ((k + 1) % sample_stride == 0 || k + 1 == nsteps)
      out.samples.push_back(sample_state(solver, st));
  }
  const S ef = solver.energy(st);
  out.energy_residual = std::abs(ef + st.ledger.dissipation - e0 - st.ledger.forcing_work -
                                 st.ledger.noise_work - st.ledger.noise_qv);
  out.final_state = std::move(st);
  return out;
}

template <class S>
ShellRun<S> run_shell(const ShellSolverConfig<S>& cfg, const DivFreeSpectral<S>& u0,
                      const WienerPath<S>* path = nullptr, int sample_stride = 0) {
  const ShellSolver<S> solver(cfg);
  return run_shell_from(solver, solver.state_from_sphere(u0), path, sample_stride);
}

}  // namespace thinshell
