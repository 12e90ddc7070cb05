#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "thinshell/rng.hpp"
#include "thinshell/shell_ops.hpp"
#include "thinshell/sphere_ops.hpp"

namespace thinshell {

// Discretized N-dimensional Wiener path: increments(k, j) is the j-th
// Brownian increment over [k*dt, (k+1)*dt], distributed Normal(0, dt).
template <class S>
struct WienerPath {
  std::uint64_t seed = 0;
  std::uint64_t path_id = 0;
  S dt = S(0);
  MatX<S> increments;  // nsteps x N

  int nsteps() const { return static_cast<int>(increments.rows()); }
  int nmodes() const { return static_cast<int>(increments.cols()); }
};

template <class S>
WienerPath<S> sample_path(std::uint64_t seed, std::uint64_t path_id, int nmodes, S dt,
                          int nsteps) {
  if (!(dt > S(0))) throw config_error("sample_path: dt must be positive");
  if (nmodes < 0 || nsteps < 0) throw config_error("sample_path: negative table shape");
  const std::uint64_t total =
      static_cast<std::uint64_t>(nmodes) * static_cast<std::uint64_t>(nsteps);
  if (total > (1ull << 31)) throw config_error("sample_path: increment table too large");
  WienerPath<S> path;
  path.seed = seed;
  path.path_id = path_id;
  path.dt = dt;
  path.increments.resize(nsteps, nmodes);
  const S root_dt = std::sqrt(dt);
  for (int k = 0; k < nsteps; ++k)
    for (int j = 0; j < nmodes; ++j)
      path.increments(k, j) =
          root_dt * static_cast<S>(normal_draw(seed, path_id, static_cast<std::uint64_t>(j),
                                               static_cast<std::uint64_t>(k)));
  return path;
}

// Finite-dimensional driving noise: N divergence-free coefficient fields g^j
// on the sphere, optionally modulated in time by a shared scalar factor.
template <class S>
struct NoiseMode {
  int l = 0;
  int m = 0;
  S amplitude = S(0);
};

template <class S>
struct NoiseModel {
  int lmax = 0;
  std::vector<DivFreeSpectral<S>> g;
  std::function<S(S)> time_dependence;  // empty = constant 1

  int mode_count() const { return static_cast<int>(g.size()); }
  S modulation(S t) const { return time_dependence ? time_dependence(t) : S(1); }

  static NoiseModel make_modes(int lmax, const std::vector<NoiseMode<S>>& modes) {
    NoiseModel model;
    model.lmax = lmax;
    model.g.reserve(modes.size());
    for (const NoiseMode<S>& mode : modes) {
      if (mode.l < 1 || mode.l > lmax || std::abs(mode.m) > mode.l)
        throw config_error("NoiseModel: mode outside the divergence-free truncation");
      DivFreeSpectral<S> gj(lmax);
      gj(mode.l, mode.m) = mode.amplitude;
      model.g.push_back(std::move(gj));
    }
    return model;
  }
};

// Lift g to the shell by the norm-preserving retraction (profile 1/r).
template <class S>
ShellVector<S> lift_noise(const SphereTransform<S>& T, const ShellGeometry<S>& geom,
                          const DivFreeSpectral<S>& gj) {
  if (!T.grid().same_shape(geom.grid))
    throw usage_error("lift_noise: transform grid does not match geometry grid");
  return retract_ring(geom, T.synth_curl(gj.as_stream()));
}

template <class S>
std::vector<ShellVector<S>> lift_noise(const SphereTransform<S>& T, const ShellGeometry<S>& geom,
                                       const NoiseModel<S>& model) {
  std::vector<ShellVector<S>> out;
  out.reserve(model.g.size());
  for (const DivFreeSpectral<S>& gj : model.g) out.push_back(lift_noise(T, geom, gj));
  return out;
}

// Optional robustness probe: add a fluctuation eps*eta with zero r-weighted
// radial mean, eta = q(r) * curl' h with q(r) = r - (m2/m1) over the shell.
template <class S>
ShellVector<S> lift_noise_polluted(const SphereTransform<S>& T, const ShellGeometry<S>& geom,
                                   const DivFreeSpectral<S>& gj, const SpectralScalar<S>& h) {
  ShellVector<S> out = lift_noise(T, geom, gj);
  const TangentFieldS2<S> hf = T.synth_curl(h);
  const S m1 = geom.w1.sum();  // int r dr
  const S m2 = geom.w2.sum();  // int r^2 dr
  for (int k = 0; k < geom.nr; ++k) {
    const S q = geom.eps * (geom.r[k] - m2 / m1);
    const TangentFieldS2<S> level = out.tangent_level(geom.grid, k);
    out.set_tangent_level(k, TangentFieldS2<S>(MatX<S>(level.ulam + q * hf.ulam),
                                               MatX<S>(level.uphi + q * hf.uphi)));
  }
  return out;
}

enum class NoiseSpace { H_SPHERE, H_EPS };

// Squared Hilbert-Schmidt norm: sum over modes of the squared component norm.
template <class S>
S hs_norm(const NoiseModel<S>& model) {
  S total = S(0);
  for (const DivFreeSpectral<S>& gj : model.g) {
    const S n = norm(gj, SphereNorm::L2_S2);
    total += n * n;
  }
  return total;
}

template <class S>
S hs_norm(const NoiseModel<S>& model, NoiseSpace space, const SphereTransform<S>& T,
          const ShellGeometry<S>& geom) {
  if (space == NoiseSpace::H_SPHERE) return hs_norm(model);
  S total = S(0);
  for (const DivFreeSpectral<S>& gj : model.g) {
    const ShellVector<S> lifted = lift_noise(T, geom, gj);
    total += inner_shell(geom, lifted, lifted);
  }
  return total;
}

// time integral of the squared HS norm under the scalar modulation,
// sampled at step starts to match the Euler-Maruyama convention
template <class S>
S integrated_hs(const NoiseModel<S>& model, S dt, int nsteps) {
  const S base = hs_norm(model);
  S total = S(0);
  for (int k = 0; k < nsteps; ++k) {
    const S mod = model.modulation(S(k) * dt);
    total += mod * mod * dt;
  }
  return base * total;
}

}  // namespace thinshell
