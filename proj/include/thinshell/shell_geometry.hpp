#pragma once

#include "thinshell/core.hpp"
#include "thinshell/legendre.hpp"
#include "thinshell/sphere_grid.hpp"

namespace thinshell {

// Discretisation of the shell Q_eps = { 1 <= |y| <= 1+eps }: Gauss–Legendre
// nodes in the radial direction with weights for the plain, r- and r^2-weighted
// line integrals, the nodal differentiation matrix of the degree nr-1
// interpolant (barycentric form), and the embedded sphere grid for the angular
// directions.
template <class S>
struct ShellGeometry {
  S eps = S(0);
  int nr = 0;
  VecX<S> r;       // nodes, ascending in (1, 1+eps)
  VecX<S> w;       // ∫ f(r) dr       ≈ Σ w_k f(r_k)
  VecX<S> w1;      // ∫ f(r) r dr     ≈ Σ w1_k f(r_k)
  VecX<S> w2;      // ∫ f(r) r^2 dr   ≈ Σ w2_k f(r_k)
  VecX<S> bary;    // barycentric weights of the nodes
  MatX<S> D;       // (D f)_i ≈ f'(r_i) for the interpolant through the nodes
  SphereGrid<S> grid;

  int nang() const { return grid.nlat * grid.nlon; }

  static ShellGeometry make(S eps, int nr, SphereGrid<S> grid) {
    if (!(eps > S(0) && eps < S(0.5)))
      throw config_error("shell thickness must satisfy 0 < eps < 1/2");
    if (nr < 2) throw config_error("need at least two radial nodes");
    ShellGeometry g;
    g.eps = eps;
    g.nr = nr;
    g.grid = std::move(grid);
    VecX<S> x, gw;
    gauss_legendre(nr, x, gw);
    g.r = (S(1) + eps / S(2)) + (eps / S(2)) * x.array();
    g.w = (eps / S(2)) * gw;
    g.w1 = g.w.cwiseProduct(g.r);
    g.w2 = g.w1.cwiseProduct(g.r);

    g.bary = VecX<S>::Ones(nr);
    for (int k = 0; k < nr; ++k)
      for (int j = 0; j < nr; ++j)
        if (j != k) g.bary[k] /= (g.r[k] - g.r[j]);
    g.D.resize(nr, nr);
    for (int i = 0; i < nr; ++i) {
      S diag = S(0);
      for (int j = 0; j < nr; ++j) {
        if (i == j) continue;
        g.D(i, j) = (g.bary[j] / g.bary[i]) / (g.r[i] - g.r[j]);
        diag -= g.D(i, j);
      }
      g.D(i, i) = diag;
    }
    return g;
  }

  // weights for ∫ f(r) r^p dr, p >= 0
  VecX<S> moment_weights(int p) const {
    VecX<S> out = w;
    for (int q = 0; q < p; ++q) out = out.cwiseProduct(r);
    return out;
  }

  // interpolation weights of the nodal interpolant evaluated at radius t
  // (t outside the node set, e.g. the shell boundaries 1 and 1+eps)
  VecX<S> interp_weights(S t) const {
    VecX<S> c(nr);
    S denom = S(0);
    for (int k = 0; k < nr; ++k) {
      c[k] = bary[k] / (t - r[k]);
      denom += c[k];
    }
    return c / denom;
  }

  // weights of the nodal interpolant's derivative evaluated at radius t
  // (differentiating the barycentric form; t outside the node set)
  VecX<S> deriv_weights(S t) const {
    VecX<S> a(nr), b(nr);
    S sa = S(0), sb = S(0);
    for (int k = 0; k < nr; ++k) {
      const S d = t - r[k];
      a[k] = bary[k] / d;
      b[k] = a[k] / d;
      sa += a[k];
      sb += b[k];
    }
    return (a * (sb / sa) - b) / sa;
  }

  bool same_shape(const ShellGeometry& o) const {
    return nr == o.nr && eps == o.eps && grid.same_shape(o.grid);
  }
};

}  // namespace thinshell
