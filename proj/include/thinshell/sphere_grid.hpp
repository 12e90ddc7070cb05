#pragma once

#include "thinshell/core.hpp"
#include "thinshell/legendre.hpp"

#include <cmath>

namespace thinshell {

// Gauss–Legendre colatitudes × equispaced longitudes. Quadrature weight for a
// node (i, j) is wlat[i] * (2π/nlon); the weights integrate dσ = sin λ dλ dφ
// exactly for integrands of polynomial degree <= 2 nlat - 1 in cos λ and
// Fourier order < nlon in φ.
template <class S>
struct SphereGrid {
  int lmax = 0;
  int nlat = 0;
  int nlon = 0;
  VecX<S> x;          // cos λ_i, descending so λ is ascending (north to south)
  VecX<S> colat;      // λ_i in (0, π)
  VecX<S> sin_colat;  // sin λ_i
  VecX<S> wlat;       // Gauss weights for ∫ dx
  VecX<S> lon;        // φ_j = 2π j / nlon
  S wlon = S(0);      // 2π / nlon

  S quad_weight(int i) const { return wlat[i] * wlon; }

  static SphereGrid make(int lmax, int nlat = -1, int nlon = -1) {
    if (lmax < 0) throw config_error("SphereGrid: lmax must be >= 0");
    if (nlat < 0) nlat = lmax + 1;
    if (nlon < 0) nlon = 2 * lmax + 1;
    if (nlat < lmax + 1 || nlon < 2 * lmax + 1)
      throw config_error("SphereGrid: need nlat >= lmax+1 and nlon >= 2*lmax+1");
    SphereGrid g;
    g.lmax = lmax;
    g.nlat = nlat;
    g.nlon = nlon;
    VecX<S> xa, wa;
    gauss_legendre<S>(nlat, xa, wa);
    // flip so colatitude increases with i
    g.x = xa.reverse();
    g.wlat = wa.reverse();
    g.colat = g.x.array().acos().matrix();
    g.sin_colat = (S(1) - g.x.array().square()).sqrt().matrix();
    g.lon.resize(nlon);
    for (int j = 0; j < nlon; ++j) g.lon[j] = S(2) * pi_v<S> * S(j) / S(nlon);
    g.wlon = S(2) * pi_v<S> / S(nlon);
    return g;
  }

  // Grid sized so quadratic pointwise products analysed back to lmax are
  // alias-free (the 2/3 rule): quadrature exact through total degree 3 lmax.
  static SphereGrid make_dealiased(int lmax) {
    const int nlat = (3 * lmax) / 2 + 1;
    const int nlon = 3 * lmax + 1;
    return make(lmax, std::max(nlat, lmax + 1), std::max(nlon, 2 * lmax + 1));
  }

  bool same_shape(const SphereGrid& o) const {
    return lmax == o.lmax && nlat == o.nlat && nlon == o.nlon;
  }
};

}  // namespace thinshell
