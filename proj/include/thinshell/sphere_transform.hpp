#pragma once

#include "thinshell/core.hpp"
#include "thinshell/legendre.hpp"
#include "thinshell/sphere_fields.hpp"
#include "thinshell/sphere_grid.hpp"

#include <cmath>
#include <vector>

namespace thinshell {

// Scalar spherical-harmonic transforms on a SphereGrid, plus the derivative
// syntheses/analyses every tangential operator is built from. Real basis:
//   Y_{l,0}  =      Pbar_{l,0}(cos λ)
//   Y_{l,m}  = √2 · Pbar_{l,m}(cos λ) cos(mφ)   (m > 0)
//   Y_{l,-m} = √2 · Pbar_{l,m}(cos λ) sin(mφ)   (m > 0)
// Tables are computed once per grid and read-only afterwards.
template <class S>
class SphereTransform {
 public:
  explicit SphereTransform(SphereGrid<S> grid) : g_(std::move(grid)) {
    const int lmax = g_.lmax;
    tab_ = assoc_legendre_table<S>(lmax, g_.x);
    plm_over_sin_.resize(lmax + 1);
    for (int m = 0; m <= lmax; ++m) {
      plm_over_sin_[m] = tab_.plm[m];
      for (int i = 0; i < g_.nlat; ++i) plm_over_sin_[m].row(i) /= g_.sin_colat[i];
    }
    cosm_.resize(g_.nlon, lmax + 1);
    sinm_.resize(g_.nlon, lmax + 1);
    for (int j = 0; j < g_.nlon; ++j)
      for (int m = 0; m <= lmax; ++m) {
        cosm_(j, m) = std::cos(S(m) * g_.lon[j]);
        sinm_(j, m) = std::sin(S(m) * g_.lon[j]);
      }
  }

  const SphereGrid<S>& grid() const { return g_; }

  SpectralScalar<S> analyze(const ScalarFieldS2<S>& f) const {
    check_shape(f);
    const int lmax = g_.lmax;
    const MatX<S> fc = f * cosm_ * g_.wlon;  // nlat × (lmax+1)
    const MatX<S> fs = f * sinm_ * g_.wlon;
    SpectralScalar<S> a(lmax);
    for (int m = 0; m <= lmax; ++m) {
      const S kappa = m == 0 ? S(1) : std::sqrt(S(2));
      const VecX<S> wc = g_.wlat.cwiseProduct(fc.col(m)) * kappa;
      const VecX<S> proj_c = tab_.plm[m].transpose() * wc;
      for (int l = m; l <= lmax; ++l) a(l, m) = proj_c[l - m];
      if (m > 0) {
        const VecX<S> ws = g_.wlat.cwiseProduct(fs.col(m)) * kappa;
        const VecX<S> proj_s = tab_.plm[m].transpose() * ws;
        for (int l = m; l <= lmax; ++l) a(l, -m) = proj_s[l - m];
      }
    }
    return a;
  }

  ScalarFieldS2<S> synthesize(const SpectralScalar<S>& a) const {
    check_truncation(a.lmax);
    MatX<S> gc, gs;
    lambda_synth(a, tab_.plm, gc, gs);
    return gc * cosm_.transpose() + gs * sinm_.transpose();
  }

  // ∇′ψ = (∂_λ ψ, (1/sin λ) ∂_φ ψ)
  TangentFieldS2<S> synth_grad(const SpectralScalar<S>& a) const {
    check_truncation(a.lmax);
    TangentFieldS2<S> u(g_.nlat, g_.nlon);
    MatX<S> gc, gs;
    lambda_synth(a, tab_.dplm_dlambda, gc, gs);
    u.ulam = gc * cosm_.transpose() + gs * sinm_.transpose();
    dphi_over_sin_synth(a, u.uphi);
    return u;
  }

  // curl′ψ = ((1/sin λ) ∂_φ ψ, −∂_λ ψ): the tangential part of ∇×(r ψ ê_r).
  TangentFieldS2<S> synth_curl(const SpectralScalar<S>& a) const {
    check_truncation(a.lmax);
    TangentFieldS2<S> u(g_.nlat, g_.nlon);
    dphi_over_sin_synth(a, u.ulam);
    MatX<S> gc, gs;
    lambda_synth(a, tab_.dplm_dlambda, gc, gs);
    u.uphi = -(gc * cosm_.transpose() + gs * sinm_.transpose());
    return u;
  }

  TangentFieldS2<S> synth_curl(const DivFreeSpectral<S>& u) const {
    return synth_curl(u.as_stream());
  }

  // Coefficients of div′v via the quadrature adjoint (div′v, Y) = −(v, ∇′Y);
  // exact for band-limited v.
  SpectralScalar<S> analyze_div(const TangentFieldS2<S>& v) const {
    check_shape(v.ulam);
    check_shape(v.uphi);
    SpectralScalar<S> d(g_.lmax);
    pair_with_gradlike(v.ulam, v.uphi, d);
    d.coef *= S(-1);
    return d;
  }

  // Coefficients of curl′v via (curl′v, Y) = (v, curl′Y).
  SpectralScalar<S> analyze_curl(const TangentFieldS2<S>& v) const {
    check_shape(v.ulam);
    check_shape(v.uphi);
    // curl′Y has (λ, φ) components ((1/s)∂_φY, −∂_λY): pair v against them by
    // reusing the gradient pairing with swapped/negated components.
    SpectralScalar<S> c(g_.lmax);
    pair_with_gradlike(-v.uphi, v.ulam, c);
    return c;
  }

 private:
  SphereGrid<S> g_;
  AssocLegendreTable<S> tab_;
  std::vector<MatX<S>> plm_over_sin_;  // Pbar_{l,m} / sin λ
  MatX<S> cosm_, sinm_;                // nlon × (lmax+1)

  void check_shape(const MatX<S>& f) const {
    if (f.rows() != g_.nlat || f.cols() != g_.nlon)
      throw usage_error("SphereTransform: field shape does not match grid");
  }
  void check_truncation(int lmax) const {
    if (lmax != g_.lmax)
      throw usage_error("SphereTransform: coefficient truncation does not match grid");
  }

  // gc(i,m)/gs(i,m) = κ_m Σ_l shape[m](i,l) a_{l,±m}
  void lambda_synth(const SpectralScalar<S>& a, const std::vector<MatX<S>>& shape, MatX<S>& gc,
                    MatX<S>& gs) const {
    const int lmax = g_.lmax;
    gc = MatX<S>::Zero(g_.nlat, lmax + 1);
    gs = MatX<S>::Zero(g_.nlat, lmax + 1);
    for (int m = 0; m <= lmax; ++m) {
      const S kappa = m == 0 ? S(1) : std::sqrt(S(2));
      VecX<S> ac(lmax + 1 - m), as(lmax + 1 - m);
      for (int l = m; l <= lmax; ++l) {
        ac[l - m] = a(l, m);
        as[l - m] = m > 0 ? a(l, -m) : S(0);
      }
      gc.col(m) = kappa * (shape[m] * ac);
      if (m > 0) gs.col(m) = kappa * (shape[m] * as);
    }
  }

  // out = (1/sin λ) ∂_φ ψ on the grid.
  void dphi_over_sin_synth(const SpectralScalar<S>& a, MatX<S>& out) const {
    const int lmax = g_.lmax;
    MatX<S> hc = MatX<S>::Zero(g_.nlat, lmax + 1);
    MatX<S> hs = MatX<S>::Zero(g_.nlat, lmax + 1);
    for (int m = 1; m <= lmax; ++m) {
      const S kappa = std::sqrt(S(2));
      VecX<S> ac(lmax + 1 - m), as(lmax + 1 - m);
      for (int l = m; l <= lmax; ++l) {
        ac[l - m] = a(l, m);
        as[l - m] = a(l, -m);
      }
      // ∂_φ turns cos(mφ) ↦ −m sin(mφ) and sin(mφ) ↦ m cos(mφ)
      hc.col(m) = kappa * S(m) * (plm_over_sin_[m] * as);
      hs.col(m) = -kappa * S(m) * (plm_over_sin_[m] * ac);
    }
    out = hc * cosm_.transpose() + hs * sinm_.transpose();
  }

  // result(l,±m) = Σ_grid w · (a_field · ∂_λY_{l,±m} + b_field · (1/s)∂_φY_{l,±m})
  void pair_with_gradlike(const MatX<S>& a_field, const MatX<S>& b_field,
                          SpectralScalar<S>& out) const {
    const int lmax = g_.lmax;
    const MatX<S> ac = a_field * cosm_ * g_.wlon;
    const MatX<S> as = a_field * sinm_ * g_.wlon;
    const MatX<S> bc = b_field * cosm_ * g_.wlon;
    const MatX<S> bs = b_field * sinm_ * g_.wlon;
    for (int m = 0; m <= lmax; ++m) {
      const S kappa = m == 0 ? S(1) : std::sqrt(S(2));
      // cos-type Y_{l,m}: ∂_λY = κ dPbar cos(mφ); (1/s)∂_φY = −κ m Pbar/s sin(mφ)
      VecX<S> acc = tab_.dplm_dlambda[m].transpose() * g_.wlat.cwiseProduct(ac.col(m));
      if (m > 0) acc -= S(m) * (plm_over_sin_[m].transpose() * g_.wlat.cwiseProduct(bs.col(m)));
      for (int l = m; l <= lmax; ++l) out(l, m) = kappa * acc[l - m];
      if (m > 0) {
        // sin-type Y_{l,−m}: ∂_λY = κ dPbar sin(mφ); (1/s)∂_φY = κ m Pbar/s cos(mφ)
        VecX<S> acs = tab_.dplm_dlambda[m].transpose() * g_.wlat.cwiseProduct(as.col(m));
        acs += S(m) * (plm_over_sin_[m].transpose() * g_.wlat.cwiseProduct(bc.col(m)));
        for (int l = m; l <= lmax; ++l) out(l, -m) = kappa * acs[l - m];
      }
    }
  }
};

}  // namespace thinshell
