#pragma once

#include "thinshell/core.hpp"
#include "thinshell/sphere_grid.hpp"

namespace thinshell {

// Gridded scalar: nlat × nlon, row i = colatitude λ_i, column j = longitude φ_j.
template <class S> using ScalarFieldS2 = MatX<S>;

// Tangent field (u_λ, u_φ); the radial component is identically absent.
template <class S>
struct TangentFieldS2 {
  MatX<S> ulam;
  MatX<S> uphi;

  TangentFieldS2() = default;
  TangentFieldS2(Eigen::Index nlat, Eigen::Index nlon)
      : ulam(MatX<S>::Zero(nlat, nlon)), uphi(MatX<S>::Zero(nlat, nlon)) {}
  TangentFieldS2(MatX<S> l, MatX<S> p) : ulam(std::move(l)), uphi(std::move(p)) {}

  TangentFieldS2& operator+=(const TangentFieldS2& o) {
    ulam += o.ulam;
    uphi += o.uphi;
    return *this;
  }
  TangentFieldS2& operator-=(const TangentFieldS2& o) {
    ulam -= o.ulam;
    uphi -= o.uphi;
    return *this;
  }
  friend TangentFieldS2 operator+(TangentFieldS2 a, const TangentFieldS2& b) { return a += b; }
  friend TangentFieldS2 operator-(TangentFieldS2 a, const TangentFieldS2& b) { return a -= b; }
  friend TangentFieldS2 operator*(S c, TangentFieldS2 a) {
    a.ulam *= c;
    a.uphi *= c;
    return a;
  }
};

// Real-basis coefficients a_{l,m}, 0 <= l <= lmax, |m| <= l, at sh_index(l, m).
template <class S>
struct SpectralScalar {
  int lmax = 0;
  VecX<S> coef;

  SpectralScalar() = default;
  explicit SpectralScalar(int lmax_) : lmax(lmax_), coef(VecX<S>::Zero(sh_count(lmax_))) {}

  S& operator()(int l, int m) { return coef[sh_index(l, m)]; }
  S operator()(int l, int m) const { return coef[sh_index(l, m)]; }
};

// Stream-function coefficients ψ_{l,m}, 1 <= l <= lmax, representing the
// divergence-free tangent field u = curl′ψ.
template <class S>
struct DivFreeSpectral {
  int lmax = 0;
  VecX<S> psi;

  DivFreeSpectral() = default;
  explicit DivFreeSpectral(int lmax_) : lmax(lmax_), psi(VecX<S>::Zero(stream_count(lmax_))) {}

  S& operator()(int l, int m) { return psi[stream_index(l, m)]; }
  S operator()(int l, int m) const { return psi[stream_index(l, m)]; }

  SpectralScalar<S> as_stream() const {
    SpectralScalar<S> s(lmax);
    s.coef.tail(stream_count(lmax)) = psi;
    return s;
  }
  static DivFreeSpectral from_stream(const SpectralScalar<S>& s) {
    DivFreeSpectral u(s.lmax);
    u.psi = s.coef.tail(stream_count(s.lmax));
    return u;
  }

  DivFreeSpectral& operator+=(const DivFreeSpectral& o) {
    psi += o.psi;
    return *this;
  }
  DivFreeSpectral& operator-=(const DivFreeSpectral& o) {
    psi -= o.psi;
    return *this;
  }
  friend DivFreeSpectral operator+(DivFreeSpectral a, const DivFreeSpectral& b) { return a += b; }
  friend DivFreeSpectral operator-(DivFreeSpectral a, const DivFreeSpectral& b) { return a -= b; }
  friend DivFreeSpectral operator*(S c, DivFreeSpectral a) {
    a.psi *= c;
    return a;
  }
};

}  // namespace thinshell
