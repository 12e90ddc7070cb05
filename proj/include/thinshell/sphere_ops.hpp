#pragma once

#include "thinshell/core.hpp"
#include "thinshell/sphere_transform.hpp"

#include <cmath>
#include <variant>

namespace thinshell {

// ---- quadrature inner products ----------------------------------------------

template <class S, class DA, class DB>
S inner_s2(const SphereGrid<S>& g, const Eigen::MatrixBase<DA>& f, const Eigen::MatrixBase<DB>& h) {
  S acc = S(0);
  for (int i = 0; i < g.nlat; ++i) acc += g.quad_weight(i) * f.row(i).dot(h.row(i));
  return acc;
}

template <class S>
S inner_s2(const SphereGrid<S>& g, const TangentFieldS2<S>& u, const TangentFieldS2<S>& v) {
  return inner_s2(g, u.ulam, v.ulam) + inner_s2(g, u.uphi, v.uphi);
}

template <class S, class D>
S norm_s2(const SphereGrid<S>& g, const Eigen::MatrixBase<D>& f) {
  return std::sqrt(inner_s2(g, f, f));
}

template <class S>
S norm_s2(const SphereGrid<S>& g, const TangentFieldS2<S>& u) {
  return std::sqrt(inner_s2(g, u, u));
}

// ---- spectral norms on H = {curl′ψ} -----------------------------------------
// With ψ orthonormal-basis coefficients, ‖u‖²_{L²} = Σ l(l+1) ψ²,
// ‖curl′u‖² = Σ (l(l+1))² ψ², ‖A⁻¹u‖² = Σ ψ² / (l(l+1)).

enum class SphereNorm { L2_S2, V_SEMINORM, DA_INV };

template <class S>
S norm(const DivFreeSpectral<S>& u, SphereNorm kind) {
  S acc = S(0);
  for (int l = 1; l <= u.lmax; ++l) {
    const S ev = S(l) * S(l + 1);
    S w;
    switch (kind) {
      case SphereNorm::L2_S2: w = ev; break;
      case SphereNorm::V_SEMINORM: w = ev * ev; break;
      case SphereNorm::DA_INV: w = S(1) / ev; break;
    }
    for (int m = -l; m <= l; ++m) {
      const S p = u(l, m);
      acc += w * p * p;
    }
  }
  return std::sqrt(acc);
}

template <class S>
S inner_h(const DivFreeSpectral<S>& u, const DivFreeSpectral<S>& v) {
  S acc = S(0);
  for (int l = 1; l <= u.lmax; ++l)
    for (int m = -l; m <= l; ++m) acc += S(l) * S(l + 1) * u(l, m) * v(l, m);
  return acc;
}

// Stream-coefficient variant; rejects streams with an l = 0 component since A
// is invertible only on mean-free H.
template <class S>
S norm(const SpectralScalar<S>& stream, SphereNorm kind) {
  if (kind == SphereNorm::DA_INV && stream.coef[0] != S(0))
    throw usage_error("DA_INV norm undefined for a field with an l = 0 component");
  return norm(DivFreeSpectral<S>::from_stream(stream), kind);
}

// ---- spectral operators ------------------------------------------------------

template <class S>
SpectralScalar<S> laplace_beltrami(const SpectralScalar<S>& a) {
  SpectralScalar<S> out(a.lmax);
  for (int l = 0; l <= a.lmax; ++l)
    for (int m = -l; m <= l; ++m) out(l, m) = -S(l) * S(l + 1) * a(l, m);
  return out;
}

template <class S>
ScalarFieldS2<S> laplace_beltrami(const SphereTransform<S>& T, const ScalarFieldS2<S>& f) {
  return T.synthesize(laplace_beltrami(T.analyze(f)));
}

// Hodge split of a band-limited tangent field: v = ∇′χ + curl′ψ (+ nothing,
// S² has no harmonic fields). Potentials are mean-free.
template <class S>
struct HodgeSplit {
  SpectralScalar<S> chi;  // gradient potential
  SpectralScalar<S> psi;  // stream potential
};

template <class S>
HodgeSplit<S> hodge_split(const SphereTransform<S>& T, const TangentFieldS2<S>& v) {
  HodgeSplit<S> h{SpectralScalar<S>(T.grid().lmax), SpectralScalar<S>(T.grid().lmax)};
  const SpectralScalar<S> d = T.analyze_div(v);   // = Δ′χ coefficients
  const SpectralScalar<S> c = T.analyze_curl(v);  // = −Δ′ψ coefficients
  for (int l = 1; l <= T.grid().lmax; ++l) {
    const S ev = S(l) * S(l + 1);
    for (int m = -l; m <= l; ++m) {
      h.chi(l, m) = -d(l, m) / ev;
      h.psi(l, m) = c(l, m) / ev;
    }
  }
  return h;
}

// Leray–Helmholtz projection onto H: keep the curl′ sector.
template <class S>
DivFreeSpectral<S> leray_project(const SphereTransform<S>& T, const TangentFieldS2<S>& v) {
  DivFreeSpectral<S> u(T.grid().lmax);
  const SpectralScalar<S> c = T.analyze_curl(v);
  for (int l = 1; l <= T.grid().lmax; ++l) {
    const S ev = S(l) * S(l + 1);
    for (int m = -l; m <= l; ++m) u(l, m) = c(l, m) / ev;
  }
  return u;
}

// Laplace–de Rham on a tangent field: both Hodge potentials pick up −l(l+1).
template <class S>
TangentFieldS2<S> laplace_de_rham(const SphereTransform<S>& T, const TangentFieldS2<S>& v) {
  HodgeSplit<S> h = hodge_split(T, v);
  return T.synth_grad(laplace_beltrami(h.chi)) + T.synth_curl(laplace_beltrami(h.psi));
}

// Stokes operator A = curl′∘curl′ = P(−Δ′): diagonal l(l+1) on stream coeffs.
template <class S>
DivFreeSpectral<S> stokes_apply(const DivFreeSpectral<S>& u) {
  DivFreeSpectral<S> out(u.lmax);
  for (int l = 1; l <= u.lmax; ++l)
    for (int m = -l; m <= l; ++m) out(l, m) = S(l) * S(l + 1) * u(l, m);
  return out;
}

// ---- enum-dispatch wrapper ----------------------------------------------------

enum class S2Op {
  GRAD_PRIME,
  DIV_PRIME,
  CURL_PRIME_STREAM_TO_VEC,
  CURL_PRIME_VEC_TO_SCALAR,
  LAPLACE_BELTRAMI,
  LAPLACE_DE_RHAM,
};

template <class S>
using S2Field = std::variant<ScalarFieldS2<S>, TangentFieldS2<S>>;

template <class S>
S2Field<S> apply_operator(const SphereTransform<S>& T, S2Op kind, const S2Field<S>& in) {
  const auto* fs = std::get_if<ScalarFieldS2<S>>(&in);
  const auto* ft = std::get_if<TangentFieldS2<S>>(&in);
  switch (kind) {
    case S2Op::GRAD_PRIME:
      if (!fs) throw usage_error("GRAD_PRIME expects a scalar field");
      return T.synth_grad(T.analyze(*fs));
    case S2Op::CURL_PRIME_STREAM_TO_VEC:
      if (!fs) throw usage_error("CURL_PRIME_STREAM_TO_VEC expects a scalar field");
      return T.synth_curl(T.analyze(*fs));
    case S2Op::LAPLACE_BELTRAMI:
      if (!fs) throw usage_error("LAPLACE_BELTRAMI expects a scalar field");
      return laplace_beltrami(T, *fs);
    case S2Op::DIV_PRIME:
      if (!ft) throw usage_error("DIV_PRIME expects a tangent field");
      return T.synthesize(T.analyze_div(*ft));
    case S2Op::CURL_PRIME_VEC_TO_SCALAR:
      if (!ft) throw usage_error("CURL_PRIME_VEC_TO_SCALAR expects a tangent field");
      return T.synthesize(T.analyze_curl(*ft));
    case S2Op::LAPLACE_DE_RHAM:
      if (!ft) throw usage_error("LAPLACE_DE_RHAM expects a tangent field");
      return laplace_de_rham(T, *ft);
  }
  throw usage_error("unknown operator kind");
}

}  // namespace thinshell
