#pragma once

#include "thinshell/core.hpp"
#include "thinshell/shell_fields.hpp"
#include "thinshell/shell_geometry.hpp"
#include "thinshell/sphere_ops.hpp"
#include "thinshell/sphere_transform.hpp"

#include <cmath>
#include <variant>

namespace thinshell {

// ---- averaging and retraction --------------------------------------------------
//
// Scalar average onto the sphere:   (M psi)(x)    = (1/eps) ∫ r psi(r x) dr
// Retraction of a sphere field:     (R psi)(r x)  = psi(x) / r
// Shell-side projector:             Mhat = R ∘ M,  fluctuation Nhat = Id - Mhat.
// Vector versions act component-wise on (u_lambda, u_phi); the tilde projector
// zeroes the radial part of the mean, so the fluctuation keeps all of u_r.

template <class S>
ScalarFieldS2<S> average_m_scalar(const ShellGeometry<S>& geom, const ShellScalar<S>& f) {
  if (f.vals.rows() != geom.nr || f.vals.cols() != geom.nang())
    throw config_error("shell field does not match geometry");
  Eigen::RowVectorX<S> avg = (geom.w1.transpose() * f.vals) / geom.eps;
  return unflatten<S>(geom.grid, avg);
}

template <class S>
TangentFieldS2<S> average_mring(const ShellGeometry<S>& geom, const ShellVector<S>& u) {
  if (u.ulam.rows() != geom.nr || u.ulam.cols() != geom.nang())
    throw config_error("shell field does not match geometry");
  Eigen::RowVectorX<S> al = (geom.w1.transpose() * u.ulam) / geom.eps;
  Eigen::RowVectorX<S> ap = (geom.w1.transpose() * u.uphi) / geom.eps;
  return TangentFieldS2<S>{unflatten<S>(geom.grid, al), unflatten<S>(geom.grid, ap)};
}

template <class S>
ShellScalar<S> retract_scalar(const ShellGeometry<S>& geom, const ScalarFieldS2<S>& psi) {
  if (psi.rows() != geom.grid.nlat || psi.cols() != geom.grid.nlon)
    throw config_error("sphere field does not match embedded grid");
  ShellScalar<S> out(geom.nr, geom.nang());
  const Eigen::RowVectorX<S> row = flatten(psi);
  for (int k = 0; k < geom.nr; ++k) out.vals.row(k) = row / geom.r[k];
  return out;
}

template <class S>
ShellVector<S> retract_ring(const ShellGeometry<S>& geom, const TangentFieldS2<S>& v) {
  if (v.ulam.rows() != geom.grid.nlat || v.ulam.cols() != geom.grid.nlon)
    throw config_error("sphere field does not match embedded grid");
  ShellVector<S> out(geom.nr, geom.nang());
  const Eigen::RowVectorX<S> rl = flatten(v.ulam);
  const Eigen::RowVectorX<S> rp = flatten(v.uphi);
  for (int k = 0; k < geom.nr; ++k) {
    out.ulam.row(k) = rl / geom.r[k];
    out.uphi.row(k) = rp / geom.r[k];
  }
  return out;
}

template <class S>
ShellScalar<S> average_mhat(const ShellGeometry<S>& geom, const ShellScalar<S>& f) {
  return retract_scalar(geom, average_m_scalar(geom, f));
}

template <class S>
ShellScalar<S> average_nhat(const ShellGeometry<S>& geom, const ShellScalar<S>& f) {
  ShellScalar<S> out = f;
  out.vals -= average_mhat(geom, f).vals;
  return out;
}

template <class S>
ShellVector<S> average_mtilde(const ShellGeometry<S>& geom, const ShellVector<S>& u) {
  ShellVector<S> out = retract_ring(geom, average_mring(geom, u));
  return out;  // radial component is zero by construction
}

template <class S>
ShellVector<S> average_ntilde(const ShellGeometry<S>& geom, const ShellVector<S>& u) {
  ShellVector<S> out = u;
  const ShellVector<S> m = average_mtilde(geom, u);
  out.ulam -= m.ulam;
  out.uphi -= m.uphi;
  return out;
}

enum class AvgKind { M_SCALAR, MHAT, NHAT, MTILDE, NTILDE, MRING };

template <class S>
using ShellOrSphereField =
    std::variant<ShellScalar<S>, ShellVector<S>, ScalarFieldS2<S>, TangentFieldS2<S>>;

template <class S>
ShellOrSphereField<S> average(const ShellGeometry<S>& geom, AvgKind kind,
                              const ShellOrSphereField<S>& in) {
  const auto* fs = std::get_if<ShellScalar<S>>(&in);
  const auto* fv = std::get_if<ShellVector<S>>(&in);
  switch (kind) {
    case AvgKind::M_SCALAR:
      if (!fs) throw usage_error("M_SCALAR expects a shell scalar field");
      return average_m_scalar(geom, *fs);
    case AvgKind::MHAT:
      if (!fs) throw usage_error("MHAT expects a shell scalar field");
      return average_mhat(geom, *fs);
    case AvgKind::NHAT:
      if (!fs) throw usage_error("NHAT expects a shell scalar field");
      return average_nhat(geom, *fs);
    case AvgKind::MTILDE:
      if (!fv) throw usage_error("MTILDE expects a shell vector field");
      return average_mtilde(geom, *fv);
    case AvgKind::NTILDE:
      if (!fv) throw usage_error("NTILDE expects a shell vector field");
      return average_ntilde(geom, *fv);
    case AvgKind::MRING:
      if (!fv) throw usage_error("MRING expects a shell vector field");
      return average_mring(geom, *fv);
  }
  throw usage_error("unknown averaging kind");
}

enum class RetractKind { R_SCALAR, R_RING };

template <class S>
ShellOrSphereField<S> retract(const ShellGeometry<S>& geom, RetractKind kind,
                              const ShellOrSphereField<S>& in) {
  switch (kind) {
    case RetractKind::R_SCALAR:
      if (const auto* f = std::get_if<ScalarFieldS2<S>>(&in)) return retract_scalar(geom, *f);
      throw usage_error("R_SCALAR expects a sphere scalar field");
    case RetractKind::R_RING:
      if (const auto* v = std::get_if<TangentFieldS2<S>>(&in)) return retract_ring(geom, *v);
      throw usage_error("R_RING expects a tangential sphere field (no radial component)");
  }
  throw usage_error("unknown retract kind");
}

// ---- mean/fluctuation decomposition --------------------------------------------

template <class S>
struct ShellDecomposition {
  ShellVector<S> mean;      // Mtilde u (lifted, purely tangential)
  ShellVector<S> fluct;     // Ntilde u = u - mean; carries all of u_r
  TangentFieldS2<S> trace;  // Mring u on the sphere
};

template <class S>
ShellDecomposition<S> decompose(const ShellGeometry<S>& geom, const ShellVector<S>& u) {
  ShellDecomposition<S> d;
  d.trace = average_mring(geom, u);
  d.mean = retract_ring(geom, d.trace);
  d.fluct = u;
  d.fluct.ulam -= d.mean.ulam;
  d.fluct.uphi -= d.mean.uphi;
  return d;
}

// ---- inner products and norms on the shell --------------------------------------

namespace detail {
template <class S>
S angular_dot(const SphereGrid<S>& g, const MatX<S>& a, int ka, const MatX<S>& b, int kb) {
  S lev = S(0);
  for (int i = 0; i < g.nlat; ++i)
    lev += g.quad_weight(i) *
           a.row(ka).segment(i * g.nlon, g.nlon).dot(b.row(kb).segment(i * g.nlon, g.nlon));
  return lev;
}
}  // namespace detail

// plain L^2(Q_eps): measure r^2 dr dσ
template <class S>
S inner_shell(const ShellGeometry<S>& geom, const MatX<S>& f, const MatX<S>& h) {
  S acc = S(0);
  for (int k = 0; k < geom.nr; ++k)
    acc += geom.w2[k] * detail::angular_dot(geom.grid, f, k, h, k);
  return acc;
}

template <class S>
S inner_shell(const ShellGeometry<S>& geom, const ShellVector<S>& u, const ShellVector<S>& v) {
  return inner_shell(geom, u.ur, v.ur) + inner_shell(geom, u.ulam, v.ulam) +
         inner_shell(geom, u.uphi, v.uphi);
}

// weighted product (u, v)_r = ∫ r^2 u·v dy : measure r^4 dr dσ
template <class S>
S inner_shell_weighted(const ShellGeometry<S>& geom, const ShellVector<S>& u,
                       const ShellVector<S>& v) {
  const VecX<S> w4 = geom.moment_weights(4);
  S acc = S(0);
  for (int k = 0; k < geom.nr; ++k)
    acc += w4[k] * (detail::angular_dot(geom.grid, u.ur, k, v.ur, k) +
                    detail::angular_dot(geom.grid, u.ulam, k, v.ulam, k) +
                    detail::angular_dot(geom.grid, u.uphi, k, v.uphi, k));
  return acc;
}

template <class S>
S norm_shell(const ShellGeometry<S>& geom, const ShellScalar<S>& f) {
  return std::sqrt(inner_shell(geom, f.vals, f.vals));
}

template <class S>
S norm_shell(const ShellGeometry<S>& geom, const ShellVector<S>& u) {
  return std::sqrt(inner_shell(geom, u, u));
}

// ||u||_{L^p(Q_eps)} of the pointwise magnitude (p >= 1)
template <class S>
S norm_shell_lp(const ShellGeometry<S>& geom, const ShellVector<S>& u, S p) {
  const SphereGrid<S>& g = geom.grid;
  S acc = S(0);
  for (int k = 0; k < geom.nr; ++k) {
    S lev = S(0);
    for (int i = 0; i < g.nlat; ++i) {
      const S wq = g.quad_weight(i);
      for (int j = 0; j < g.nlon; ++j) {
        const int c = i * g.nlon + j;
        const S mag2 = u.ur(k, c) * u.ur(k, c) + u.ulam(k, c) * u.ulam(k, c) +
                       u.uphi(k, c) * u.uphi(k, c);
        lev += wq * std::pow(mag2, p / S(2));
      }
    }
    acc += geom.w2[k] * lev;
  }
  return std::pow(acc, S(1) / p);
}

// ---- nodal vector calculus on Q_eps ----------------------------------------------
// Horizontal derivatives are spectral per level; radial derivatives use the
// nodal differentiation matrix. All three need at least three radial nodes to
// resolve the radial metric factors.

namespace detail {
template <class S>
void require_diff_nodes(const ShellGeometry<S>& geom) {
  if (geom.nr < 3) throw config_error("shell differentiation needs at least three radial nodes");
}
}  // namespace detail

template <class S>
ShellVector<S> grad3(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                     const ShellScalar<S>& f) {
  detail::require_diff_nodes(geom);
  ShellVector<S> out(geom.nr, geom.nang());
  out.ur = geom.D * f.vals;
  for (int k = 0; k < geom.nr; ++k) {
    const TangentFieldS2<S> h = T.synth_grad(T.analyze(f.level(geom.grid, k)));
    out.ulam.row(k) = flatten(h.ulam) / geom.r[k];
    out.uphi.row(k) = flatten(h.uphi) / geom.r[k];
  }
  return out;
}

template <class S>
ShellScalar<S> div3(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                    const ShellVector<S>& u) {
  detail::require_diff_nodes(geom);
  ShellScalar<S> out(geom.nr, geom.nang());
  const VecX<S> r2 = geom.r.cwiseProduct(geom.r);
  const MatX<S> radial = geom.D * (r2.asDiagonal() * u.ur);
  for (int k = 0; k < geom.nr; ++k) {
    const ScalarFieldS2<S> dh = T.synthesize(T.analyze_div(u.tangent_level(geom.grid, k)));
    out.vals.row(k) = radial.row(k) / r2[k] + flatten(dh) / geom.r[k];
  }
  return out;
}

template <class S>
ShellVector<S> curl3(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                     const ShellVector<S>& u) {
  detail::require_diff_nodes(geom);
  ShellVector<S> out(geom.nr, geom.nang());
  const MatX<S> d_rulam = geom.D * (geom.r.asDiagonal() * u.ulam);
  const MatX<S> d_ruphi = geom.D * (geom.r.asDiagonal() * u.uphi);
  for (int k = 0; k < geom.nr; ++k) {
    const S rk = geom.r[k];
    const ScalarFieldS2<S> vort = T.synthesize(T.analyze_curl(u.tangent_level(geom.grid, k)));
    const TangentFieldS2<S> gr = T.synth_grad(T.analyze(unflatten<S>(geom.grid, u.ur.row(k))));
    out.ur.row(k) = flatten(vort) / rk;
    out.ulam.row(k) = (flatten(gr.uphi) - d_ruphi.row(k)) / rk;  // (1/(rs)) dphi u_r - (1/r) dr(r u_phi)
    out.uphi.row(k) = (d_rulam.row(k) - flatten(gr.ulam)) / rk;  // (1/r) dr(r u_lam) - (1/r) dlam u_r
  }
  return out;
}

// scalar Laplacian: f'' + (2/r) f' + (1/r^2) Δ' f
template <class S>
ShellScalar<S> laplacian3(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                          const ShellScalar<S>& f) {
  detail::require_diff_nodes(geom);
  ShellScalar<S> out(geom.nr, geom.nang());
  const MatX<S> d1 = geom.D * f.vals;
  const MatX<S> d2 = geom.D * d1;
  for (int k = 0; k < geom.nr; ++k) {
    const ScalarFieldS2<S> lb = T.synthesize(laplace_beltrami(T.analyze(f.level(geom.grid, k))));
    out.vals.row(k) =
        d2.row(k) + (S(2) / geom.r[k]) * d1.row(k) + flatten(lb) / (geom.r[k] * geom.r[k]);
  }
  return out;
}

// vector Laplacian. The spherical-frame components of tangent vector
// harmonics are not band-limited scalars (the frame is singular at the
// poles), so the componentwise coordinate formula cannot be evaluated
// spectrally. Work on the vector-harmonic radial profiles instead: writing
// u = a(r) Y e_r + b(r) ∇′Y + c(r) curl′Y per (l, m) with ev = l(l+1),
//   (Δu)_a = a″ + (2/r)a′ − (2+ev) a/r² + 2 ev b/r²
//   (Δu)_b = b″ + (2/r)b′ − ev b/r² + 2 a/r²
//   (Δu)_c = c″ + (2/r)c′ − ev c/r²
template <class S>
ShellVector<S> laplacian3(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                          const ShellVector<S>& u) {
  detail::require_diff_nodes(geom);
  const SphereGrid<S>& g = geom.grid;
  const int nc = sh_count(g.lmax);
  VecX<S> ev(nc), evinv(nc);
  for (int l = 0; l <= g.lmax; ++l)
    for (int m = -l; m <= l; ++m) {
      ev[sh_index(l, m)] = S(l) * S(l + 1);
      evinv[sh_index(l, m)] = l > 0 ? S(1) / (S(l) * S(l + 1)) : S(0);
    }
  MatX<S> A(geom.nr, nc), B(geom.nr, nc), C(geom.nr, nc);
  for (int k = 0; k < geom.nr; ++k) {
    A.row(k) = T.analyze(unflatten<S>(g, u.ur.row(k))).coef;
    const TangentFieldS2<S> tan = u.tangent_level(g, k);
    C.row(k) = T.analyze_curl(tan).coef.cwiseProduct(evinv);
    B.row(k) = -T.analyze_div(tan).coef.cwiseProduct(evinv);
  }
  const VecX<S> two_over_r = S(2) * geom.r.cwiseInverse();
  const VecX<S> inv_r2 = geom.r.cwiseProduct(geom.r).cwiseInverse();
  const auto radial = [&](const MatX<S>& F) -> MatX<S> {
    const MatX<S> d1 = geom.D * F;
    return geom.D * d1 + two_over_r.asDiagonal() * d1;
  };
  const MatX<S> LA = radial(A) -
                     inv_r2.asDiagonal() * (A * (ev.array() + S(2)).matrix().asDiagonal()) +
                     inv_r2.asDiagonal() * (S(2) * B * ev.asDiagonal());
  const MatX<S> LB =
      radial(B) - inv_r2.asDiagonal() * (B * ev.asDiagonal()) + inv_r2.asDiagonal() * (S(2) * A);
  const MatX<S> LC = radial(C) - inv_r2.asDiagonal() * (C * ev.asDiagonal());
  ShellVector<S> out(geom.nr, geom.nang());
  SpectralScalar<S> sa(g.lmax), sb(g.lmax), sc(g.lmax);
  for (int k = 0; k < geom.nr; ++k) {
    sa.coef = LA.row(k);
    sb.coef = LB.row(k);
    sc.coef = LC.row(k);
    out.ur.row(k) = flatten(T.synthesize(sa));
    out.set_tangent_level(k, T.synth_grad(sb) + T.synth_curl(sc));
  }
  return out;
}

// duality pairing of a shell field against a retracted sphere field:
// (u, R v)_{L^2(Q_eps)} = Σ_k w1_k (u_tan(r_k), v)_{S^2}
template <class S>
S dual_pair(const ShellGeometry<S>& geom, const ShellVector<S>& u, const TangentFieldS2<S>& v) {
  const Eigen::RowVectorX<S> vl = flatten(v.ulam);
  const Eigen::RowVectorX<S> vp = flatten(v.uphi);
  const SphereGrid<S>& g = geom.grid;
  S acc = S(0);
  for (int k = 0; k < geom.nr; ++k) {
    S lev = S(0);
    for (int i = 0; i < g.nlat; ++i) {
      const S wq = g.quad_weight(i);
      const int o = i * g.nlon;
      lev += wq * (u.ulam.row(k).segment(o, g.nlon).dot(vl.segment(o, g.nlon)) +
                   u.uphi.row(k).segment(o, g.nlon).dot(vp.segment(o, g.nlon)));
    }
    acc += geom.w1[k] * lev;
  }
  return acc;
}

// |(M psi, phi)_{S^2} - (psi, (1/eps) R phi)_{Q_eps}|: the dual-operator identity
template <class S>
S dual_pair_check(const ShellGeometry<S>& geom, const ShellScalar<S>& psi,
                  const ScalarFieldS2<S>& phi) {
  const S lhs = inner_s2(geom.grid, average_m_scalar(geom, psi), phi);
  const ShellScalar<S> lifted = retract_scalar(geom, phi);
  const S rhs = inner_shell(geom, psi.vals, lifted.vals) / geom.eps;
  return std::abs(lhs - rhs);
}

// ---- enum wrappers ---------------------------------------------------------------

enum class ShellDiffKind { CURL3, DIV3, LAPLACIAN3 };

template <class S>
ShellOrSphereField<S> shell_diff(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                                 ShellDiffKind kind, const ShellOrSphereField<S>& in) {
  const auto* fs = std::get_if<ShellScalar<S>>(&in);
  const auto* fv = std::get_if<ShellVector<S>>(&in);
  switch (kind) {
    case ShellDiffKind::CURL3:
      if (!fv) throw usage_error("CURL3 expects a shell vector field");
      return curl3(geom, T, *fv);
    case ShellDiffKind::DIV3:
      if (!fv) throw usage_error("DIV3 expects a shell vector field");
      return div3(geom, T, *fv);
    case ShellDiffKind::LAPLACIAN3:
      if (fs) return laplacian3(geom, T, *fs);
      if (fv) return laplacian3(geom, T, *fv);
      throw usage_error("LAPLACIAN3 expects a shell field");
  }
  throw usage_error("unknown shell differential kind");
}

enum class ShellInnerKind { L2_QEPS, WEIGHTED_R, V_EPS_SEMINORM };

template <class S>
S shell_inner(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
              const ShellVector<S>& u, const ShellVector<S>& v, ShellInnerKind kind) {
  switch (kind) {
    case ShellInnerKind::L2_QEPS: return inner_shell(geom, u, v);
    case ShellInnerKind::WEIGHTED_R: return inner_shell_weighted(geom, u, v);
    case ShellInnerKind::V_EPS_SEMINORM:
      return inner_shell(geom, curl3(geom, T, u), curl3(geom, T, v));
  }
  throw usage_error("unknown shell inner-product kind");
}

// ---- discrete H_eps membership -----------------------------------------------------
// div u = 0 in Q_eps and u·n = 0 at both shell radii (interpolated to the
// boundaries, which are not nodes).

template <class S>
struct HepsResidual {
  S div_residual;  // ‖div u‖_{L²(Q_eps)} / ‖u‖_{L²(Q_eps)}
  S bc_residual;   // max boundary |u_r| relative to the L² size of u
  bool within(S tol) const { return div_residual <= tol && bc_residual <= tol; }
};

template <class S>
HepsResidual<S> in_H_eps(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                         const ShellVector<S>& u) {
  const S scale = norm_shell(geom, u);
  const S inv = scale > S(0) ? S(1) / scale : S(1);
  HepsResidual<S> res;
  const ShellScalar<S> d = div3(geom, T, u);
  res.div_residual = norm_shell(geom, d) * inv;
  const VecX<S> ci = geom.interp_weights(S(1));
  const VecX<S> co = geom.interp_weights(S(1) + geom.eps);
  const Eigen::RowVectorX<S> inner_trace = ci.transpose() * u.ur;
  const Eigen::RowVectorX<S> outer_trace = co.transpose() * u.ur;
  res.bc_residual =
      std::max(inner_trace.cwiseAbs().maxCoeff(), outer_trace.cwiseAbs().maxCoeff()) * inv;
  return res;
}

// ---- manufactured divergence-free fields -------------------------------------------
// Toroidal/poloidal single modes; every divergence-free field with u·n = 0 on
// the boundary is a sum of such modes.

// u = curl(T(r) Y_{l,m} r e_r): tangential, u_tan(r_k) = Tprof[k]·curl'Y_{l,m}
template <class S>
ShellVector<S> toroidal_mode(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                             int l, int m, const VecX<S>& Tprof) {
  if (Tprof.size() != geom.nr) throw config_error("radial profile does not match geometry");
  SpectralScalar<S> a(geom.grid.lmax);
  a(l, m) = S(1);
  const TangentFieldS2<S> c = T.synth_curl(a);
  ShellVector<S> out(geom.nr, geom.nang());
  const Eigen::RowVectorX<S> cl = flatten(c.ulam);
  const Eigen::RowVectorX<S> cp = flatten(c.uphi);
  for (int k = 0; k < geom.nr; ++k) {
    out.ulam.row(k) = Tprof[k] * cl;
    out.uphi.row(k) = Tprof[k] * cp;
  }
  return out;
}

// u = curl curl(S(r) Y_{l,m} r e_r):
//   u_r = l(l+1) S(r)/r · Y,   u_tan = ((r S)'/r) · grad'Y
template <class S>
ShellVector<S> poloidal_mode(const ShellGeometry<S>& geom, const SphereTransform<S>& T,
                             int l, int m, const VecX<S>& Sprof) {
  if (Sprof.size() != geom.nr) throw config_error("radial profile does not match geometry");
  SpectralScalar<S> a(geom.grid.lmax);
  a(l, m) = S(1);
  const ScalarFieldS2<S> y = T.synthesize(a);
  const TangentFieldS2<S> gy = T.synth_grad(a);
  const VecX<S> rs_prime = geom.D * geom.r.cwiseProduct(Sprof);
  ShellVector<S> out(geom.nr, geom.nang());
  const Eigen::RowVectorX<S> fy = flatten(y);
  const Eigen::RowVectorX<S> gl = flatten(gy.ulam);
  const Eigen::RowVectorX<S> gp = flatten(gy.uphi);
  const S ev = S(l) * S(l + 1);
  for (int k = 0; k < geom.nr; ++k) {
    out.ur.row(k) = (ev * Sprof[k] / geom.r[k]) * fy;
    out.ulam.row(k) = (rs_prime[k] / geom.r[k]) * gl;
    out.uphi.row(k) = (rs_prime[k] / geom.r[k]) * gp;
  }
  return out;
}

}  // namespace thinshell
