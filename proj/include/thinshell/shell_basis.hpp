#pragma once

#include <vector>

#include "thinshell/shell_ops.hpp"

namespace thinshell {

// Constrained radial bases for the free-boundary shell problem.
//
// Velocity fields are represented per spherical-harmonic mode (l,m) by two
// radial potentials evaluated at the geometry's nodes:
//   toroidal T:  u = T(r) curl'Y                    (u_r = 0)
//   poloidal P:  u = l(l+1) P(r) Y e_r + ((r^2 P)'/r) grad'Y
// Both are divergence-free by construction under the nodal derivative
// convention.  The free boundary conditions (u.n = 0 and curl u x n = 0 at
// r = 1 and r = 1+eps) reduce to boundary rows on the potentials:
//   toroidal:  (rT)'   = 0            at both radii
//   poloidal:  P = 0 and (r^2 P)'' = 0 at both radii
// where every derivative is that of the degree nr-1 nodal interpolant.  The
// rows do not depend on l, so one orthonormal null-space basis per sector
// serves every mode; only the Gram matrices carry l(l+1) factors.
template <class S>
struct ShellBasis {
  int nr = 0;
  int lmax = 0;
  S eps = S(0);

  MatX<S> zt;    // nr x kt   toroidal null-space basis (columns orthonormal)
  MatX<S> zp;    // nr x kp   poloidal null-space basis
  MatX<S> gt_zt; // (rT)'/r profiles of the toroidal basis columns
  MatX<S> gp_zp; // (r^2 P)'/r profiles of the poloidal basis columns
  MatX<S> bt;    // toroidal boundary rows (2 x nr)
  MatX<S> bp;    // poloidal boundary rows (4 x nr)
  VecX<S> pair_t;      // zt^T w1: pairing of 1/r-profile (lifted) data
  VecX<S> pair_p_grad; // (gp zp)^T w1: trace extraction for the gradient part

  // per-degree Grams and factorizations, index l in [1, lmax]
  std::vector<MatX<S>> mass_t, stiff_t, mass_p, stiff_p;
  std::vector<Eigen::LLT<MatX<S>>> mass_llt_t, mass_llt_p, step_llt_t, step_llt_p;

  int kt() const { return static_cast<int>(zt.cols()); }
  int kp() const { return static_cast<int>(zp.cols()); }

  static ShellBasis make(const ShellGeometry<S>& geom, S nu_dt) {
    const int nr = geom.nr;
    if (nr < 6) throw config_error("shell basis: need nr >= 6 radial nodes");
    ShellBasis b;
    b.nr = nr;
    b.lmax = geom.grid.lmax;
    b.eps = geom.eps;

    const VecX<S> dw0 = geom.deriv_weights(S(1));
    const VecX<S> dw1 = geom.deriv_weights(S(1) + geom.eps);
    const VecX<S> iw0 = geom.interp_weights(S(1));
    const VecX<S> iw1 = geom.interp_weights(S(1) + geom.eps);
    const MatX<S> d_r2 = geom.D * geom.r.cwiseProduct(geom.r).asDiagonal();

    b.bt.resize(2, nr);
    b.bt.row(0) = dw0.transpose() * geom.r.asDiagonal();
    b.bt.row(1) = dw1.transpose() * geom.r.asDiagonal();
    b.bp.resize(4, nr);
    b.bp.row(0) = iw0.transpose();
    b.bp.row(1) = iw1.transpose();
    b.bp.row(2) = dw0.transpose() * d_r2;
    b.bp.row(3) = dw1.transpose() * d_r2;

    b.zt = null_space(b.bt);
    b.zp = null_space(b.bp);

    const auto inv_r = geom.r.cwiseInverse();
    b.gt_zt = inv_r.asDiagonal() * (geom.D * (geom.r.asDiagonal() * b.zt));
    b.gp_zp = inv_r.asDiagonal() * (d_r2 * b.zp);
    b.pair_t = b.zt.transpose() * geom.w1;
    b.pair_p_grad = b.gp_zp.transpose() * geom.w1;

    // l-independent building blocks of the Grams
    const auto w2d = geom.w2.asDiagonal();
    const MatX<S> mt0 = b.zt.transpose() * w2d * b.zt;
    const MatX<S> kt_a = b.zt.transpose() * geom.w.asDiagonal() * b.zt;
    const MatX<S> kt_b = b.gt_zt.transpose() * w2d * b.gt_zt;
    const MatX<S> mp_a = b.zp.transpose() * w2d * b.zp;
    const MatX<S> mp_b = b.gp_zp.transpose() * w2d * b.gp_zp;
    const MatX<S> a1 = inv_r.asDiagonal() * b.zp;
    const MatX<S> a2 = -(inv_r.asDiagonal() * (geom.D * (geom.D * (geom.r.cwiseProduct(geom.r).asDiagonal() * b.zp))));
    const MatX<S> kp_aa = a1.transpose() * w2d * a1;
    const MatX<S> kp_ab = a1.transpose() * w2d * a2 + a2.transpose() * w2d * a1;
    const MatX<S> kp_bb = a2.transpose() * w2d * a2;

    b.mass_t.resize(b.lmax + 1);
    b.stiff_t.resize(b.lmax + 1);
    b.mass_p.resize(b.lmax + 1);
    b.stiff_p.resize(b.lmax + 1);
    b.mass_llt_t.resize(b.lmax + 1);
    b.mass_llt_p.resize(b.lmax + 1);
    b.step_llt_t.resize(b.lmax + 1);
    b.step_llt_p.resize(b.lmax + 1);
    for (int l = 1; l <= b.lmax; ++l) {
      const S ev = S(l) * S(l + 1);
      b.mass_t[l] = ev * mt0;
      b.stiff_t[l] = ev * ev * kt_a + ev * kt_b;
      b.mass_p[l] = ev * ev * mp_a + ev * mp_b;
      b.stiff_p[l] = ev * ev * ev * kp_aa + ev * ev * kp_ab + ev * kp_bb;
      b.mass_llt_t[l].compute(b.mass_t[l]);
      b.mass_llt_p[l].compute(b.mass_p[l]);
      b.step_llt_t[l].compute(b.mass_t[l] + nu_dt * b.stiff_t[l]);
      b.step_llt_p[l].compute(b.mass_p[l] + nu_dt * b.stiff_p[l]);
      if (b.mass_llt_t[l].info() != Eigen::Success || b.mass_llt_p[l].info() != Eigen::Success ||
          b.step_llt_t[l].info() != Eigen::Success || b.step_llt_p[l].info() != Eigen::Success)
        throw config_error("shell basis: radial system is singular at degree " +
                           std::to_string(l));
    }
    return b;
  }

  // nodal potential profiles of a coefficient matrix (columns = modes)
  MatX<S> toroidal_profiles(const MatX<S>& coefs_t) const { return zt * coefs_t; }
  MatX<S> poloidal_profiles(const MatX<S>& coefs_p) const { return zp * coefs_p; }

 private:
  static MatX<S> null_space(const MatX<S>& rows) {
    Eigen::JacobiSVD<MatX<S>> svd(rows, Eigen::ComputeFullV);
    const int rank = static_cast<int>(svd.rank());
    if (rank != static_cast<int>(rows.rows()))
      throw config_error("shell basis: degenerate boundary rows");
    return svd.matrixV().rightCols(rows.cols() - rank);
  }
};

}  // namespace thinshell
