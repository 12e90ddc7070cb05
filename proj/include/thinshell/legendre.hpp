#pragma once

#include "thinshell/core.hpp"

#include <cmath>

namespace thinshell {

// Gauss–Legendre nodes (ascending) and weights for ∫_{-1}^{1} f(x) dx.
// Newton iteration on P_n with the usual Chebyshev-flavoured initial guess;
// exact for polynomials of degree <= 2n-1.
template <class S>
void gauss_legendre(int n, VecX<S>& x, VecX<S>& w) {
  if (n < 1) throw config_error("gauss_legendre: need at least one node");
  x.resize(n);
  w.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // root guess, counting from the one nearest x = 1
    S z = std::cos(pi_v<S> * (S(i) + S(0.75)) / (S(n) + S(0.5)));
    S pp = S(0);
    for (int it = 0; it < 100; ++it) {
      // recurrence for P_n(z) and P_{n-1}(z)
      S p0 = S(1), p1 = z;
      for (int l = 2; l <= n; ++l) {
        const S p2 = ((S(2 * l - 1)) * z * p1 - S(l - 1) * p0) / S(l);
        p0 = p1;
        p1 = p2;
      }
      pp = S(n) * (z * p1 - p0) / (z * z - S(1));
      const S dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < S(1e-16)) break;
    }
    x[n - 1 - i] = z;
    x[i] = -z;
    const S wi = S(2) / ((S(1) - z * z) * pp * pp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = S(0);  // clean the symmetric middle node
}

// Legendre polynomial values P_0..P_{pmax}(x) in one sweep.
template <class S>
VecX<S> legendre_values(int pmax, S x) {
  VecX<S> p(pmax + 1);
  p[0] = S(1);
  if (pmax >= 1) p[1] = x;
  for (int l = 2; l <= pmax; ++l)
    p[l] = (S(2 * l - 1) * x * p[l - 1] - S(l - 1) * p[l - 2]) / S(l);
  return p;
}

// First and second derivatives of P_0..P_{pmax} at x (|x| <= 1 away from
// endpoints; endpoint values come from the closed forms below).
template <class S>
void legendre_derivatives(int pmax, S x, VecX<S>& d1, VecX<S>& d2) {
  const VecX<S> p = legendre_values<S>(pmax, x);
  d1.resize(pmax + 1);
  d2.resize(pmax + 1);
  if (std::abs(x) < S(1) - S(1e-12)) {
    const S omx2 = S(1) - x * x;
    d1[0] = S(0);
    for (int l = 1; l <= pmax; ++l)  // (1-x^2) P'_l = l (P_{l-1} - x P_l)
      d1[l] = S(l) * (p[l - 1] - x * p[l]) / omx2;
    for (int l = 0; l <= pmax; ++l)  // Legendre ODE: (1-x^2)P'' = 2xP' - l(l+1)P
      d2[l] = (S(2) * x * d1[l] - S(l * (l + 1)) * p[l]) / omx2;
  } else {
    const S sgn = x > S(0) ? S(1) : S(-1);
    for (int l = 0; l <= pmax; ++l) {
      const S parity1 = (sgn > 0 || l % 2 == 1) ? S(1) : S(-1);   // sign of P'_l(±1)
      const S parity2 = (sgn > 0 || l % 2 == 0) ? S(1) : S(-1);   // sign of P''_l(±1)
      d1[l] = parity1 * S(l) * S(l + 1) / S(2);
      d2[l] = parity2 * S(l - 1) * S(l) * S(l + 1) * S(l + 2) / S(8);
    }
  }
}

// Node-table variants: row i is node x[i], column l the degree.
template <class S>
MatX<S> legendre_values(int pmax, const VecX<S>& x) {
  MatX<S> p(x.size(), pmax + 1);
  for (int i = 0; i < x.size(); ++i) p.row(i) = legendre_values<S>(pmax, x[i]).transpose();
  return p;
}

template <class S>
void legendre_derivatives(int pmax, const VecX<S>& x, MatX<S>& d1, MatX<S>& d2) {
  d1.resize(x.size(), pmax + 1);
  d2.resize(x.size(), pmax + 1);
  VecX<S> r1, r2;
  for (int i = 0; i < x.size(); ++i) {
    legendre_derivatives<S>(pmax, x[i], r1, r2);
    d1.row(i) = r1.transpose();
    d2.row(i) = r2.transpose();
  }
}

// Orthonormal (sphere-normalised) associated Legendre functions
//   Pbar_{l,m}(x) = sqrt((2l+1)/(4π) (l-m)!/(l+m)!) P_l^m(x),  m >= 0,
// without the Condon–Shortley phase, so Pbar_{l,m} >= 0 near x = 1.
// Returns value tables for all l in [m, lmax] at each node, plus d/dλ tables
// (λ the colatitude, x = cos λ).
template <class S>
struct AssocLegendreTable {
  // plm[m] is nnodes × (lmax+1-m); column c holds l = m + c.
  std::vector<MatX<S>> plm;
  std::vector<MatX<S>> dplm_dlambda;
};

template <class S>
AssocLegendreTable<S> assoc_legendre_table(int lmax, const VecX<S>& x) {
  const auto n = static_cast<int>(x.size());
  AssocLegendreTable<S> t;
  t.plm.resize(lmax + 1);
  t.dplm_dlambda.resize(lmax + 1);
  for (int m = 0; m <= lmax; ++m) {
    t.plm[m].resize(n, lmax + 1 - m);
    t.dplm_dlambda[m].resize(n, lmax + 1 - m);
  }
  for (int i = 0; i < n; ++i) {
    const S xi = x[i];
    const S sx = std::sqrt(S(1) - xi * xi);  // sin λ > 0 at interior nodes
    // diagonal seed Pbar_{m,m}
    S pmm = S(1) / std::sqrt(four_pi<S>);
    for (int m = 0; m <= lmax; ++m) {
      if (m > 0) pmm *= sx * std::sqrt(S(2 * m + 1) / S(2 * m));
      S pl1 = pmm;                                        // l = m
      S pl2 = S(0);                                       // l = m-1 (unused seed)
      for (int l = m; l <= lmax; ++l) {
        S pl;
        if (l == m) {
          pl = pmm;
        } else if (l == m + 1) {
          pl = xi * std::sqrt(S(2 * m + 3)) * pmm;
        } else {
          const S a = std::sqrt(S((2 * l - 1) * (2 * l + 1)) / S((l - m) * (l + m)));
          const S b = std::sqrt(S(2 * l + 1) / S(2 * l - 3) * S((l - 1 - m) * (l - 1 + m)) /
                                S((l - m) * (l + m)));
          pl = a * xi * pl1 - b * pl2;
        }
        t.plm[m](i, l - m) = pl;
        // d/dλ = (l x Pbar_{l,m} - c_{l,m} Pbar_{l-1,m}) / sin λ
        const S c = l > m ? std::sqrt(S((l - m) * (l + m)) * S(2 * l + 1) / S(2 * l - 1)) : S(0);
        const S prev = l > m ? pl1 : S(0);
        t.dplm_dlambda[m](i, l - m) = (S(l) * xi * pl - c * prev) / sx;
        if (l > m) pl2 = pl1;
        if (l > m) pl1 = pl;
      }
    }
  }
  return t;
}

}  // namespace thinshell
