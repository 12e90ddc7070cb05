#include "doctest.h"

#include "thinshell/sphere_ops.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace thinshell;

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

// pointwise real spherical harmonic, independent of the transform machinery
double eval_y(int l, int m, double lam, double phi) {
  VecX<double> x(1);
  x << std::cos(lam);
  const AssocLegendreTable<double> tab = assoc_legendre_table(l, x);
  const int am = std::abs(m);
  const double p = tab.plm[am](0, l - am);
  if (m == 0) return p;
  return std::sqrt(2.0) * p * (m > 0 ? std::cos(m * phi) : std::sin(am * phi));
}

// fourth-order centered finite differences for the coordinate formula
// (1/s) d_lam(s d_lam f) + (1/s^2) d_phi^2 f
template <class F>
double fd_scalar_laplacian(F&& f, double lam, double phi, double h) {
  const double f0 = f(lam, phi);
  const double d2l = (-f(lam + 2 * h, phi) + 16 * f(lam + h, phi) - 30 * f0 +
                      16 * f(lam - h, phi) - f(lam - 2 * h, phi)) /
                     (12 * h * h);
  const double d1l = (f(lam - 2 * h, phi) - 8 * f(lam - h, phi) + 8 * f(lam + h, phi) -
                      f(lam + 2 * h, phi)) /
                     (12 * h);
  const double d2p = (-f(lam, phi + 2 * h) + 16 * f(lam, phi + h) - 30 * f0 +
                      16 * f(lam, phi - h) - f(lam, phi - 2 * h)) /
                     (12 * h * h);
  const double s = std::sin(lam);
  return d2l + (std::cos(lam) / s) * d1l + d2p / (s * s);
}

double fd_laplace_beltrami(int l, int m, double lam, double phi, double h) {
  return fd_scalar_laplacian([&](double a, double b) { return eval_y(l, m, a, b); }, lam, phi, h);
}

// closed-form components of curl' Y_{l,m}: ((1/s) d_phi Y, -d_lam Y)
void eval_curl_y(int l, int m, double lam, double phi, double& vl, double& vp) {
  VecX<double> x(1);
  x << std::cos(lam);
  const AssocLegendreTable<double> tab = assoc_legendre_table(l, x);
  const int am = std::abs(m);
  const double p = tab.plm[am](0, l - am);
  const double dp = tab.dplm_dlambda[am](0, l - am);
  double ang = 1.0, dang = 0.0;
  if (m > 0) {
    ang = std::sqrt(2.0) * std::cos(m * phi);
    dang = -m * std::sqrt(2.0) * std::sin(m * phi);
  } else if (m < 0) {
    ang = std::sqrt(2.0) * std::sin(am * phi);
    dang = am * std::sqrt(2.0) * std::cos(am * phi);
  }
  vl = p * dang / std::sin(lam);
  vp = -dp * ang;
}

SpectralScalar<double> random_coeffs(int lmax, unsigned seed, bool mean_free = false) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  SpectralScalar<double> a(lmax);
  for (int k = mean_free ? 1 : 0; k < a.coef.size(); ++k) a.coef[k] = dist(gen);
  return a;
}

}  // namespace

TEST_CASE("laplace-beltrami eigenvalues against finite differences") {
  const double h = 5e-4;
  for (int l : {1, 2, 7, 13, 20}) {
    for (int m : {0, -1, l / 2, -l, l}) {
      if (std::abs(m) > l) continue;
      for (double lam : {0.8, 1.9}) {
        const double phi = 1.1;
        const double y = eval_y(l, m, lam, phi);
        const double want = -l * (l + 1.0) * y;
        const double got = fd_laplace_beltrami(l, m, lam, phi, h);
        const double rel = std::abs(got - want) / (l * (l + 1.0) * std::max(1.0, std::abs(y)));
        CHECK(rel < 1e-8);
      }
    }
  }
}

TEST_CASE("spectral laplace-beltrami") {
  const int lmax = 20;
  SphereGrid<double> g = SphereGrid<double>::make(lmax);
  SphereTransform<double> T(g);

  SUBCASE("constant maps to zero") {
    ScalarFieldS2<double> f = ScalarFieldS2<double>::Constant(g.nlat, g.nlon, 3.5);
    // analyze round-off is amplified by l(l+1) <= 420 here
    CHECK(laplace_beltrami(T, f).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("eigenfunction for every degree up to lmax") {
    for (int l = 1; l <= lmax; ++l) {
      SpectralScalar<double> a(lmax);
      a(l, std::min(l, 3)) = 1.0;
      const ScalarFieldS2<double> y = T.synthesize(a);
      const ScalarFieldS2<double> lap = laplace_beltrami(T, y);
      const double rel = (lap + l * (l + 1.0) * y).cwiseAbs().maxCoeff() /
                         (l * (l + 1.0) * y.cwiseAbs().maxCoeff());
      CHECK(rel < 1e-8);
    }
  }
}

TEST_CASE("leray projection") {
  const int lmax = 9;
  SphereGrid<double> g = SphereGrid<double>::make(lmax);
  SphereTransform<double> T(g);
  SpectralScalar<double> psi = random_coeffs(lmax, 3, true);
  SpectralScalar<double> chi = random_coeffs(lmax, 4, true);

  SUBCASE("gradients project to zero") {
    const DivFreeSpectral<double> u = leray_project(T, T.synth_grad(chi));
    CHECK(u.psi.cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("divergence-free fields are fixed points") {
    const DivFreeSpectral<double> u = leray_project(T, T.synth_curl(psi));
    CHECK((u.as_stream().coef - psi.coef).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("mixed fields keep only the stream part") {
    const TangentFieldS2<double> v = T.synth_grad(chi) + T.synth_curl(psi);
    const DivFreeSpectral<double> u = leray_project(T, v);
    CHECK((u.as_stream().coef - psi.coef).cwiseAbs().maxCoeff() < 1e-9);
    // the rejected part is a gradient: orthogonal to every curl field
    const TangentFieldS2<double> rest = v - T.synth_curl(u.as_stream());
    const TangentFieldS2<double> w = T.synth_curl(random_coeffs(lmax, 5, true));
    CHECK(std::abs(inner_s2(g, rest, w)) <= 1e-10 * norm_s2(g, rest) * norm_s2(g, w));
  }

  SUBCASE("synthesized divergence-free invariant") {
    const TangentFieldS2<double> u = T.synth_curl(psi);
    const ScalarFieldS2<double> div = T.synthesize(T.analyze_div(u));
    CHECK(div.cwiseAbs().maxCoeff() <= 1e-10 * norm_s2(g, u));
  }
}

TEST_CASE("laplace-de rham") {
  const int lmax = 6;
  // margin grid: component scalars of degree-l vector fields live at l±1
  SphereGrid<double> g = SphereGrid<double>::make(2 * lmax);
  SphereTransform<double> T(g);

  SUBCASE("eigenfields in both Hodge sectors") {
    for (int l : {1, 3, 6}) {
      SpectralScalar<double> a(2 * lmax);
      a(l, -std::min(l, 2)) = 1.0;
      for (const bool curl_sector : {true, false}) {
        const TangentFieldS2<double> v = curl_sector ? T.synth_curl(a) : T.synth_grad(a);
        const TangentFieldS2<double> lap = laplace_de_rham(T, v);
        const double scale = l * (l + 1.0) * norm_s2(g, v);
        CHECK(norm_s2(g, lap + l * (l + 1.0) * v) <= 1e-9 * scale);
      }
    }
  }

  SUBCASE("term-by-term coordinate oracle at grid nodes") {
    // the vector components are not band-limited scalars, so each term is
    // evaluated pointwise from closed forms (finite differences where needed)
    const double h = 5e-4;
    for (auto [l, m] : {std::pair{3, 2}, std::pair{5, -3}, std::pair{6, 1}}) {
      SpectralScalar<double> a(2 * lmax);
      a(l, m) = 1.0;
      const TangentFieldS2<double> got = laplace_de_rham(T, T.synth_curl(a));
      auto comp_l = [&, l = l, m = m](double la, double ph) {
        double vl, vp;
        eval_curl_y(l, m, la, ph, vl, vp);
        return vl;
      };
      auto comp_p = [&, l = l, m = m](double la, double ph) {
        double vl, vp;
        eval_curl_y(l, m, la, ph, vl, vp);
        return vp;
      };
      double worst = 0.0;
      for (int i = 0; i < g.nlat; ++i) {
        const double lam = g.colat[i];
        const double s = g.sin_colat[i];
        if (s < 0.4) continue;
        const double c = g.x[i];
        for (int j = 0; j < g.nlon; j += 3) {
          const double phi = g.lon[j];
          double vl, vp;
          eval_curl_y(l, m, lam, phi, vl, vp);
          auto fd_dphi = [&](auto&& comp) {
            const double hp = 5e-5;
            return (comp(lam, phi - 2 * hp) - 8 * comp(lam, phi - hp) + 8 * comp(lam, phi + hp) -
                    comp(lam, phi + 2 * hp)) /
                   (12 * hp);
          };
          const double dphi_vp = fd_dphi(comp_p);
          const double dphi_vl = fd_dphi(comp_l);
          const double want_l = fd_scalar_laplacian(comp_l, lam, phi, h) -
                                (2 * c / (s * s)) * dphi_vp - vl / (s * s);
          const double want_p = fd_scalar_laplacian(comp_p, lam, phi, h) +
                                (2 * c / (s * s)) * dphi_vl - vp / (s * s);
          const double scale = l * (l + 1.0) * std::max({1.0, std::abs(vl), std::abs(vp)});
          worst = std::max(worst, std::abs(got.ulam(i, j) - want_l) / scale);
          worst = std::max(worst, std::abs(got.uphi(i, j) - want_p) / scale);
        }
      }
      CHECK(worst < 1e-6);
    }
  }
}

TEST_CASE("norms and inner products") {
  const int lmax = 8;
  SphereGrid<double> g = SphereGrid<double>::make(lmax);
  SphereTransform<double> T(g);

  SUBCASE("V seminorm ratio on the lowest mode") {
    DivFreeSpectral<double> u(lmax);
    u(1, 0) = 1.0;
    const double l2 = norm(u, SphereNorm::L2_S2);
    const double v = norm(u, SphereNorm::V_SEMINORM);
    CHECK(v / l2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    // quadrature oracle for the same ratio
    const TangentFieldS2<double> field = T.synth_curl(u.as_stream());
    const ScalarFieldS2<double> vort = T.synthesize(T.analyze_curl(field));
    CHECK(norm_s2(g, vort) / norm_s2(g, field) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
  }

  SUBCASE("DA_INV is dominated by half the L2 norm") {
    std::mt19937 gen(7);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 20; ++trial) {
      DivFreeSpectral<double> u(lmax);
      for (int i = 0; i < u.psi.size(); ++i) u.psi[i] = dist(gen);
      CHECK(norm(u, SphereNorm::DA_INV) <= 0.5 * norm(u, SphereNorm::L2_S2) * (1 + 1e-12));
    }
  }

  SUBCASE("zero field has zero norms") {
    DivFreeSpectral<double> u(lmax);
    CHECK(norm(u, SphereNorm::L2_S2) == 0.0);
    CHECK(norm(u, SphereNorm::V_SEMINORM) == 0.0);
    CHECK(norm(u, SphereNorm::DA_INV) == 0.0);
  }

  SUBCASE("DA_INV rejects fields with a mean component") {
    SpectralScalar<double> s(lmax);
    s(0, 0) = 1.0;
    s(2, 1) = 0.5;
    CHECK_THROWS_AS((void)norm(s, SphereNorm::DA_INV), usage_error);
  }

  SUBCASE("parseval") {
    const SpectralScalar<double> a = random_coeffs(lmax, 9);
    const ScalarFieldS2<double> f = T.synthesize(a);
    CHECK(norm_s2(g, f) == doctest::Approx(a.coef.norm()).epsilon(1e-11));
  }

  SUBCASE("A-characterization: (curl'u, curl'v) = (u, Av)") {
    std::mt19937 gen(13);
    std::normal_distribution<double> dist;
    DivFreeSpectral<double> u(lmax), v(lmax);
    for (int i = 0; i < u.psi.size(); ++i) {
      u.psi[i] = dist(gen);
      v.psi[i] = dist(gen);
    }
    const ScalarFieldS2<double> cu = T.synthesize(T.analyze_curl(T.synth_curl(u.as_stream())));
    const ScalarFieldS2<double> cv = T.synthesize(T.analyze_curl(T.synth_curl(v.as_stream())));
    const double lhs = inner_s2(g, cu, cv);
    const double rhs = inner_s2(g, T.synth_curl(u.as_stream()), T.synth_curl(stokes_apply(v).as_stream()));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("operator dispatch and error paths") {
  const int lmax = 5;
  SphereGrid<double> g = SphereGrid<double>::make(lmax);
  SphereTransform<double> T(g);
  const SpectralScalar<double> psi = random_coeffs(lmax, 21, true);
  const ScalarFieldS2<double> f = T.synthesize(psi);
  const TangentFieldS2<double> v = T.synth_curl(psi);

  SUBCASE("scalar kinds demand scalars") {
    CHECK_THROWS_AS((void)apply_operator(T, S2Op::GRAD_PRIME, S2Field<double>(v)), usage_error);
    CHECK_THROWS_AS((void)apply_operator(T, S2Op::DIV_PRIME, S2Field<double>(f)), usage_error);
  }

  SUBCASE("div' of curl' through the enum") {
    const auto curl = apply_operator(T, S2Op::CURL_PRIME_STREAM_TO_VEC, S2Field<double>(f));
    const auto div = apply_operator(T, S2Op::DIV_PRIME, curl);
    CHECK(std::get<ScalarFieldS2<double>>(div).cwiseAbs().maxCoeff() <= 1e-10 * norm_s2(g, v));
  }

  SUBCASE("curl' of grad' vanishes") {
    const auto grad = apply_operator(T, S2Op::GRAD_PRIME, S2Field<double>(f));
    const auto curl = apply_operator(T, S2Op::CURL_PRIME_VEC_TO_SCALAR, grad);
    CHECK(std::get<ScalarFieldS2<double>>(curl).cwiseAbs().maxCoeff() <= 1e-10 * norm_s2(g, f));
  }

  SUBCASE("adjointness of the two curls") {
    const SpectralScalar<double> q = random_coeffs(lmax, 22);
    const TangentFieldS2<double> w =
        T.synth_curl(psi) + T.synth_grad(random_coeffs(lmax, 23, true));
    const double lhs = inner_s2(g, T.synth_curl(q), w);
    const double rhs = inner_s2(g, T.synthesize(q), T.synthesize(T.analyze_curl(w)));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}
