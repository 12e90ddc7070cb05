#include "doctest.h"

#include "thinshell/sphere_ops.hpp"
#include "thinshell/sphere_transform.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace thinshell;

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

SpectralScalar<double> random_coeffs(int lmax, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  SpectralScalar<double> a(lmax);
  for (int k = 0; k < a.coef.size(); ++k) a.coef[k] = dist(gen);
  return a;
}

}  // namespace

TEST_CASE("analysis-synthesis round trip is exact for band-limited fields") {
  for (int lmax : {1, 4, 12}) {
    SphereGrid<double> g = SphereGrid<double>::make(lmax);
    SphereTransform<double> T(g);
    SpectralScalar<double> a = random_coeffs(lmax, 42 + lmax);
    ScalarFieldS2<double> f = T.synthesize(a);
    SpectralScalar<double> b = T.analyze(f);
    CHECK((b.coef - a.coef).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("known transforms") {
  const int lmax = 8;
  SphereGrid<double> g = SphereGrid<double>::make(lmax);
  SphereTransform<double> T(g);

  SUBCASE("constant field") {
    ScalarFieldS2<double> f = ScalarFieldS2<double>::Constant(g.nlat, g.nlon, 1.0);
    SpectralScalar<double> a = T.analyze(f);
    CHECK(a(0, 0) == doctest::Approx(std::sqrt(4 * kPi)).epsilon(1e-14));
    a(0, 0) = 0;
    CHECK(a.coef.cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("cos(colatitude)") {
    ScalarFieldS2<double> f(g.nlat, g.nlon);
    for (int i = 0; i < g.nlat; ++i) f.row(i).setConstant(g.x[i]);
    SpectralScalar<double> a = T.analyze(f);
    CHECK(a(1, 0) == doctest::Approx(std::sqrt(4 * kPi / 3)).epsilon(1e-14));
    a(1, 0) = 0;
    CHECK(a.coef.cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("sectoral mode with longitude phase") {
    // f = sin^2(colat) * sin(2 phi) = sqrt(16 pi / 15) * Y_{2,-2}
    ScalarFieldS2<double> f(g.nlat, g.nlon);
    for (int i = 0; i < g.nlat; ++i)
      for (int j = 0; j < g.nlon; ++j)
        f(i, j) = (1 - g.x[i] * g.x[i]) * std::sin(2 * g.lon[j]);
    SpectralScalar<double> a = T.analyze(f);
    CHECK(a(2, -2) == doctest::Approx(std::sqrt(16 * kPi / 15)).epsilon(1e-13));
    a(2, -2) = 0;
    CHECK(a.coef.cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("quadrature parseval") {
    SpectralScalar<double> a = random_coeffs(lmax, 7);
    ScalarFieldS2<double> f = T.synthesize(a);
    CHECK(inner_s2(g, f, f) == doctest::Approx(a.coef.squaredNorm()).epsilon(1e-13));
  }
}

TEST_CASE("tangential derivative synthesis") {
  const int lmax = 10;
  SphereGrid<double> g = SphereGrid<double>::make(lmax);
  SphereTransform<double> T(g);

  SUBCASE("gradient of zonal mode has only a colatitude component") {
    SpectralScalar<double> a(lmax);
    a(1, 0) = 1.0;
    TangentFieldS2<double> v = T.synth_grad(a);
    const double c = std::sqrt(3 / (4 * kPi));
    for (int i = 0; i < g.nlat; ++i) {
      CHECK(v.ulam(i, 0) == doctest::Approx(-c * g.sin_colat[i]).epsilon(1e-13));
    }
    CHECK(v.uphi.cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("curl of zonal stream is an azimuthal flow, pinned orientation") {
    // psi = Y_{1,0}: curl' psi = ((1/s) d_phi psi, -d_lambda psi) = (0, c sin(colat)).
    SpectralScalar<double> a(lmax);
    a(1, 0) = 1.0;
    TangentFieldS2<double> v = T.synth_curl(a);
    const double c = std::sqrt(3 / (4 * kPi));
    CHECK(v.ulam.cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < g.nlat; ++i) {
      CHECK(v.uphi(i, 0) == doctest::Approx(c * g.sin_colat[i]).epsilon(1e-13));
    }
  }

  SUBCASE("longitude derivative couples the two phases") {
    // psi = Y_{2,2}: (1/s) d_phi psi = -2 sqrt(2) P22 sin(2 phi) / s.
    SpectralScalar<double> a(lmax);
    a(2, 2) = 1.0;
    TangentFieldS2<double> v = T.synth_curl(a);
    const double c22 = std::sqrt(15 / (32 * kPi));
    for (int i = 0; i < g.nlat; ++i) {
      const double s = g.sin_colat[i];
      for (int j = 0; j < g.nlon; ++j) {
        const double want = -2 * std::sqrt(2.0) * c22 * s * std::sin(2 * g.lon[j]);
        CHECK(v.ulam(i, j) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("vector analysis operators") {
  const int lmax = 9;
  SphereGrid<double> g = SphereGrid<double>::make(lmax);
  SphereTransform<double> T(g);
  SpectralScalar<double> psi = random_coeffs(lmax, 11);
  psi(0, 0) = 0;
  SpectralScalar<double> chi = random_coeffs(lmax, 12);
  chi(0, 0) = 0;

  SUBCASE("div' grad' = laplacian, curl' of gradient vanishes") {
    TangentFieldS2<double> v = T.synth_grad(chi);
    SpectralScalar<double> d = T.analyze_div(v);
    SpectralScalar<double> c = T.analyze_curl(v);
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m)
        CHECK(d(l, m) == doctest::Approx(-l * (l + 1.0) * chi(l, m)).epsilon(1e-11));
    CHECK(c.coef.cwiseAbs().maxCoeff() < 1e-11);
  }

  SUBCASE("curl' curl' = -laplacian, divergence of curl vanishes") {
    TangentFieldS2<double> v = T.synth_curl(psi);
    SpectralScalar<double> c = T.analyze_curl(v);
    SpectralScalar<double> d = T.analyze_div(v);
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m)
        CHECK(c(l, m) == doctest::Approx(l * (l + 1.0) * psi(l, m)).epsilon(1e-11));
    CHECK(d.coef.cwiseAbs().maxCoeff() < 1e-11);
  }

  SUBCASE("adjointness of curl' under the quadrature inner product") {
    TangentFieldS2<double> v = T.synth_curl(psi) + T.synth_grad(chi);
    ScalarFieldS2<double> q = T.synthesize(random_coeffs(lmax, 13));
    const double lhs = inner_s2(g, T.synth_curl(T.analyze(q)), v);
    const double rhs = inner_s2(g, q, T.synthesize(T.analyze_curl(v)));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }

  SUBCASE("adjointness of grad' against -div'") {
    TangentFieldS2<double> v = T.synth_curl(psi) + T.synth_grad(chi);
    ScalarFieldS2<double> q = T.synthesize(random_coeffs(lmax, 14));
    const double lhs = inner_s2(g, T.synth_grad(T.analyze(q)), v);
    const double rhs = -inner_s2(g, q, T.synthesize(T.analyze_div(v)));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("shape and truncation guards") {
  SphereGrid<double> g = SphereGrid<double>::make(6);
  SphereTransform<double> T(g);
  ScalarFieldS2<double> bad(g.nlat + 1, g.nlon);
  bad.setZero();
  CHECK_THROWS_AS((void)T.analyze(bad), usage_error);
  SpectralScalar<double> a(7);
  CHECK_THROWS_AS((void)T.synthesize(a), usage_error);
  CHECK_THROWS_AS((void)SphereGrid<double>::make(6, 4, 13), config_error);
}
