#include <doctest.h>

#include <random>
#include <sstream>

#include <thinshell/serialize.hpp>
#include <thinshell/sphere_transform.hpp>

using namespace thinshell;

namespace {

std::mt19937 fixed_gen() { return std::mt19937(42); }

MatX<double> randm(int rows, int cols, std::mt19937& gen) {
  std::normal_distribution<double> d;
  MatX<double> m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(gen);
  return m;
}

}  // namespace

TEST_CASE("sphere fields round-trip bit-exactly") {
  std::mt19937 gen = fixed_gen();
  const SphereGrid<double> g = SphereGrid<double>::make(7);

  SUBCASE("gridded scalar") {
    const ScalarFieldS2<double> f = randm(g.nlat, g.nlon, gen);
    std::stringstream ss;
    write_field(ss, g, f);
    const ReadScalarS2 back = read_scalar_s2(ss);
    CHECK(back.grid.lmax == g.lmax);
    CHECK(back.grid.nlat == g.nlat);
    CHECK(back.grid.nlon == g.nlon);
    CHECK(back.field == f);  // binary64 payload: exact equality expected
  }

  SUBCASE("tangent field") {
    const TangentFieldS2<double> v(randm(g.nlat, g.nlon, gen), randm(g.nlat, g.nlon, gen));
    std::stringstream ss;
    write_field(ss, g, v);
    const ReadTangentS2 back = read_tangent_s2(ss);
    CHECK(back.field.ulam == v.ulam);
    CHECK(back.field.uphi == v.uphi);
  }

  SUBCASE("spectral scalar and stream coefficients") {
    SpectralScalar<double> a(5);
    DivFreeSpectral<double> u(5);
    std::normal_distribution<double> d;
    for (int i = 0; i < a.coef.size(); ++i) a.coef[i] = d(gen);
    for (int i = 0; i < u.psi.size(); ++i) u.psi[i] = d(gen);
    std::stringstream sa, su;
    write_field(sa, a);
    write_field(su, u);
    const SpectralScalar<double> ba = read_spectral_s2(sa);
    const DivFreeSpectral<double> bu = read_stream_s2(su);
    CHECK(ba.lmax == 5);
    CHECK(ba.coef == a.coef);
    CHECK(bu.psi == u.psi);
  }
}

TEST_CASE("shell fields carry their geometry and round-trip bit-exactly") {
  std::mt19937 gen = fixed_gen();
  const SphereGrid<double> g = SphereGrid<double>::make(4);
  const ShellGeometry<double> geom = ShellGeometry<double>::make(0.15, 6, g);

  SUBCASE("shell scalar") {
    ShellScalar<double> f(geom.nr, geom.nang());
    f.vals = randm(geom.nr, geom.nang(), gen);
    std::stringstream ss;
    write_field(ss, geom, f);
    const ReadShellScalar back = read_shell_scalar(ss);
    CHECK(back.geom.eps == geom.eps);
    CHECK(back.geom.nr == geom.nr);
    CHECK(back.geom.grid.lmax == g.lmax);
    CHECK(back.field.vals == f.vals);
  }

  SUBCASE("shell vector") {
    ShellVector<double> u(randm(geom.nr, geom.nang(), gen), randm(geom.nr, geom.nang(), gen),
                          randm(geom.nr, geom.nang(), gen));
    std::stringstream ss;
    write_field(ss, geom, u);
    const ReadShellVector back = read_shell_vector(ss);
    CHECK(back.field.ur == u.ur);
    CHECK(back.field.ulam == u.ulam);
    CHECK(back.field.uphi == u.uphi);
    // reconstructed geometry supports the nodal calculus immediately
    CHECK(back.geom.r.size() == geom.nr);
    CHECK(back.geom.r.isApprox(geom.r));
  }
}

TEST_CASE("container writes are deterministic and layout is as documented") {
  std::mt19937 gen = fixed_gen();
  const SphereGrid<double> g = SphereGrid<double>::make(3);
  const ScalarFieldS2<double> f = randm(g.nlat, g.nlon, gen);

  std::stringstream s1, s2;
  write_field(s1, g, f);
  write_field(s2, g, f);
  CHECK(s1.str() == s2.str());

  const std::string bytes = s1.str();
  CHECK(bytes.substr(0, 4) == "TSF1");

  // header length word is little-endian and points at the JSON header
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i)
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[4 + i])) << (8 * i);
  const std::string header = bytes.substr(12, len);
  CHECK(header.find("\"kind\":\"scalar_s2\"") != std::string::npos);
  CHECK(header.find("\"lmax\":3") != std::string::npos);
  CHECK(bytes.size() == 12 + len + 8 * std::size_t(g.nlat) * std::size_t(g.nlon));

  // payload is row-major lambda-then-phi: the first double is f(0, 0), the
  // second f(0, 1)
  std::istringstream payload(bytes.substr(12 + len));
  CHECK(detail::get_f64_le(payload) == f(0, 0));
  CHECK(detail::get_f64_le(payload) == f(0, 1));
}

TEST_CASE("malformed containers are rejected") {
  const SphereGrid<double> g = SphereGrid<double>::make(3);
  std::mt19937 gen = fixed_gen();
  const ScalarFieldS2<double> f = randm(g.nlat, g.nlon, gen);
  std::stringstream ss;
  write_field(ss, g, f);
  const std::string bytes = ss.str();

  SUBCASE("bad magic") {
    std::istringstream bad("XXXX" + bytes.substr(4));
    CHECK_THROWS_AS((void)read_scalar_s2(bad), usage_error);
  }
  SUBCASE("kind mismatch") {
    std::istringstream is(bytes);
    CHECK_THROWS_AS((void)read_tangent_s2(is), usage_error);
  }
  SUBCASE("truncated payload") {
    std::istringstream is(bytes.substr(0, bytes.size() - 9));
    CHECK_THROWS_AS((void)read_scalar_s2(is), usage_error);
  }
  SUBCASE("shape mismatch on write") {
    const ScalarFieldS2<double> wrong = MatX<double>::Zero(2, 2);
    std::stringstream out;
    CHECK_THROWS_AS(write_field(out, g, wrong), usage_error);
  }
}

TEST_CASE("file wrappers round-trip through the filesystem") {
  std::mt19937 gen = fixed_gen();
  const SphereGrid<double> g = SphereGrid<double>::make(5);
  DivFreeSpectral<double> u(g.lmax);
  std::normal_distribution<double> d;
  for (int i = 0; i < u.psi.size(); ++i) u.psi[i] = d(gen);

  const std::string path = "serialize_roundtrip.tsf";
  write_field_file(path, u);
  const DivFreeSpectral<double> back =
      read_field_file(path, [](std::istream& is) { return read_stream_s2(is); });
  CHECK(back.psi == u.psi);
  std::remove(path.c_str());

  CHECK_THROWS_AS((void)read_field_file("does_not_exist.tsf",
                                        [](std::istream& is) { return read_stream_s2(is); }),
                  usage_error);
}
