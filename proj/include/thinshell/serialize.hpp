#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <json.hpp>

#include "thinshell/shell_fields.hpp"
#include "thinshell/shell_geometry.hpp"
#include "thinshell/sphere_fields.hpp"
#include "thinshell/sphere_grid.hpp"

// Binary field container. Layout:
//   bytes 0..3   magic "TSF1"
//   bytes 4..11  little-endian uint64: header length in bytes
//   header       UTF-8 JSON {kind, lmax, nlat, nlon} (+ {eps, nr} for shell kinds)
//   payload      IEEE-754 binary64, little-endian, row-major lambda-then-phi,
//                radial axis slowest for shell kinds, components (ur, ulam,
//                uphi) resp. (ulam, uphi) as consecutive blocks
// eps is never baked into the payload; the geometry travels in the header and
// the reader reconstructs grid/shell geometry from it.

namespace thinshell {

namespace detail {

static_assert(std::numeric_limits<double>::is_iec559, "binary64 payload requires IEEE doubles");

inline void put_bytes_le(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

inline std::uint64_t get_bytes_le(std::istream& is) {
  char buf[8];
  is.read(buf, 8);
  if (!is) throw usage_error("field container: truncated length word");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

inline void put_f64_le(std::ostream& os, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t sw = 0;
    for (int i = 0; i < 8; ++i) sw |= ((bits >> (8 * i)) & 0xff) << (8 * (7 - i));
    bits = sw;
  }
  put_bytes_le(os, bits);
}

inline double get_f64_le(std::istream& is) {
  std::uint64_t bits = get_bytes_le(is);
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t sw = 0;
    for (int i = 0; i < 8; ++i) sw |= ((bits >> (8 * i)) & 0xff) << (8 * (7 - i));
    bits = sw;
  }
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

template <class S>
void put_matrix(std::ostream& os, const MatX<S>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64_le(os, static_cast<double>(m(i, j)));
}

template <class S>
void get_matrix(std::istream& is, MatX<S>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = static_cast<S>(get_f64_le(is));
      if (!is) throw usage_error("field container: truncated payload");
    }
}

template <class S>
void put_vector(std::ostream& os, const VecX<S>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64_le(os, static_cast<double>(v[i]));
}

template <class S>
void get_vector(std::istream& is, VecX<S>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = static_cast<S>(get_f64_le(is));
    if (!is) throw usage_error("field container: truncated payload");
  }
}

}  // namespace detail

struct FieldHeader {
  std::string kind;
  int lmax = 0;
  int nlat = 0;
  int nlon = 0;
  int nr = 0;        // shell kinds only
  double eps = 0.0;  // shell kinds only

  bool is_shell() const { return nr > 0; }
};

inline void write_header(std::ostream& os, const FieldHeader& h) {
  nlohmann::ordered_json j;
  j["kind"] = h.kind;
  j["lmax"] = h.lmax;
  j["nlat"] = h.nlat;
  j["nlon"] = h.nlon;
  if (h.is_shell()) {
    j["eps"] = h.eps;
    j["nr"] = h.nr;
  }
  const std::string text = j.dump();
  os.write("TSF1", 4);
  detail::put_bytes_le(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline FieldHeader read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string_view(magic, 4) != "TSF1")
    throw usage_error("field container: bad magic");
  const std::uint64_t len = detail::get_bytes_le(is);
  if (len > (1ull << 20)) throw usage_error("field container: implausible header length");
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw usage_error("field container: truncated header");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw usage_error("field container: malformed header JSON");
  }
  FieldHeader h;
  h.kind = j.value("kind", "");
  h.lmax = j.value("lmax", 0);
  h.nlat = j.value("nlat", 0);
  h.nlon = j.value("nlon", 0);
  h.nr = j.value("nr", 0);
  h.eps = j.value("eps", 0.0);
  if (h.kind.empty() || h.lmax < 0) throw usage_error("field container: incomplete header");
  return h;
}

namespace detail {

template <class S>
FieldHeader grid_header(const SphereGrid<S>& g, std::string kind) {
  FieldHeader h;
  h.kind = std::move(kind);
  h.lmax = g.lmax;
  h.nlat = g.nlat;
  h.nlon = g.nlon;
  return h;
}

inline void expect_kind(const FieldHeader& h, std::string_view kind) {
  if (h.kind != kind)
    throw usage_error("field container: expected kind '" + std::string(kind) + "', found '" +
                      h.kind + "'");
}

inline SphereGrid<double> header_grid(const FieldHeader& h) {
  return SphereGrid<double>::make(h.lmax, h.nlat, h.nlon);
}

}  // namespace detail

// ---- sphere fields -------------------------------------------------------------

template <class S>
void write_field(std::ostream& os, const SphereGrid<S>& g, const ScalarFieldS2<S>& f) {
  if (f.rows() != g.nlat || f.cols() != g.nlon)
    throw usage_error("write_field: scalar field does not match the grid");
  write_header(os, detail::grid_header(g, "scalar_s2"));
  detail::put_matrix(os, f);
}

template <class S>
void write_field(std::ostream& os, const SphereGrid<S>& g, const TangentFieldS2<S>& v) {
  if (v.ulam.rows() != g.nlat || v.ulam.cols() != g.nlon || v.uphi.rows() != g.nlat ||
      v.uphi.cols() != g.nlon)
    throw usage_error("write_field: tangent field does not match the grid");
  write_header(os, detail::grid_header(g, "tangent_s2"));
  detail::put_matrix(os, v.ulam);
  detail::put_matrix(os, v.uphi);
}

template <class S>
void write_field(std::ostream& os, const SpectralScalar<S>& a) {
  FieldHeader h;
  h.kind = "spectral_s2";
  h.lmax = a.lmax;
  write_header(os, h);
  detail::put_vector(os, a.coef);
}

template <class S>
void write_field(std::ostream& os, const DivFreeSpectral<S>& u) {
  FieldHeader h;
  h.kind = "stream_s2";
  h.lmax = u.lmax;
  write_header(os, h);
  detail::put_vector(os, u.psi);
}

struct ReadScalarS2 {
  SphereGrid<double> grid;
  ScalarFieldS2<double> field;
};

inline ReadScalarS2 read_scalar_s2(std::istream& is) {
  const FieldHeader h = read_header(is);
  detail::expect_kind(h, "scalar_s2");
  ReadScalarS2 out{detail::header_grid(h), {}};
  out.field.resize(h.nlat, h.nlon);
  detail::get_matrix(is, out.field);
  return out;
}

struct ReadTangentS2 {
  SphereGrid<double> grid;
  TangentFieldS2<double> field;
};

inline ReadTangentS2 read_tangent_s2(std::istream& is) {
  const FieldHeader h = read_header(is);
  detail::expect_kind(h, "tangent_s2");
  ReadTangentS2 out{detail::header_grid(h), TangentFieldS2<double>(h.nlat, h.nlon)};
  detail::get_matrix(is, out.field.ulam);
  detail::get_matrix(is, out.field.uphi);
  return out;
}

inline SpectralScalar<double> read_spectral_s2(std::istream& is) {
  const FieldHeader h = read_header(is);
  detail::expect_kind(h, "spectral_s2");
  SpectralScalar<double> a(h.lmax);
  detail::get_vector(is, a.coef);
  return a;
}

inline DivFreeSpectral<double> read_stream_s2(std::istream& is) {
  const FieldHeader h = read_header(is);
  detail::expect_kind(h, "stream_s2");
  DivFreeSpectral<double> u(h.lmax);
  detail::get_vector(is, u.psi);
  return u;
}

// ---- shell fields --------------------------------------------------------------

namespace detail {

template <class S>
FieldHeader shell_header(const ShellGeometry<S>& geom, std::string kind) {
  FieldHeader h = grid_header(geom.grid, std::move(kind));
  h.nr = geom.nr;
  h.eps = static_cast<double>(geom.eps);
  return h;
}

}  // namespace detail

template <class S>
void write_field(std::ostream& os, const ShellGeometry<S>& geom, const ShellScalar<S>& f) {
  if (f.vals.rows() != geom.nr || f.vals.cols() != geom.nang())
    throw usage_error("write_field: shell scalar does not match the geometry");
  write_header(os, detail::shell_header(geom, "shell_scalar"));
  detail::put_matrix(os, f.vals);
}

template <class S>
void write_field(std::ostream& os, const ShellGeometry<S>& geom, const ShellVector<S>& u) {
  if (u.ur.rows() != geom.nr || u.ur.cols() != geom.nang())
    throw usage_error("write_field: shell vector does not match the geometry");
  write_header(os, detail::shell_header(geom, "shell_vector"));
  detail::put_matrix(os, u.ur);
  detail::put_matrix(os, u.ulam);
  detail::put_matrix(os, u.uphi);
}

struct ReadShellScalar {
  ShellGeometry<double> geom;
  ShellScalar<double> field;
};

inline ReadShellScalar read_shell_scalar(std::istream& is) {
  const FieldHeader h = read_header(is);
  detail::expect_kind(h, "shell_scalar");
  ShellGeometry<double> geom = ShellGeometry<double>::make(h.eps, h.nr, detail::header_grid(h));
  ShellScalar<double> f(geom.nr, geom.nang());
  detail::get_matrix(is, f.vals);
  return {std::move(geom), std::move(f)};
}

struct ReadShellVector {
  ShellGeometry<double> geom;
  ShellVector<double> field;
};

inline ReadShellVector read_shell_vector(std::istream& is) {
  const FieldHeader h = read_header(is);
  detail::expect_kind(h, "shell_vector");
  ShellGeometry<double> geom = ShellGeometry<double>::make(h.eps, h.nr, detail::header_grid(h));
  ShellVector<double> u(geom.nr, geom.nang());
  detail::get_matrix(is, u.ur);
  detail::get_matrix(is, u.ulam);
  detail::get_matrix(is, u.uphi);
  return {std::move(geom), std::move(u)};
}

// ---- file convenience wrappers ---------------------------------------------------

template <class... Args>
void write_field_file(const std::string& path, const Args&... args) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw usage_error("write_field_file: cannot open '" + path + "'");
  write_field(os, args...);
  if (!os) throw usage_error("write_field_file: write failed for '" + path + "'");
}

template <class Reader>
auto read_field_file(const std::string& path, Reader reader) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw usage_error("read_field_file: cannot open '" + path + "'");
  return reader(is);
}

}  // namespace thinshell
