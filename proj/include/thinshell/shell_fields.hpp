#pragma once

#include "thinshell/core.hpp"
#include "thinshell/shell_geometry.hpp"
#include "thinshell/sphere_fields.hpp"
#include "thinshell/sphere_grid.hpp"

namespace thinshell {

// Nodal fields on the shell: row k is the sphere level r = r_k, flattened
// angularly as column i*nlon + j (colatitude index i outermost). The radial
// index varies slowest, matching the on-disk layout.

template <class S>
ScalarFieldS2<S> unflatten(const SphereGrid<S>& g, const Eigen::Ref<const Eigen::RowVectorX<S>>& row) {
  return Eigen::Map<const MatX<S>>(row.data(), g.nlon, g.nlat).transpose();
}

template <class S>
Eigen::RowVectorX<S> flatten(const ScalarFieldS2<S>& f) {
  MatX<S> t = f.transpose();
  return Eigen::Map<const Eigen::RowVectorX<S>>(t.data(), t.size());
}

template <class S>
struct ShellScalar {
  MatX<S> vals;  // nr × (nlat*nlon)

  ShellScalar() = default;
  ShellScalar(int nr, int nang) : vals(MatX<S>::Zero(nr, nang)) {}
  explicit ShellScalar(MatX<S> v) : vals(std::move(v)) {}

  ScalarFieldS2<S> level(const SphereGrid<S>& g, int k) const { return unflatten<S>(g, vals.row(k)); }
  void set_level(int k, const ScalarFieldS2<S>& f) { vals.row(k) = flatten(f); }
};

template <class S>
struct ShellVector {
  MatX<S> ur, ulam, uphi;  // each nr × (nlat*nlon)

  ShellVector() = default;
  ShellVector(int nr, int nang)
      : ur(MatX<S>::Zero(nr, nang)), ulam(MatX<S>::Zero(nr, nang)), uphi(MatX<S>::Zero(nr, nang)) {}

  TangentFieldS2<S> tangent_level(const SphereGrid<S>& g, int k) const {
    return TangentFieldS2<S>{unflatten<S>(g, ulam.row(k)), unflatten<S>(g, uphi.row(k))};
  }
  void set_tangent_level(int k, const TangentFieldS2<S>& v) {
    ulam.row(k) = flatten(v.ulam);
    uphi.row(k) = flatten(v.uphi);
  }

  ShellVector operator+(const ShellVector& o) const { return {ur + o.ur, ulam + o.ulam, uphi + o.uphi}; }
  ShellVector operator-(const ShellVector& o) const { return {ur - o.ur, ulam - o.ulam, uphi - o.uphi}; }
  ShellVector(MatX<S> r_, MatX<S> l_, MatX<S> p_)
      : ur(std::move(r_)), ulam(std::move(l_)), uphi(std::move(p_)) {}
};

template <class S>
ShellVector<S> operator*(S a, const ShellVector<S>& u) {
  return {a * u.ur, a * u.ulam, a * u.uphi};
}

}  // namespace thinshell
