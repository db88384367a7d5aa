#pragma once

// Uniform periodic grid on [0,lx) x [0,ly) and real scalar fields on it.
// Storage is row-major with y outer, x inner: index(ix,iy) = iy*nx + ix.
// Quadrature is the uniform (trapezoidal, hence spectral) rule with the
// single weight beta = (lx*ly)/(nx*ny) at every node.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "kskit/common.hpp"

namespace kskit {

struct Grid {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;

  /// Validating factory. Transform sizes must be even and positive so the
  /// Nyquist mode handling in the spectral operators is well defined.
  static Grid periodic(int nx, int ny, double lx, double ly) {
    if (nx <= 0 || ny <= 0 || nx % 2 != 0 || ny % 2 != 0)
      throw config_error("Grid: nx and ny must be positive and even");
    if (!(lx > 0.0) || !(ly > 0.0))
      throw config_error("Grid: lx and ly must be positive");
    return Grid{nx, ny, lx, ly};
  }

  std::size_t npoints() const { return static_cast<std::size_t>(nx) * ny; }
  double area() const { return lx * ly; }
  /// Quadrature weight shared by all nodes.
  double weight() const { return (lx / nx) * (ly / ny); }
  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  double x(int ix) const { return ix * dx(); }
  double y(int iy) const { return iy * dy(); }

  bool operator==(const Grid&) const = default;
};

class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g) : grid_(g), v_(g.npoints(), 0.0) {}

  static Field constant(const Grid& g, double value) {
    Field f(g);
    std::fill(f.v_.begin(), f.v_.end(), value);
    return f;
  }

  /// Sample fn(x,y) at the nodes.
  static Field from_function(const Grid& g,
                             const std::function<double(double, double)>& fn) {
    Field f(g);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        f.v_[static_cast<std::size_t>(iy) * g.nx + ix] = fn(g.x(ix), g.y(iy));
    return f;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  double at(int ix, int iy) const {
    return v_[static_cast<std::size_t>(iy) * grid_.nx + ix];
  }
  double& at(int ix, int iy) {
    return v_[static_cast<std::size_t>(iy) * grid_.nx + ix];
  }
  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }
  const std::vector<double>& values() const { return v_; }

  Field& operator+=(const Field& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Field& operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
  }
  Field& operator+=(double s) {
    for (double& x : v_) x += s;
    return *this;
  }
  /// this += a*o
  Field& axpy(double a, const Field& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += a * o.v_[i];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }

  void require_same_grid(const Field& o) const {
    if (!(grid_ == o.grid_))
      throw std::invalid_argument("Field: operands live on different grids");
  }

 private:
  Grid grid_;
  std::vector<double> v_;
};

/// Discrete L2 inner product [u,v] = sum beta * u(z) * v(z).
inline double inner(const Field& u, const Field& v) {
  u.require_same_grid(v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * u.grid().weight();
}

/// mass(u) = [u, 1].
inline double mass(const Field& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i];
  return s * u.grid().weight();
}

inline double linf(const Field& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i]));
  return m;
}

inline double min_value(const Field& u) {
  double m = u.size() ? u[0] : 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) m = std::min(m, u[i]);
  return m;
}

inline double max_value(const Field& u) {
  double m = u.size() ? u[0] : 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) m = std::max(m, u[i]);
  return m;
}

inline bool all_finite(const Field& u) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!std::isfinite(u[i])) return false;
  return true;
}

}  // namespace kskit
