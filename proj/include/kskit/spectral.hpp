#pragma once

// Fourier collocation operators on a periodic grid, backed by FFTW3 r2c/c2r
// transforms. Conventions:
//   * forward transform is unnormalized; the inverse is scaled by 1/(nx*ny),
//   * odd-order operators (gradient, divergence) zero the Nyquist columns so
//     the result is the derivative of a real trigonometric interpolant,
//   * the Laplacian keeps the full -|k|^2 symbol including Nyquist,
//   * plans use FFTW_ESTIMATE so planning is deterministic run to run, and
//     plan creation/destruction is serialized (the FFTW planner is not
//     thread safe; execution on distinct workspaces is).
//
// A workspace owns plans and scratch for one grid. Methods reuse the scratch,
// so a single workspace must not be shared by concurrent callers.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <string>

#include "kskit/common.hpp"
#include "kskit/grid.hpp"

namespace kskit {

class SpectrumWorkspace {
 public:
  explicit SpectrumWorkspace(const Grid& g)
      : grid_(g),
        n_(g.npoints()),
        ncx_(g.nx / 2 + 1),
        nc_(static_cast<std::size_t>(g.ny) * (g.nx / 2 + 1)) {
    rbuf_ = fftw_alloc_real(n_);
    cbuf_ = fftw_alloc_complex(nc_);
    cacc_ = fftw_alloc_complex(nc_);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_2d(g.ny, g.nx, rbuf_, cbuf_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(g.ny, g.nx, cbuf_, rbuf_, FFTW_ESTIMATE);
  }

  ~SpectrumWorkspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(rbuf_);
    fftw_free(cbuf_);
    fftw_free(cacc_);
  }

  SpectrumWorkspace(const SpectrumWorkspace&) = delete;
  SpectrumWorkspace& operator=(const SpectrumWorkspace&) = delete;

  const Grid& grid() const { return grid_; }

  Field laplacian(const Field& u) {
    check(u);
    forward(u);
    for (int jy = 0; jy < grid_.ny; ++jy) {
      const double ky = ky_of(jy);
      for (int jx = 0; jx < ncx_; ++jx) {
        const double kx = kx_of(jx);
        const double s = -(kx * kx + ky * ky);
        std::size_t j = idx(jx, jy);
        cbuf_[j][0] *= s;
        cbuf_[j][1] *= s;
      }
    }
    return inverse();
  }

  /// Returns (du/dx, du/dy). Nyquist columns are zeroed in each component.
  std::pair<Field, Field> gradient(const Field& u) {
    check(u);
    forward(u);
    for (std::size_t j = 0; j < nc_; ++j) {
      cacc_[j][0] = cbuf_[j][0];
      cacc_[j][1] = cbuf_[j][1];
    }
    // d/dx: multiply by i*kx, kx = 0 on the x-Nyquist column.
    for (int jy = 0; jy < grid_.ny; ++jy)
      for (int jx = 0; jx < ncx_; ++jx) {
        const double kx = (jx == grid_.nx / 2) ? 0.0 : kx_of(jx);
        std::size_t j = idx(jx, jy);
        const double re = cacc_[j][0], im = cacc_[j][1];
        cbuf_[j][0] = -kx * im;
        cbuf_[j][1] = kx * re;
      }
    Field gx = inverse();
    // d/dy: multiply by i*ky, ky = 0 on the y-Nyquist row.
    for (int jy = 0; jy < grid_.ny; ++jy) {
      const double ky = (jy == grid_.ny / 2) ? 0.0 : ky_of(jy);
      for (int jx = 0; jx < ncx_; ++jx) {
        std::size_t j = idx(jx, jy);
        const double re = cacc_[j][0], im = cacc_[j][1];
        cbuf_[j][0] = -ky * im;
        cbuf_[j][1] = ky * re;
      }
    }
    Field gy = inverse();
    return {std::move(gx), std::move(gy)};
  }

  /// div(fx, fy) with the same Nyquist convention as gradient(); the k=0
  /// mode of the result is exactly zero, so its mass vanishes.
  Field divergence(const Field& fx, const Field& fy) {
    check(fx);
    check(fy);
    forward(fx);
    for (int jy = 0; jy < grid_.ny; ++jy)
      for (int jx = 0; jx < ncx_; ++jx) {
        const double kx = (jx == grid_.nx / 2) ? 0.0 : kx_of(jx);
        std::size_t j = idx(jx, jy);
        const double re = cbuf_[j][0], im = cbuf_[j][1];
        cacc_[j][0] = -kx * im;
        cacc_[j][1] = kx * re;
      }
    forward(fy);
    for (int jy = 0; jy < grid_.ny; ++jy) {
      const double ky = (jy == grid_.ny / 2) ? 0.0 : ky_of(jy);
      for (int jx = 0; jx < ncx_; ++jx) {
        std::size_t j = idx(jx, jy);
        const double re = cbuf_[j][0], im = cbuf_[j][1];
        cacc_[j][0] += -ky * im;
        cacc_[j][1] += ky * re;
      }
    }
    for (std::size_t j = 0; j < nc_; ++j) {
      cbuf_[j][0] = cacc_[j][0];
      cbuf_[j][1] = cacc_[j][1];
    }
    return inverse();
  }

  /// Solves (a - b*Laplacian) x = rhs diagonally in Fourier space.
  /// Requires a > 0 (the k=0 symbol) and b >= 0.
  Field helmholtz_solve(double a, double b, const Field& rhs) {
    if (!(a > 0.0))
      throw std::invalid_argument("helmholtz_solve: requires a > 0");
    if (b < 0.0)
      throw std::invalid_argument("helmholtz_solve: requires b >= 0");
    check(rhs);
    ++helmholtz_calls_;
    forward(rhs);
    for (int jy = 0; jy < grid_.ny; ++jy) {
      const double ky = ky_of(jy);
      for (int jx = 0; jx < ncx_; ++jx) {
        const double kx = kx_of(jx);
        const double s = 1.0 / (a + b * (kx * kx + ky * ky));
        std::size_t j = idx(jx, jy);
        cbuf_[j][0] *= s;
        cbuf_[j][1] *= s;
      }
    }
    return inverse();
  }

  /// Number of helmholtz_solve calls since the last reset (operation-count
  /// accounting for the step-cost tests).
  long helmholtz_calls() const { return helmholtz_calls_; }
  void reset_counters() { helmholtz_calls_ = 0; }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  void check(const Field& u) const {
    if (!(u.grid() == grid_))
      throw std::invalid_argument("SpectrumWorkspace: field grid mismatch");
  }

  double kx_of(int jx) const { return 2.0 * pi / grid_.lx * jx; }
  double ky_of(int jy) const {
    const int j = (jy <= grid_.ny / 2) ? jy : jy - grid_.ny;
    return 2.0 * pi / grid_.ly * j;
  }
  std::size_t idx(int jx, int jy) const {
    return static_cast<std::size_t>(jy) * ncx_ + jx;
  }

  void forward(const Field& u) {
    for (std::size_t i = 0; i < n_; ++i) rbuf_[i] = u[i];
    fftw_execute(fwd_);
  }

  Field inverse() {
    fftw_execute(inv_);
    Field out(grid_);
    const double s = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = rbuf_[i] * s;
    return out;
  }

  Grid grid_;
  std::size_t n_;
  int ncx_;
  std::size_t nc_;
  double* rbuf_ = nullptr;
  fftw_complex* cbuf_ = nullptr;
  fftw_complex* cacc_ = nullptr;
  fftw_plan fwd_{};
  fftw_plan inv_{};
  long helmholtz_calls_ = 0;
};

/// Pointwise product u*v.
inline Field nodal_product(const Field& u, const Field& v) {
  u.require_same_grid(v);
  Field out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * v[i];
  return out;
}

/// Pointwise log(u + sigma). Requires u + sigma > 0 at every node; the
/// offending node index is reported otherwise.
inline Field nodal_log_shift(const Field& u, double sigma) {
  Field out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i] + sigma;
    if (!(a > 0.0))
      throw solver_error("nodal_log_shift: non-positive argument " +
                         std::to_string(a) + " at node " + std::to_string(i));
    out[i] = std::log(a);
  }
  return out;
}

}  // namespace kskit
