#pragma once

// Direct-summation DFT derivatives for small grids: an O(N^4) cross-check
// for the FFT-based operators, sharing only the wavenumber conventions
// (derivative = i*k with Nyquist zeroed for odd orders, full -|k|^2 for the
// Laplacian). Use on grids of at most ~16x16.

#include <complex>
#include <vector>

#include "kskit/grid.hpp"

namespace naive {

using cplx = std::complex<double>;

struct Spectrum {
  int nx, ny;
  std::vector<cplx> a;  // a[jy*nx + jx], full square of modes
};

inline Spectrum forward(const kskit::Field& u) {
  const kskit::Grid& g = u.grid();
  Spectrum s{g.nx, g.ny, std::vector<cplx>(g.npoints())};
  for (int jy = 0; jy < g.ny; ++jy)
    for (int jx = 0; jx < g.nx; ++jx) {
      cplx acc = 0.0;
      for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
          const double phase = -2.0 * kskit::pi *
                               (double(jx * ix) / g.nx + double(jy * iy) / g.ny);
          acc += u.at(ix, iy) * cplx(std::cos(phase), std::sin(phase));
        }
      s.a[jy * g.nx + jx] = acc / double(g.npoints());
    }
  return s;
}

inline kskit::Field inverse(const kskit::Grid& g, const Spectrum& s) {
  kskit::Field out(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      cplx acc = 0.0;
      for (int jy = 0; jy < g.ny; ++jy)
        for (int jx = 0; jx < g.nx; ++jx) {
          const double phase = 2.0 * kskit::pi *
                               (double(jx * ix) / g.nx + double(jy * iy) / g.ny);
          acc += s.a[jy * g.nx + jx] * cplx(std::cos(phase), std::sin(phase));
        }
      out.at(ix, iy) = acc.real();
    }
  return out;
}

inline double kx_of(const kskit::Grid& g, int jx) {
  const int j = (jx <= g.nx / 2) ? jx : jx - g.nx;
  return 2.0 * kskit::pi / g.lx * j;
}

inline double ky_of(const kskit::Grid& g, int jy) {
  const int j = (jy <= g.ny / 2) ? jy : jy - g.ny;
  return 2.0 * kskit::pi / g.ly * j;
}

inline std::pair<kskit::Field, kskit::Field> gradient(const kskit::Field& u) {
  const kskit::Grid& g = u.grid();
  Spectrum s = forward(u);
  Spectrum sx{g.nx, g.ny, std::vector<cplx>(g.npoints())};
  Spectrum sy{g.nx, g.ny, std::vector<cplx>(g.npoints())};
  for (int jy = 0; jy < g.ny; ++jy)
    for (int jx = 0; jx < g.nx; ++jx) {
      const double kx = (jx == g.nx / 2) ? 0.0 : kx_of(g, jx);
      const double ky = (jy == g.ny / 2) ? 0.0 : ky_of(g, jy);
      const cplx v = s.a[jy * g.nx + jx];
      sx.a[jy * g.nx + jx] = cplx(0.0, kx) * v;
      sy.a[jy * g.nx + jx] = cplx(0.0, ky) * v;
    }
  return {inverse(g, sx), inverse(g, sy)};
}

inline kskit::Field laplacian(const kskit::Field& u) {
  const kskit::Grid& g = u.grid();
  Spectrum s = forward(u);
  for (int jy = 0; jy < g.ny; ++jy)
    for (int jx = 0; jx < g.nx; ++jx) {
      const double kx = kx_of(g, jx);
      const double ky = ky_of(g, jy);
      s.a[jy * g.nx + jx] *= -(kx * kx + ky * ky);
    }
  return inverse(g, s);
}

}  // namespace naive
