#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "kskit/spectral.hpp"
#include "support/naive_spectral.hpp"
#include "support/random_fields.hpp"

using namespace kskit;

namespace {
Grid square(int n) { return Grid::periodic(n, n, 2 * pi, 2 * pi); }

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
}  // namespace

TEST_CASE("laplacian of trigonometric monomials") {
  Grid g = square(32);
  SpectrumWorkspace ws(g);
  CHECK(linf(ws.laplacian(Field::constant(g, 3.0))) <= 1e-13);

  Field cosx = Field::from_function(g, [](double x, double) { return std::cos(x); });
  CHECK(max_diff(ws.laplacian(cosx), -1.0 * cosx) <= 1e-12);

  Field u = Field::from_function(
      g, [](double x, double y) { return std::cos(2 * x) * std::sin(3 * y); });
  CHECK(max_diff(ws.laplacian(u), -13.0 * u) <= 1e-11);
}

TEST_CASE("gradient of trigonometric monomials") {
  Grid g = square(32);
  SpectrumWorkspace ws(g);
  auto [zx, zy] = ws.gradient(Field::constant(g, 2.0));
  CHECK(linf(zx) <= 1e-13);
  CHECK(linf(zy) <= 1e-13);

  Field u = Field::from_function(
      g, [](double x, double y) { return std::sin(x) + std::cos(y); });
  auto [gx, gy] = ws.gradient(u);
  Field ex = Field::from_function(g, [](double x, double) { return std::cos(x); });
  Field ey = Field::from_function(g, [](double, double y) { return -std::sin(y); });
  CHECK(max_diff(gx, ex) <= 1e-12);
  CHECK(max_diff(gy, ey) <= 1e-12);
}

TEST_CASE("divergence and the div-grad = laplacian identity") {
  Grid g = square(32);
  SpectrumWorkspace ws(g);
  CHECK(linf(ws.divergence(Field(g), Field(g))) == 0.0);

  Field sinx = Field::from_function(g, [](double x, double) { return std::sin(x); });
  Field cosx = Field::from_function(g, [](double x, double) { return std::cos(x); });
  CHECK(max_diff(ws.divergence(sinx, Field(g)), cosx) <= 1e-12);

  // band-limited u: div(grad u) equals lap u
  std::mt19937 rng(5);
  Field u = testutil::band_limited_random(g, rng, 6);
  auto [gx, gy] = ws.gradient(u);
  CHECK(max_diff(ws.divergence(gx, gy), ws.laplacian(u)) <=
        1e-11 * (1.0 + linf(u)));
}

TEST_CASE("divergence output has zero mass for any input") {
  Grid g = square(16);
  SpectrumWorkspace ws(g);
  std::mt19937 rng(9);
  Field fx = testutil::nodal_random(g, rng);
  Field fy = testutil::nodal_random(g, rng);
  CHECK(std::abs(mass(ws.divergence(fx, fy))) <= 1e-12);
  CHECK(std::abs(mass(ws.laplacian(fx))) <= 1e-12);
}

TEST_CASE("helmholtz solve on known right-hand sides") {
  Grid g = square(32);
  SpectrumWorkspace ws(g);
  Field cosx = Field::from_function(g, [](double x, double) { return std::cos(x); });
  // (1 - lap) x = cos x  =>  x = cos(x)/2
  CHECK(max_diff(ws.helmholtz_solve(1.0, 1.0, cosx), 0.5 * cosx) <= 1e-13);
  // (2 - 3 lap) x = c0   =>  x = c0/2
  Field c0 = Field::constant(g, 7.0);
  CHECK(max_diff(ws.helmholtz_solve(2.0, 3.0, c0),
                 Field::constant(g, 3.5)) <= 1e-13);
  CHECK_THROWS_AS(ws.helmholtz_solve(0.0, 1.0, cosx), std::invalid_argument);
  CHECK_THROWS_AS(ws.helmholtz_solve(-1.0, 1.0, cosx), std::invalid_argument);
}

TEST_CASE("helmholtz residual and identity limit") {
  Grid g = square(32);
  SpectrumWorkspace ws(g);
  std::mt19937 rng(13);
  Field rhs = testutil::band_limited_random(g, rng, 10);
  Field x = ws.helmholtz_solve(2.0, 0.5, rhs);
  Field residual = 2.0 * x - 0.5 * ws.laplacian(x) - rhs;
  CHECK(linf(residual) <= 1e-11 * (1.0 + linf(rhs)));
  // b = 0 reduces to scaling
  Field y = ws.helmholtz_solve(4.0, 0.0, rhs);
  CHECK(max_diff(y, 0.25 * rhs) <= 1e-13 * (1.0 + linf(rhs)));
}

TEST_CASE("transform round-trip on unrestricted nodal data") {
  Grid g = square(16);
  SpectrumWorkspace ws(g);
  std::mt19937 rng(3);
  Field u = testutil::nodal_random(g, rng, -3.0, 3.0);
  // helmholtz with a=1, b=0 is forward followed by inverse
  CHECK(max_diff(ws.helmholtz_solve(1.0, 0.0, u), u) <= 1e-12);
}

TEST_CASE("spectral operators match direct DFT summation on a small grid") {
  Grid g = Grid::periodic(8, 8, 2 * pi, 2 * pi);
  SpectrumWorkspace ws(g);
  std::mt19937 rng(21);
  Field u = testutil::nodal_random(g, rng);
  auto [gx, gy] = ws.gradient(u);
  auto [nx_, ny_] = naive::gradient(u);
  CHECK(max_diff(gx, nx_) <= 1e-11);
  CHECK(max_diff(gy, ny_) <= 1e-11);
  CHECK(max_diff(ws.laplacian(u), naive::laplacian(u)) <= 1e-10);
}

TEST_CASE("laplacian is self-adjoint on band-limited fields") {
  Grid g = square(16);
  SpectrumWorkspace ws(g);
  std::mt19937 rng(17);
  Field u = testutil::band_limited_random(g, rng, 5);
  Field v = testutil::band_limited_random(g, rng, 5);
  const double a = inner(ws.laplacian(u), v);
  const double b = inner(u, ws.laplacian(v));
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("nodal helpers") {
  Grid g = square(16);
  std::mt19937 rng(23);
  Field u = testutil::nodal_random(g, rng);
  Field one = Field::constant(g, 1.0);
  Field p = nodal_product(u, one);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(p[i] == u[i]);

  Field cosx = Field::from_function(g, [](double x, double) { return std::cos(x); });
  // mean of cos^2 is 1/2
  CHECK(mass(nodal_product(cosx, cosx)) / g.area() ==
        doctest::Approx(0.5).epsilon(1e-13));

  Field lg = nodal_log_shift(Field(g), 1e-10);
  CHECK(lg[0] == doctest::Approx(std::log(1e-10)).epsilon(1e-15));

  Field bad = Field::constant(g, -1.0);
  bool threw = false;
  try {
    nodal_log_shift(bad, 0.5);
  } catch (const solver_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("workspace rejects fields from another grid") {
  SpectrumWorkspace ws(square(16));
  Field other(square(32));
  CHECK_THROWS_AS(ws.laplacian(other), std::invalid_argument);
}
