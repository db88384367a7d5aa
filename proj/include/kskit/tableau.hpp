#pragma once

// BDF-k coefficients, k = 1..4, in the normalization
//   (alpha*u^{n+1} - A(u^n, u^{n-1}, ...)) / dt  ~  du/dt(t^{n+1}),
// with B the order-(k-1) extrapolation of the multiplier source and C the
// order-k extrapolation of the transport coefficients. A has k entries
// (most recent level first), B has max(1, k-1), C has k.

#include <vector>

#include "kskit/common.hpp"

namespace kskit {

struct BdfTableau {
  int k = 0;
  double alpha = 0.0;
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> C;
};

inline BdfTableau bdf_tableau(int k) {
  switch (k) {
    case 1:
      return {1, 1.0, {1.0}, {1.0}, {1.0}};
    case 2:
      return {2, 1.5, {2.0, -0.5}, {1.0}, {2.0, -1.0}};
    case 3:
      return {3, 11.0 / 6.0, {3.0, -1.5, 1.0 / 3.0}, {2.0, -1.0},
              {3.0, -3.0, 1.0}};
    case 4:
      return {4, 25.0 / 12.0, {4.0, -3.0, 4.0 / 3.0, -0.25},
              {3.0, -3.0, 1.0}, {4.0, -6.0, 4.0, -1.0}};
    default:
      throw config_error("bdf_tableau: order must be 1..4");
  }
}

/// coeffs[0]*levels[0] + coeffs[1]*levels[1] + ... (levels most recent first).
template <class FieldLike>
FieldLike combine(const std::vector<double>& coeffs,
                  const std::vector<FieldLike>& levels) {
  if (levels.size() < coeffs.size())
    throw std::invalid_argument("combine: not enough history levels");
  FieldLike out = coeffs[0] * levels[0];
  for (std::size_t j = 1; j < coeffs.size(); ++j)
    out.axpy(coeffs[j], levels[j]);
  return out;
}

inline double combine(const std::vector<double>& coeffs,
                      const std::vector<double>& levels) {
  if (levels.size() < coeffs.size())
    throw std::invalid_argument("combine: not enough history levels");
  double out = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) out += coeffs[j] * levels[j];
  return out;
}

}  // namespace kskit
