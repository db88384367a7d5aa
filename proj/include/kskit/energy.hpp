#pragma once

// Free energies, dissipation functionals, and the scalar energy correction.
//
// Kind 1:  E = [rho*log(rho+sigma) - rho - rho*c, 1] + 1/2 [|grad c|^2, 1]
// Kind 2:  E = [rho*log(rho+sigma) + (M-rho)*log(1-rho/M+sigma) - rho*c, 1]
//              + 1/2 [|grad c|^2, 1]
// using the convention 0*log(y) = 0 at nodes where the prefactor vanishes
// (the log argument may then be anything, including 0).
//
// The dissipation is a weighted square norm and is evaluated with spectral
// derivatives of the shifted log as a field, which requires rho+sigma > 0 at
// every node.
//
// The correction adds a spatial constant to the chemical predictor:
// E depends on c only through -[rho*c,1] + 1/2[|grad c|^2,1], so
// E(rho, c + s*eta) = E(rho, c) - s*eta*[rho,1] exactly, and eta solving
// E(rho^{n+1}, c^{n+1}) = E_target is the quotient below. Gradients of c are
// untouched by the shift.

#include <cmath>
#include <string>

#include "kskit/common.hpp"
#include "kskit/grid.hpp"
#include "kskit/models.hpp"
#include "kskit/spectral.hpp"

namespace kskit {

/// x*log(y) with 0*log(anything) = 0. Raises only when the prefactor is
/// nonzero and the log argument is out of domain.
inline double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  if (!(y > 0.0))
    throw solver_error("xlogy: log argument " + std::to_string(y) +
                       " out of domain with nonzero prefactor");
  return x * std::log(y);
}

/// Per-step energy bookkeeping consumed by the diagnostics row.
struct EnergyRecord {
  double energy = 0.0;
  double dissipation = 0.0;
  double law_residual = 0.0;
};

inline double energy_type1(SpectrumWorkspace& ws, const Field& rho,
                           const Field& c, double sigma) {
  rho.require_same_grid(c);
  const auto [cx, cy] = ws.gradient(c);
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    s += xlogy(rho[i], rho[i] + sigma) - rho[i] - rho[i] * c[i] +
         0.5 * (cx[i] * cx[i] + cy[i] * cy[i]);
  return s * rho.grid().weight();
}

inline double energy_type2(SpectrumWorkspace& ws, const Field& rho,
                           const Field& c, double M, double sigma) {
  rho.require_same_grid(c);
  const auto [cx, cy] = ws.gradient(c);
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    s += xlogy(rho[i], rho[i] + sigma) +
         xlogy(M - rho[i], 1.0 - rho[i] / M + sigma) - rho[i] * c[i] +
         0.5 * (cx[i] * cx[i] + cy[i] * cy[i]);
  return s * rho.grid().weight();
}

/// Dispatch on the model kind.
inline double energy(SpectrumWorkspace& ws, const ModelParams& p,
                     const Field& rho, const Field& c) {
  return p.kind == ModelKind::type1
             ? energy_type1(ws, rho, c, p.sigma)
             : energy_type2(ws, rho, c, p.M, p.sigma);
}

namespace detail {

/// [weight * |grad(log(rho_log+sigma) - c_mid)|^2, 1] + [dcdt^2, 1].
inline double dissipation_core(SpectrumWorkspace& ws, const Field& weight,
                               const Field& rho_log, const Field& c_mid,
                               const Field& dcdt, double sigma) {
  Field d = nodal_log_shift(rho_log, sigma);
  d -= c_mid;
  const auto [gx, gy] = ws.gradient(d);
  double s = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i)
    s += weight[i] * (gx[i] * gx[i] + gy[i] * gy[i]) + dcdt[i] * dcdt[i];
  return s * weight.grid().weight();
}

}  // namespace detail

/// Kind-1 rate: mobility weight rho_mid, chemical rate dcdt as a field.
inline double dissipation_type1(SpectrumWorkspace& ws, const Field& rho_mid,
                                const Field& c_mid, const Field& dcdt,
                                double sigma) {
  return detail::dissipation_core(ws, rho_mid, rho_mid, c_mid, dcdt, sigma);
}

/// Kind-2 rate: mobility weight S(rho).
inline double dissipation_type2(SpectrumWorkspace& ws, const Field& rho,
                                const Field& c_mid, const Field& dcdt,
                                double M, double sigma) {
  return detail::dissipation_core(ws, sensitivity(rho, M), rho, c_mid, dcdt,
                                  sigma);
}

struct EtaResult {
  double eta = 0.0;
  Field c_new;
  double energy_new = 0.0;
};

/// Chooses the constant shift c^{n+1} = c_tilde + shift_scale*eta so that
/// E(rho_new, c^{n+1}) = E_target, where shift_scale is dt/epsilon for the
/// averaged scheme and dt/(epsilon*alpha_k) for the BDF family. The zero
/// state (zero mass and already-balanced energy) is a fixed point with
/// eta = 0; zero mass with an energy imbalance is an error.
inline EtaResult solve_eta(SpectrumWorkspace& ws, const ModelParams& p,
                           double E_target, const Field& rho_new,
                           const Field& c_tilde, double shift_scale) {
  const double E_pred = energy(ws, p, rho_new, c_tilde);
  const double denom = shift_scale * mass(rho_new);
  EtaResult out;
  if (denom == 0.0) {
    if (std::abs(E_pred - E_target) <= 1e-12 * (1.0 + std::abs(E_target))) {
      out.eta = 0.0;
      out.c_new = c_tilde;
      out.energy_new = E_pred;
      return out;
    }
    throw solver_error("solve_eta: zero-mass state with unbalanced energy");
  }
  out.eta = (E_pred - E_target) / denom;
  out.c_new = c_tilde;
  out.c_new += shift_scale * out.eta;
  out.energy_new = energy(ws, p, rho_new, out.c_new);
  return out;
}

}  // namespace kskit
