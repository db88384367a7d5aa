#pragma once

// Model data for the two chemotaxis systems:
//   kind 1: cell flux gamma*grad(rho) - chi*rho*grad(c); rho stays >= 0.
//   kind 2: flux gamma*grad(rho) - chi*S(rho)*grad(c) with the saturating
//           sensitivity S(rho) = rho*(M - rho)/M; rho stays in [0, M].
// g(rho) = rho*(M - rho) is the constraint function whose derivative
// g'(rho) = M - 2*rho weights the bound multiplier; S = g/M.

#include <cmath>
#include <vector>

#include "kskit/common.hpp"
#include "kskit/grid.hpp"

namespace kskit {

enum class ModelKind { type1, type2 };

struct ModelParams {
  ModelKind kind = ModelKind::type1;
  double gamma = 1.0;    // cell diffusion
  double chi = 1.0;      // chemotactic strength
  double mu = 1.0;       // chemical diffusion
  double epsilon = 1.0;  // chemical relaxation time
  double M = 0.0;        // upper bound (kind 2 only)
  double sigma = 1e-10;  // entropy regularization in the energy

  void validate() const {
    if (!(gamma > 0.0) || !(mu > 0.0) || !(epsilon > 0.0))
      throw config_error("ModelParams: gamma, mu, epsilon must be positive");
    if (chi < 0.0) throw config_error("ModelParams: chi must be >= 0");
    if (kind == ModelKind::type2 && !(M > 0.0))
      throw config_error("ModelParams: kind 2 requires M > 0");
    if (sigma < 0.0) throw config_error("ModelParams: sigma must be >= 0");
  }
};

inline double sensitivity(double rho, double M) { return rho * (M - rho) / M; }

inline double g_constraint(double rho, double M) { return rho * (M - rho); }

inline double g_prime(double rho, double M) { return M - 2.0 * rho; }

inline Field sensitivity(const Field& rho, double M) {
  Field out(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i)
    out[i] = sensitivity(rho[i], M);
  return out;
}

inline Field g_prime(const Field& rho, double M) {
  Field out(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i) out[i] = g_prime(rho[i], M);
  return out;
}

/// One isotropic Gaussian bump a*exp(-w*((x-x0)^2 + (y-y0)^2)).
struct GaussianTerm {
  double amplitude = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double inv_width = 1.0;
};

struct InitialCondition {
  std::vector<GaussianTerm> rho;
  std::vector<GaussianTerm> c;
};

/// Superposition of Gaussian bumps sampled at the nodes (no periodic
/// images; the presets keep bumps far from the boundary).
inline Field build_initial(const Grid& g,
                           const std::vector<GaussianTerm>& terms) {
  Field f(g);
  for (const GaussianTerm& t : terms) {
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double dx = g.x(ix) - t.x0;
        const double dy = g.y(iy) - t.y0;
        f.at(ix, iy) += t.amplitude * std::exp(-t.inv_width * (dx * dx + dy * dy));
      }
  }
  return f;
}

}  // namespace kskit
