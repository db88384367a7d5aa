#pragma once

// Weighted L2 projection onto the admissible sets
//   positivity: { rho >= 0,        sum_i w_i rho_i = target }
//   bounds:     { 0 <= rho <= M,   sum_i w_i rho_i = target }
// written in the multiplier form the correction steps use:
//   positivity: rho_i - rho*_i = cmul * (lambda_i + xi)
//   bounds:     rho_i - rho*_i = cmul * (lambda_i * g'(rho_i) + xi)
// with lambda_i >= 0 complementary to the inequality constraints and xi the
// scalar mass multiplier. Eliminating lambda gives the clamp formula
//   rho_i = clamp(rho*_i + cmul*xi)
// so xi solves a scalar equation: the mass of the clamp is a monotone,
// piecewise-linear function of xi. We root-find it with safeguarded Newton
// (Newton is exact once the bracket sits inside one linear piece) starting
// from xi = 0, which makes the already-feasible case the exact identity.
// lambda is then recovered nodewise from the multiplier form; ties sit in
// the active set with lambda = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "kskit/common.hpp"
#include "kskit/grid.hpp"
#include "kskit/models.hpp"

namespace kskit {

struct ProjectionResult {
  std::vector<double> rho;
  std::vector<double> lambda;
  double xi = 0.0;
  int iterations = 0;
  double mass_residual = 0.0;
};

struct FieldProjectionResult {
  Field rho;
  Field lambda;
  double xi = 0.0;
  int iterations = 0;
  double mass_residual = 0.0;
};

namespace detail {

inline void check_projection_inputs(std::span<const double> rho_star,
                                    std::span<const double> weights,
                                    double cmul) {
  if (rho_star.empty())
    throw std::invalid_argument("projection: empty input");
  if (weights.size() != rho_star.size())
    throw std::invalid_argument("projection: weight size mismatch");
  for (double w : weights)
    if (!(w > 0.0))
      throw std::invalid_argument("projection: weights must be positive");
  if (!(cmul > 0.0))
    throw std::invalid_argument("projection: multiplier coefficient must be positive");
}

/// Mass of the clamp and its slope in xi (slope = cmul * sum of weights of
/// the nodes strictly inside the box).
struct MassEval {
  double mass = 0.0;
  double slope = 0.0;
};

template <class Clamp>
MassEval eval_mass(std::span<const double> rho_star,
                   std::span<const double> weights, double cmul, double xi,
                   double lo, double hi, Clamp clamp) {
  MassEval e;
  for (std::size_t i = 0; i < rho_star.size(); ++i) {
    const double raw = rho_star[i] + cmul * xi;
    const double c = clamp(raw);
    e.mass += weights[i] * c;
    if (raw > lo && raw < hi) e.slope += weights[i] * cmul;
  }
  return e;
}

/// Safeguarded Newton for mass(xi) = target on the monotone piecewise-linear
/// map, starting at xi0 inside [xlo, xhi] which must bracket the root.
template <class Clamp>
std::pair<double, int> solve_xi(std::span<const double> rho_star,
                                std::span<const double> weights, double cmul,
                                double target, double lo, double hi,
                                double xlo, double xhi, Clamp clamp) {
  const double tol = 1e-14;
  double xi = std::clamp(0.0, xlo, xhi);
  int iters = 0;
  for (; iters < 200; ++iters) {
    const MassEval e = eval_mass(rho_star, weights, cmul, xi, lo, hi, clamp);
    const double r = e.mass - target;
    if (r > 0.0)
      xhi = xi;
    else if (r < 0.0)
      xlo = xi;
    else if (e.slope > 0.0)
      return {xi, iters + 1};
    else
      xlo = xi;  // flat piece at the target: move toward its upper end
    double next;
    if (e.slope > 0.0) {
      next = xi - r / e.slope;
      if (!(next > xlo && next < xhi)) next = 0.5 * (xlo + xhi);
    } else {
      next = 0.5 * (xlo + xhi);
    }
    if (std::abs(next - xi) <= tol * (1.0 + std::abs(xi)))
      return {next, iters + 1};
    xi = next;
  }
  throw solver_error("projection: xi root-finding did not converge");
}

}  // namespace detail

inline ProjectionResult project_positive_mass(std::span<const double> rho_star,
                                              std::span<const double> weights,
                                              double target_mass,
                                              double cmul) {
  detail::check_projection_inputs(rho_star, weights, cmul);
  // Targets within round-off of the feasible interval are clamped onto it;
  // anything further out is genuinely infeasible.
  if (!std::isfinite(target_mass) ||
      target_mass < -1e-12 * std::max(1.0, std::abs(target_mass)))
    throw solver_error("project_positive_mass: infeasible target mass");
  const double target = std::max(target_mass, 0.0);

  const std::size_t n = rho_star.size();
  const auto clamp = [](double r) { return r > 0.0 ? r : 0.0; };
  const double inf = std::numeric_limits<double>::infinity();

  ProjectionResult out;
  out.rho.resize(n);
  out.lambda.assign(n, 0.0);

  double max_star = rho_star[0];
  double wsum = 0.0, wmass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_star = std::max(max_star, rho_star[i]);
    wsum += weights[i];
    wmass += weights[i] * rho_star[i];
  }

  if (target == 0.0) {
    out.xi = -max_star / cmul;  // largest xi with zero clamp mass
    out.iterations = 0;
  } else {
    // Bracket: below every breakpoint the mass is 0 <= target; on the
    // all-free line the mass already reaches the target.
    const double xlo = -max_star / cmul - 1.0;
    const double xhi = (target - wmass) / (cmul * wsum) + 1.0;
    auto [xi, iters] = detail::solve_xi(rho_star, weights, cmul, target, 0.0,
                                        inf, xlo, xhi, clamp);
    out.xi = xi;
    out.iterations = iters;
  }

  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = rho_star[i] + cmul * out.xi;
    if (raw <= 0.0) {
      out.rho[i] = 0.0;
      out.lambda[i] = std::max(-rho_star[i] / cmul - out.xi, 0.0);
    } else {
      out.rho[i] = raw;
    }
    m += weights[i] * out.rho[i];
  }
  out.mass_residual =
      std::abs(m - target) / std::max(1.0, std::abs(target));
  return out;
}

inline ProjectionResult project_bounds_mass(std::span<const double> rho_star,
                                            std::span<const double> weights,
                                            double M, double target_mass,
                                            double cmul) {
  detail::check_projection_inputs(rho_star, weights, cmul);
  if (!(M > 0.0))
    throw std::invalid_argument("project_bounds_mass: requires M > 0");
  const std::size_t n = rho_star.size();
  double wsum = 0.0, wmass = 0.0;
  double max_star = rho_star[0], min_star = rho_star[0];
  for (std::size_t i = 0; i < n; ++i) {
    wsum += weights[i];
    wmass += weights[i] * rho_star[i];
    max_star = std::max(max_star, rho_star[i]);
    min_star = std::min(min_star, rho_star[i]);
  }
  const double cap_mass = M * wsum;
  const double feas_slack = 1e-12 * std::max(1.0, cap_mass);
  if (!std::isfinite(target_mass) || target_mass < -feas_slack ||
      target_mass > cap_mass + feas_slack)
    throw solver_error("project_bounds_mass: infeasible target mass");
  const double target = std::clamp(target_mass, 0.0, cap_mass);

  const auto clamp = [M](double r) { return std::clamp(r, 0.0, M); };

  ProjectionResult out;
  out.rho.resize(n);
  out.lambda.assign(n, 0.0);

  if (target == 0.0) {
    out.xi = -max_star / cmul;
    out.iterations = 0;
  } else if (target == cap_mass) {
    out.xi = (M - min_star) / cmul;  // smallest xi with saturated mass
    out.iterations = 0;
  } else {
    const double xlo = -max_star / cmul - 1.0;
    const double xhi = (M - min_star) / cmul + 1.0;
    auto [xi, iters] = detail::solve_xi(rho_star, weights, cmul, target, 0.0,
                                        M, xlo, xhi, clamp);
    out.xi = xi;
    out.iterations = iters;
  }

  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = rho_star[i] + cmul * out.xi;
    if (raw <= 0.0) {
      out.rho[i] = 0.0;
      out.lambda[i] = std::max((-rho_star[i] / cmul - out.xi) / M, 0.0);
    } else if (raw >= M) {
      out.rho[i] = M;
      out.lambda[i] = std::max((out.xi - (M - rho_star[i]) / cmul) / M, 0.0);
    } else {
      out.rho[i] = raw;
    }
    m += weights[i] * out.rho[i];
  }
  out.mass_residual =
      std::abs(m - target) / std::max(1.0, std::abs(target));
  return out;
}

namespace detail {

inline FieldProjectionResult to_field(const Grid& g, ProjectionResult&& r) {
  FieldProjectionResult out{Field(g), Field(g), r.xi, r.iterations,
                            r.mass_residual};
  for (std::size_t i = 0; i < r.rho.size(); ++i) {
    out.rho[i] = r.rho[i];
    out.lambda[i] = r.lambda[i];
  }
  return out;
}

}  // namespace detail

inline FieldProjectionResult project_positive_mass(const Field& rho_star,
                                                   double target_mass,
                                                   double cmul) {
  const std::vector<double> w(rho_star.size(), rho_star.grid().weight());
  return detail::to_field(
      rho_star.grid(),
      project_positive_mass(rho_star.values(), w, target_mass, cmul));
}

inline FieldProjectionResult project_bounds_mass(const Field& rho_star,
                                                 double M, double target_mass,
                                                 double cmul) {
  const std::vector<double> w(rho_star.size(), rho_star.grid().weight());
  return detail::to_field(
      rho_star.grid(),
      project_bounds_mass(rho_star.values(), w, M, target_mass, cmul));
}

}  // namespace kskit
