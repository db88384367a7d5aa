#pragma once

// Independent projection oracle by exhaustive active-set enumeration.
// For the weighted QP
//   min 1/2 sum w_i (rho_i - rho*_i)^2   s.t.  sum w_i rho_i = target,
//   rho >= 0 (and rho <= M for the box variant)
// every assignment of nodes to {free, at 0} (or {free, at 0, at M}) is
// tried: on the free set stationarity forces a uniform shift nu with
//   rho_i = rho*_i + nu,  nu = (target - contribution of clamped nodes
//                               - sum_F w_i rho*_i) / sum_F w_i,
// and the candidate is kept when it is primal feasible. The minimizer is
// the feasible candidate with the smallest objective. Deliberately shares
// no code with the production projection.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

inline double objective(const std::vector<double>& rho,
                        const std::vector<double>& rho_star,
                        const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double d = rho[i] - rho_star[i];
    s += 0.5 * w[i] * d * d;
  }
  return s;
}

/// Positivity variant. Returns the minimizer, or nullopt when target < 0
/// (infeasible).
inline std::optional<std::vector<double>> project_positive(
    const std::vector<double>& rho_star, const std::vector<double>& w,
    double target) {
  if (target < 0.0) return std::nullopt;
  const std::size_t n = rho_star.size();
  std::optional<std::vector<double>> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    // bit set -> node free
    double wf = 0.0, wr = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ul << i)) {
        wf += w[i];
        wr += w[i] * rho_star[i];
      }
    std::vector<double> cand(n, 0.0);
    if (wf == 0.0) {
      if (std::abs(target) > 1e-12 * (1.0 + std::abs(target))) continue;
    } else {
      const double nu = (target - wr) / wf;
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i)
        if (mask & (1ul << i)) {
          cand[i] = rho_star[i] + nu;
          if (cand[i] < -1e-13) ok = false;
          if (cand[i] < 0.0) cand[i] = 0.0;
        }
      if (!ok) continue;
    }
    const double obj = objective(cand, rho_star, w);
    if (obj < best_obj) {
      best_obj = obj;
      best = cand;
    }
  }
  return best;
}

/// Box variant (0 <= rho <= M). Returns nullopt when the target mass is
/// outside [0, M * sum w].
inline std::optional<std::vector<double>> project_box(
    const std::vector<double>& rho_star, const std::vector<double>& w,
    double M, double target) {
  const std::size_t n = rho_star.size();
  double wsum = 0.0;
  for (double wi : w) wsum += wi;
  if (target < 0.0 || target > M * wsum) return std::nullopt;
  std::optional<std::vector<double>> best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> state(n, 0);  // 0 = at 0, 1 = free, 2 = at M
  for (;;) {
    double wf = 0.0, wr = 0.0, clamped_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == 1) {
        wf += w[i];
        wr += w[i] * rho_star[i];
      } else if (state[i] == 2) {
        clamped_mass += w[i] * M;
      }
    }
    std::vector<double> cand(n, 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i)
      if (state[i] == 2) cand[i] = M;
    if (wf == 0.0) {
      if (std::abs(clamped_mass - target) > 1e-12 * (1.0 + std::abs(target)))
        ok = false;
    } else {
      const double nu = (target - clamped_mass - wr) / wf;
      for (std::size_t i = 0; i < n && ok; ++i)
        if (state[i] == 1) {
          cand[i] = rho_star[i] + nu;
          if (cand[i] < -1e-13 || cand[i] > M + 1e-13) ok = false;
          if (cand[i] < 0.0) cand[i] = 0.0;
          if (cand[i] > M) cand[i] = M;
        }
    }
    if (ok) {
      const double obj = objective(cand, rho_star, w);
      if (obj < best_obj) {
        best_obj = obj;
        best = cand;
      }
    }
    // next ternary assignment
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++state[i] <= 2) break;
      state[i] = 0;
    }
    if (i == n) break;
  }
  return best;
}

}  // namespace oracle
