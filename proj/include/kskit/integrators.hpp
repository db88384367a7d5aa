#pragma once

// Time integrators. Every structure-preserving step has the same four-phase
// shape:
//   1. chemical predictor: constant-coefficient solve for c_tilde,
//   2. cell predictor: transport solve for rho_tilde carrying the previous
//      multiplier source,
//   3. KKT correction: subtract the carried source and project onto the
//      admissible set at the initial mass (produces rho^{n+1}, lambda, xi),
//   4. energy correction: pick the constant shift eta of c_tilde so the
//      discrete energy identity E-change = -dt * dissipation holds exactly.
// The semi-implicit baseline performs phases 1-2 only (no multipliers, no
// projection, no energy law); it exists as the contrast scheme.
//
// Histories are stored most recent first. Missing start-up levels are
// synthesized by lower-order members of the same family: a k-step method
// runs steps of order 1..k-1 first, and the averaged (trapezoidal) schemes
// take one backward-Euler step of their family.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kskit/common.hpp"
#include "kskit/energy.hpp"
#include "kskit/grid.hpp"
#include "kskit/models.hpp"
#include "kskit/projection.hpp"
#include "kskit/spectral.hpp"
#include "kskit/tableau.hpp"

namespace kskit {

enum class SchemeKind { cn_pos, bdf_pos, cn_bound, bdf_bound, semi_implicit };

struct SchemeSpec {
  SchemeKind kind = SchemeKind::bdf_pos;
  int order = 2;  // BDF order; fixed at 2 for the averaged and baseline schemes

  bool is_bdf() const {
    return kind == SchemeKind::bdf_pos || kind == SchemeKind::bdf_bound;
  }
  bool is_positivity() const {
    return kind == SchemeKind::cn_pos || kind == SchemeKind::bdf_pos;
  }
  bool is_bound() const {
    return kind == SchemeKind::cn_bound || kind == SchemeKind::bdf_bound;
  }
  bool preserving() const { return kind != SchemeKind::semi_implicit; }
};

struct SolverOptions {
  double picard_tol = 1e-12;
  int picard_max_iters = 200;
};

struct SchemeState {
  long n = 0;
  double t = 0.0;
  std::vector<Field> rho;     // [0] = rho^n, [1] = rho^{n-1}, ...
  std::vector<Field> c;       // corrected chemical history
  std::vector<Field> source;  // carried multiplier source per level
  std::vector<double> energy;
  Field lambda;
  double xi = 0.0;
  double eta = 0.0;
  double mass0 = 0.0;
};

struct StepInfo {
  int order_used = 0;
  int picard_iters = 0;       // linear solves in the cell predictor
  int projection_iters = 0;
  double dissipation = 0.0;
  double law_residual = 0.0;
};

struct CdSolveResult {
  Field x;
  int iterations = 0;
};

/// Solves a*x - b*lap(x) + chi_coef*div(x*w) = rhs by Picard iteration
/// preconditioned with the constant-coefficient inverse:
///   x <- helmholtz_solve(a, b, rhs - chi_coef*div(x*w)).
/// With chi_coef = 0 or w identically zero this is a single solve.
/// Convergence is a relative sup-norm update below opts.picard_tol;
/// exceeding opts.picard_max_iters is a solver failure.
inline CdSolveResult implicit_cd_solve(SpectrumWorkspace& ws, double a,
                                       double b, const Field& wx,
                                       const Field& wy, const Field& rhs,
                                       double chi_coef,
                                       const SolverOptions& opts = {}) {
  CdSolveResult res{ws.helmholtz_solve(a, b, rhs), 1};
  if (chi_coef == 0.0 || (linf(wx) == 0.0 && linf(wy) == 0.0)) return res;
  for (; res.iterations < opts.picard_max_iters; ) {
    Field flux = ws.divergence(nodal_product(res.x, wx),
                               nodal_product(res.x, wy));
    Field r = rhs;
    r.axpy(-chi_coef, flux);
    Field x_new = ws.helmholtz_solve(a, b, r);
    ++res.iterations;
    Field diff = x_new;
    diff -= res.x;
    const double du = linf(diff);
    res.x = std::move(x_new);
    if (du <= opts.picard_tol * (1.0 + linf(res.x))) return res;
  }
  throw solver_error(
      "implicit_cd_solve: Picard iteration did not converge in " +
      std::to_string(opts.picard_max_iters) +
      " iterations; reduce the time step");
}

namespace detail {

inline void push_level(std::vector<Field>& hist, Field f, std::size_t cap) {
  hist.insert(hist.begin(), std::move(f));
  if (hist.size() > cap) hist.resize(cap);
}

inline void push_level(std::vector<double>& hist, double v, std::size_t cap) {
  hist.insert(hist.begin(), v);
  if (hist.size() > cap) hist.resize(cap);
}

inline void require_levels(const SchemeState& s, std::size_t need,
                           std::size_t need_c) {
  if (s.rho.size() < need || s.c.size() < need_c || s.source.empty() ||
      s.energy.size() < need)
    throw std::invalid_argument("step: insufficient history levels");
}

inline void check_iterate(const Field& rho, const Field& c) {
  if (!all_finite(rho) || !all_finite(c))
    throw solver_error("step: non-finite iterate");
}

/// Reported energy for the baseline, whose iterate may leave the admissible
/// set where the entropy terms are undefined: log arguments are floored at
/// max(sigma, DBL_MIN). Preserving schemes never take this path.
inline double baseline_energy_type2(SpectrumWorkspace& ws, const Field& rho,
                                    const Field& c, double M, double sigma) {
  const double floor = std::max(sigma, std::numeric_limits<double>::min());
  const auto [cx, cy] = ws.gradient(c);
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    s += rho[i] * std::log(std::max(rho[i] + sigma, floor)) +
         (M - rho[i]) * std::log(std::max(1.0 - rho[i] / M + sigma, floor)) -
         rho[i] * c[i] + 0.5 * (cx[i] * cx[i] + cy[i] * cy[i]);
  return s * rho.grid().weight();
}

inline Field source_positivity(const Field& lambda, double xi) {
  Field s = lambda;
  s += xi;
  return s;
}

inline Field source_bound(const Field& lambda, const Field& rho, double M,
                          double xi) {
  Field s = nodal_product(lambda, g_prime(rho, M));
  s += xi;
  return s;
}

}  // namespace detail

/// Averaged (trapezoidal) scheme for the positivity model.
inline StepInfo cn_positivity_step(SpectrumWorkspace& ws, SchemeState& s,
                                   const ModelParams& p, double dt,
                                   const SolverOptions& opts = {}) {
  detail::require_levels(s, 2, 1);
  const Field& rho_n = s.rho[0];
  const Field& c_n = s.c[0];
  const Field& src = s.source[0];
  StepInfo info;
  info.order_used = 2;

  // 1. chemical predictor
  Field rhs_c = (p.epsilon / dt) * c_n;
  rhs_c.axpy(0.5 * p.mu, ws.laplacian(c_n));
  rhs_c.axpy(1.5, rho_n);
  rhs_c.axpy(-0.5, s.rho[1]);
  Field c_til = ws.helmholtz_solve(p.epsilon / dt, 0.5 * p.mu, rhs_c);
  Field c_mid = 0.5 * (c_til + c_n);
  const auto [wx, wy] = ws.gradient(c_mid);

  // 2. cell predictor
  Field rhs_r = (1.0 / dt) * rho_n;
  rhs_r.axpy(0.5 * p.gamma, ws.laplacian(rho_n));
  rhs_r.axpy(-0.5 * p.chi, ws.divergence(nodal_product(rho_n, wx),
                                         nodal_product(rho_n, wy)));
  rhs_r += src;
  CdSolveResult cd = implicit_cd_solve(ws, 1.0 / dt, 0.5 * p.gamma, wx, wy,
                                       rhs_r, 0.5 * p.chi, opts);
  info.picard_iters = cd.iterations;

  // 3. KKT correction
  Field rho_star = cd.x;
  rho_star.axpy(-0.5 * dt, src);
  FieldProjectionResult pr =
      project_positive_mass(rho_star, s.mass0, 0.5 * dt);
  info.projection_iters = pr.iterations;

  // 4. energy correction
  Field dcdt = (1.0 / dt) * (c_til - c_n);
  Field rho_mid = 0.5 * (pr.rho + rho_n);
  const double D = dissipation_type1(ws, rho_mid, c_mid, dcdt, p.sigma);
  const double E_target = s.energy[0] - dt * D;
  EtaResult er = solve_eta(ws, p, E_target, pr.rho, c_til, dt / p.epsilon);
  info.dissipation = D;
  info.law_residual = (er.energy_new - s.energy[0] + dt * D) /
                      (1.0 + std::abs(er.energy_new));

  detail::check_iterate(pr.rho, er.c_new);
  const std::size_t cap = 2;
  s.lambda = pr.lambda;
  s.xi = pr.xi;
  s.eta = er.eta;
  detail::push_level(s.source, detail::source_positivity(pr.lambda, pr.xi), cap);
  detail::push_level(s.rho, std::move(pr.rho), cap);
  detail::push_level(s.c, std::move(er.c_new), cap);
  detail::push_level(s.energy, er.energy_new, cap);
  ++s.n;
  s.t = s.n * dt;
  return info;
}

/// BDF-k scheme for the positivity model, k = 1..4.
inline StepInfo bdf_positivity_step(SpectrumWorkspace& ws, SchemeState& s,
                                    const ModelParams& p, double dt, int k,
                                    const SolverOptions& opts = {}) {
  const BdfTableau tab = bdf_tableau(k);
  detail::require_levels(s, tab.A.size(), tab.A.size());
  StepInfo info;
  info.order_used = k;

  Field Ak_c = combine(tab.A, s.c);
  Field Ak_rho = combine(tab.A, s.rho);

  // 1. chemical predictor
  Field rhs_c = (p.epsilon / dt) * Ak_c;
  rhs_c += combine(tab.C, s.rho);
  Field c_til = ws.helmholtz_solve(p.epsilon * tab.alpha / dt, p.mu, rhs_c);
  const auto [wx, wy] = ws.gradient(c_til);

  // 2. cell predictor
  Field srcB = combine(tab.B, s.source);
  Field rhs_r = (1.0 / dt) * Ak_rho;
  rhs_r += srcB;
  CdSolveResult cd = implicit_cd_solve(ws, tab.alpha / dt, p.gamma, wx, wy,
                                       rhs_r, p.chi, opts);
  info.picard_iters = cd.iterations;

  // 3. KKT correction
  Field rho_star = cd.x;
  rho_star.axpy(-dt / tab.alpha, srcB);
  FieldProjectionResult pr =
      project_positive_mass(rho_star, s.mass0, dt / tab.alpha);
  info.projection_iters = pr.iterations;

  // 4. energy correction
  Field dcdt = (1.0 / dt) * (tab.alpha * c_til - Ak_c);
  const double D = dissipation_type1(ws, pr.rho, c_til, dcdt, p.sigma);
  const double AkE = combine(tab.A, s.energy);
  const double E_target = (AkE - dt * D) / tab.alpha;
  EtaResult er =
      solve_eta(ws, p, E_target, pr.rho, c_til, dt / (p.epsilon * tab.alpha));
  info.dissipation = D;
  info.law_residual = (tab.alpha * er.energy_new - AkE + dt * D) /
                      (1.0 + std::abs(er.energy_new));

  detail::check_iterate(pr.rho, er.c_new);
  // retain enough levels for the deepest member so start-up can climb orders
  const std::size_t cap = 4;
  s.lambda = pr.lambda;
  s.xi = pr.xi;
  s.eta = er.eta;
  detail::push_level(s.source, detail::source_positivity(pr.lambda, pr.xi), cap);
  detail::push_level(s.rho, std::move(pr.rho), cap);
  detail::push_level(s.c, std::move(er.c_new), cap);
  detail::push_level(s.energy, er.energy_new, cap);
  ++s.n;
  s.t = s.n * dt;
  return info;
}

/// Averaged (trapezoidal) scheme for the bounded model. The convection is
/// extrapolated, so the cell predictor is a constant-coefficient solve.
inline StepInfo cn_bound_step(SpectrumWorkspace& ws, SchemeState& s,
                              const ModelParams& p, double dt,
                              const SolverOptions& opts = {}) {
  (void)opts;
  detail::require_levels(s, 2, 2);
  const Field& rho_n = s.rho[0];
  const Field& c_n = s.c[0];
  const Field& src = s.source[0];
  StepInfo info;
  info.order_used = 2;

  // 1. chemical predictor
  Field rhs_c = (p.epsilon / dt) * c_n;
  rhs_c.axpy(0.5 * p.mu, ws.laplacian(c_n));
  rhs_c.axpy(1.5, rho_n);
  rhs_c.axpy(-0.5, s.rho[1]);
  Field c_til = ws.helmholtz_solve(p.epsilon / dt, 0.5 * p.mu, rhs_c);
  Field c_mid = 0.5 * (c_til + c_n);

  // 2. cell predictor with extrapolated mobility and wind
  Field rho_ex = 1.5 * rho_n;
  rho_ex.axpy(-0.5, s.rho[1]);
  Field c_ex = 1.5 * c_n;
  c_ex.axpy(-0.5, s.c[1]);
  const auto [ex_x, ex_y] = ws.gradient(c_ex);
  Field Srho = sensitivity(rho_ex, p.M);
  Field rhs_r = (1.0 / dt) * rho_n;
  rhs_r.axpy(0.5 * p.gamma, ws.laplacian(rho_n));
  rhs_r.axpy(-p.chi, ws.divergence(nodal_product(Srho, ex_x),
                                   nodal_product(Srho, ex_y)));
  rhs_r += src;
  Field rho_til = ws.helmholtz_solve(1.0 / dt, 0.5 * p.gamma, rhs_r);
  info.picard_iters = 1;

  // 3. KKT correction
  Field rho_star = rho_til;
  rho_star.axpy(-0.5 * dt, src);
  FieldProjectionResult pr =
      project_bounds_mass(rho_star, p.M, s.mass0, 0.5 * dt);
  info.projection_iters = pr.iterations;

  // 4. energy correction
  Field dcdt = (1.0 / dt) * (c_til - c_n);
  Field rho_mid = 0.5 * (pr.rho + rho_n);
  const double D = dissipation_type2(ws, rho_mid, c_mid, dcdt, p.M, p.sigma);
  const double E_target = s.energy[0] - dt * D;
  EtaResult er = solve_eta(ws, p, E_target, pr.rho, c_til, dt / p.epsilon);
  info.dissipation = D;
  info.law_residual = (er.energy_new - s.energy[0] + dt * D) /
                      (1.0 + std::abs(er.energy_new));

  detail::check_iterate(pr.rho, er.c_new);
  const std::size_t cap = 2;
  s.lambda = pr.lambda;
  s.xi = pr.xi;
  s.eta = er.eta;
  detail::push_level(s.source,
                     detail::source_bound(pr.lambda, pr.rho, p.M, pr.xi), cap);
  detail::push_level(s.rho, std::move(pr.rho), cap);
  detail::push_level(s.c, std::move(er.c_new), cap);
  detail::push_level(s.energy, er.energy_new, cap);
  ++s.n;
  s.t = s.n * dt;
  return info;
}

/// BDF-k scheme for the bounded model, k = 1..4.
inline StepInfo bdf_bound_step(SpectrumWorkspace& ws, SchemeState& s,
                               const ModelParams& p, double dt, int k,
                               const SolverOptions& opts = {}) {
  (void)opts;
  const BdfTableau tab = bdf_tableau(k);
  detail::require_levels(s, tab.A.size(), tab.A.size());
  StepInfo info;
  info.order_used = k;

  Field Ak_c = combine(tab.A, s.c);
  Field Ak_rho = combine(tab.A, s.rho);

  // 1. chemical predictor
  Field rhs_c = (p.epsilon / dt) * Ak_c;
  rhs_c += combine(tab.C, s.rho);
  Field c_til = ws.helmholtz_solve(p.epsilon * tab.alpha / dt, p.mu, rhs_c);

  // 2. cell predictor with extrapolated mobility and wind
  Field Ck_c = combine(tab.C, s.c);
  Field Srho = sensitivity(combine(tab.C, s.rho), p.M);
  const auto [ex_x, ex_y] = ws.gradient(Ck_c);
  Field srcB = combine(tab.B, s.source);
  Field rhs_r = (1.0 / dt) * Ak_rho;
  rhs_r.axpy(-p.chi, ws.divergence(nodal_product(Srho, ex_x),
                                   nodal_product(Srho, ex_y)));
  rhs_r += srcB;
  Field rho_til = ws.helmholtz_solve(tab.alpha / dt, p.gamma, rhs_r);
  info.picard_iters = 1;

  // 3. KKT correction
  Field rho_star = rho_til;
  rho_star.axpy(-dt / tab.alpha, srcB);
  FieldProjectionResult pr =
      project_bounds_mass(rho_star, p.M, s.mass0, dt / tab.alpha);
  info.projection_iters = pr.iterations;

  // 4. energy correction
  Field dcdt = (1.0 / dt) * (tab.alpha * c_til - Ak_c);
  const double D = dissipation_type2(ws, pr.rho, c_til, dcdt, p.M, p.sigma);
  const double AkE = combine(tab.A, s.energy);
  const double E_target = (AkE - dt * D) / tab.alpha;
  EtaResult er =
      solve_eta(ws, p, E_target, pr.rho, c_til, dt / (p.epsilon * tab.alpha));
  info.dissipation = D;
  info.law_residual = (tab.alpha * er.energy_new - AkE + dt * D) /
                      (1.0 + std::abs(er.energy_new));

  detail::check_iterate(pr.rho, er.c_new);
  // retain enough levels for the deepest member so start-up can climb orders
  const std::size_t cap = 4;
  s.lambda = pr.lambda;
  s.xi = pr.xi;
  s.eta = er.eta;
  detail::push_level(s.source,
                     detail::source_bound(pr.lambda, pr.rho, p.M, pr.xi), cap);
  detail::push_level(s.rho, std::move(pr.rho), cap);
  detail::push_level(s.c, std::move(er.c_new), cap);
  detail::push_level(s.energy, er.energy_new, cap);
  ++s.n;
  s.t = s.n * dt;
  return info;
}

/// Two-step semi-implicit baseline for the bounded model: extrapolated
/// mobility, fully explicit convection given the new chemical, no
/// multipliers, no projection, no energy law. order selects the start-up
/// (1 = backward Euler) versus the regular two-step member.
inline StepInfo semi_implicit_step(SpectrumWorkspace& ws, SchemeState& s,
                                   const ModelParams& p, double dt, int order,
                                   const SolverOptions& opts = {}) {
  StepInfo info;
  info.order_used = order;
  Field c_new(s.c[0].grid());
  Field rho_ex(s.rho[0].grid());
  double a_rho = 0.0;
  Field rhs_r(s.rho[0].grid());
  if (order == 1) {
    detail::require_levels(s, 1, 1);
    Field rhs_c = (p.epsilon / dt) * s.c[0];
    rhs_c += s.rho[0];
    c_new = ws.helmholtz_solve(p.epsilon / dt, p.mu, rhs_c);
    rho_ex = s.rho[0];
    a_rho = 1.0 / dt;
    rhs_r = (1.0 / dt) * s.rho[0];
  } else {
    detail::require_levels(s, 2, 2);
    Field rhs_c = (0.5 * p.epsilon / dt) * (4.0 * s.c[0] - s.c[1]);
    rhs_c.axpy(2.0, s.rho[0]);
    rhs_c.axpy(-1.0, s.rho[1]);
    c_new = ws.helmholtz_solve(1.5 * p.epsilon / dt, p.mu, rhs_c);
    rho_ex = 2.0 * s.rho[0];
    rho_ex.axpy(-1.0, s.rho[1]);
    a_rho = 1.5 / dt;
    rhs_r = (0.5 / dt) * (4.0 * s.rho[0] - s.rho[1]);
  }
  const auto [gx, gy] = ws.gradient(c_new);
  Field Srho = sensitivity(rho_ex, p.M);
  rhs_r.axpy(-p.chi, ws.divergence(nodal_product(Srho, gx),
                                   nodal_product(Srho, gy)));
  CdSolveResult cd =
      implicit_cd_solve(ws, a_rho, p.gamma, gx, gy, rhs_r, 0.0, opts);
  info.picard_iters = cd.iterations;

  detail::check_iterate(cd.x, c_new);
  const double E =
      detail::baseline_energy_type2(ws, cd.x, c_new, p.M, p.sigma);
  const std::size_t cap = 2;
  s.lambda = Field(s.rho[0].grid());
  s.xi = 0.0;
  s.eta = 0.0;
  detail::push_level(s.source, Field(s.rho[0].grid()), cap);
  detail::push_level(s.rho, std::move(cd.x), cap);
  detail::push_level(s.c, std::move(c_new), cap);
  detail::push_level(s.energy, E, cap);
  ++s.n;
  s.t = s.n * dt;
  return info;
}

/// Owns the workspace and state and dispatches steps, synthesizing start-up
/// levels with lower-order members of the same family.
class Integrator {
 public:
  Integrator(const Grid& g, const ModelParams& p, SchemeSpec scheme, double dt,
             SolverOptions opts = {})
      : ws_(g), params_(p), scheme_(scheme), dt_(dt), opts_(opts) {
    params_.validate();
    if (!(dt > 0.0)) throw config_error("Integrator: dt must be positive");
    if (scheme.is_bdf() && (scheme.order < 1 || scheme.order > 4))
      throw config_error("Integrator: BDF order must be 1..4");
    if (scheme.is_positivity() && params_.kind != ModelKind::type1)
      throw config_error("Integrator: positivity schemes require model kind 1");
    if ((scheme.is_bound() || scheme.kind == SchemeKind::semi_implicit) &&
        params_.kind != ModelKind::type2)
      throw config_error("Integrator: bounded schemes require model kind 2");
    if (scheme.preserving() && !(params_.sigma > 0.0))
      throw config_error(
          "Integrator: structure-preserving schemes require sigma > 0");
  }

  void initialize(const Field& rho0, const Field& c0) {
    rho0.require_same_grid(c0);
    if (!(rho0.grid() == ws_.grid()))
      throw std::invalid_argument("Integrator: initial data grid mismatch");
    state_ = SchemeState{};
    state_.rho = {rho0};
    state_.c = {c0};
    state_.source = {Field(ws_.grid())};
    state_.lambda = Field(ws_.grid());
    state_.mass0 = mass(rho0);
    const double E0 =
        scheme_.preserving()
            ? energy(ws_, params_, rho0, c0)
            : detail::baseline_energy_type2(ws_, rho0, c0, params_.M,
                                            params_.sigma);
    state_.energy = {E0};
    initialized_ = true;
  }

  /// Order actually used for 0-based step index n (start-up aware).
  int order_for_step(long n) const {
    const int k = scheme_.is_bdf() ? scheme_.order : 2;
    return static_cast<int>(std::min<long>(n + 1, k));
  }

  StepInfo step() {
    if (!initialized_) throw std::logic_error("Integrator: not initialized");
    const int order = order_for_step(state_.n);
    switch (scheme_.kind) {
      case SchemeKind::cn_pos:
        return order < 2 ? bdf_positivity_step(ws_, state_, params_, dt_, 1,
                                               opts_)
                         : cn_positivity_step(ws_, state_, params_, dt_, opts_);
      case SchemeKind::bdf_pos:
        return bdf_positivity_step(ws_, state_, params_, dt_, order, opts_);
      case SchemeKind::cn_bound:
        return order < 2
                   ? bdf_bound_step(ws_, state_, params_, dt_, 1, opts_)
                   : cn_bound_step(ws_, state_, params_, dt_, opts_);
      case SchemeKind::bdf_bound:
        return bdf_bound_step(ws_, state_, params_, dt_, order, opts_);
      case SchemeKind::semi_implicit:
        return semi_implicit_step(ws_, state_, params_, dt_, order, opts_);
    }
    throw std::logic_error("Integrator: unknown scheme");
  }

  const SchemeState& state() const { return state_; }
  SpectrumWorkspace& workspace() { return ws_; }
  const ModelParams& params() const { return params_; }
  const SchemeSpec& scheme() const { return scheme_; }
  double dt() const { return dt_; }

 private:
  SpectrumWorkspace ws_;
  ModelParams params_;
  SchemeSpec scheme_;
  double dt_;
  SolverOptions opts_;
  SchemeState state_;
  bool initialized_ = false;
};

}  // namespace kskit
