#pragma once

// Per-step diagnostics row, error norms, and the convergence-order fit.
// The CSV layout is part of the tool's external interface; the header line
// below is fixed. Doubles are printed with %.17g so a rerun of the same
// configuration reproduces the file byte for byte.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "kskit/common.hpp"
#include "kskit/grid.hpp"
#include "kskit/integrators.hpp"

namespace kskit {

struct DiagRow {
  long step = 0;
  double time = 0.0;
  double mass_rel_drift = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double law_residual = 0.0;
  double lambda_linf = 0.0;
  double xi = 0.0;
  double eta = 0.0;
  long picard_iters = 0;  // linear solves in the cell predictor
};

inline constexpr const char* diag_csv_header =
    "step,time,mass_rel_drift,min_rho,max_rho,energy,dissipation,"
    "law_residual,lambda_linf,xi,eta,picard_iters";

/// Assembles the row for the current state (after a step). The drift is
/// signed and relative to the initial mass.
inline DiagRow record(const SchemeState& s, const StepInfo& info) {
  DiagRow r;
  r.step = s.n;
  r.time = s.t;
  const double m = mass(s.rho[0]);
  const double denom = s.mass0 != 0.0 ? std::abs(s.mass0) : 1.0;
  r.mass_rel_drift = (m - s.mass0) / denom;
  r.min_rho = min_value(s.rho[0]);
  r.max_rho = max_value(s.rho[0]);
  r.energy = s.energy[0];
  r.dissipation = info.dissipation;
  r.law_residual = info.law_residual;
  r.lambda_linf = linf(s.lambda);
  r.xi = s.xi;
  r.eta = s.eta;
  r.picard_iters = info.picard_iters;
  return r;
}

inline std::string format_row(const DiagRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                "%.17g,%ld",
                r.step, r.time, r.mass_rel_drift, r.min_rho, r.max_rho,
                r.energy, r.dissipation, r.law_residual, r.lambda_linf, r.xi,
                r.eta, r.picard_iters);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    out_ << diag_csv_header << "\n";
  }
  void add(const DiagRow& r) { out_ << format_row(r) << "\n"; }
  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

inline double linf_error(const Field& u, const Field& v) {
  u.require_same_grid(v);
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

inline double l2_error(const Field& u, const Field& v) {
  u.require_same_grid(v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return std::sqrt(s * u.grid().weight());
}

/// Least-squares slope of log(err) against log(dt). Requires at least two
/// points, positive dts and errors.
inline double fit_order(const std::vector<double>& dts,
                        const std::vector<double>& errs) {
  if (dts.size() != errs.size() || dts.size() < 2)
    throw std::invalid_argument("fit_order: need >= 2 matching points");
  const std::size_t n = dts.size();
  double sx = 0.0, sy = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(dts[i] > 0.0) || !(errs[i] > 0.0))
      throw std::invalid_argument("fit_order: dts and errors must be positive");
    lx[i] = std::log(dts[i]);
    ly[i] = std::log(errs[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  if (den == 0.0)
    throw std::invalid_argument("fit_order: dts must not be all equal");
  return num / den;
}

}  // namespace kskit
