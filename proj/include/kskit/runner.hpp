#pragma once

// Run orchestration: the single-run loop (diagnostics rows, snapshots,
// summary) and the time-step refinement sweep. Sweep members run in
// parallel worker threads, each with its own integrator and transform
// workspace; KSKIT_THREADS caps the worker count. A single run is always
// sequential, so its diagnostics CSV is reproducible byte for byte.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kskit/config.hpp"
#include "kskit/diagnostics.hpp"
#include "kskit/integrators.hpp"
#include "kskit/io.hpp"

namespace kskit {

struct RunAggregates {
  double max_abs_mass_drift = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
  double max_lambda_linf = 0.0;
  double max_abs_law_residual = 0.0;
  long max_picard_iters = 0;
  double final_energy = 0.0;
  long steps = 0;
};

struct RunOutcome {
  Field rho_final;
  Field c_final;
  RunAggregates agg;
  double wall_seconds = 0.0;
};

/// Observer for run artifacts; the file sink and the tests implement it.
class DiagSink {
 public:
  virtual ~DiagSink() = default;
  virtual void on_row(const DiagRow&) {}
  virtual void on_snapshot(const Field&, double /*time*/,
                           const std::string& /*name*/, int /*index*/) {}
};

inline RunOutcome run_simulation(const RunConfig& cfg, DiagSink* sink) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Integrator integ(cfg.grid, cfg.model, cfg.scheme, cfg.dt, cfg.solver);
  const Field rho0 = build_initial(cfg.grid, cfg.initial.rho);
  const Field c0 = build_initial(cfg.grid, cfg.initial.c);
  integ.initialize(rho0, c0);

  // Snapshot steps, ordered; index is the position in snapshot_times.
  std::map<long, std::vector<int>> snaps;
  for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i)
    snaps[std::llround(cfg.snapshot_times[i] / cfg.dt)].push_back(
        static_cast<int>(i));

  RunOutcome out;
  out.agg.min_rho = min_value(rho0);
  out.agg.max_rho = max_value(rho0);
  out.agg.steps = cfg.steps();

  auto emit = [&](long step_index) {
    if (!sink) return;
    auto it = snaps.find(step_index);
    if (it == snaps.end()) return;
    const SchemeState& s = integ.state();
    for (int idx : it->second) {
      sink->on_snapshot(s.rho[0], s.t, "rho", idx);
      sink->on_snapshot(s.c[0], s.t, "c", idx);
    }
  };

  emit(0);
  for (long n = 1; n <= out.agg.steps; ++n) {
    const StepInfo info = integ.step();
    const DiagRow row = record(integ.state(), info);
    out.agg.max_abs_mass_drift =
        std::max(out.agg.max_abs_mass_drift, std::abs(row.mass_rel_drift));
    out.agg.min_rho = std::min(out.agg.min_rho, row.min_rho);
    out.agg.max_rho = std::max(out.agg.max_rho, row.max_rho);
    out.agg.max_lambda_linf =
        std::max(out.agg.max_lambda_linf, row.lambda_linf);
    out.agg.max_abs_law_residual =
        std::max(out.agg.max_abs_law_residual, std::abs(row.law_residual));
    out.agg.max_picard_iters =
        std::max(out.agg.max_picard_iters, row.picard_iters);
    out.agg.final_energy = row.energy;
    if (sink) sink->on_row(row);
    emit(n);
  }
  out.rho_final = integ.state().rho[0];
  out.c_final = integ.state().c[0];
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

class FileSink : public DiagSink {
 public:
  explicit FileSink(const std::filesystem::path& dir)
      : dir_(dir), csv_((dir / "diagnostics.csv").string()) {}
  void on_row(const DiagRow& r) override { csv_.add(r); }
  void on_snapshot(const Field& f, double time, const std::string& name,
                   int index) override {
    char base[64];
    std::snprintf(base, sizeof(base), "%s_%04d", name.c_str(), index);
    write_snapshot(dir_ / base, f, time, name);
  }
  void close() { csv_.close(); }

 private:
  std::filesystem::path dir_;
  CsvWriter csv_;
};

/// Validates, creates <output_dir>/<name>/, runs, and writes diagnostics,
/// snapshots, an echo of the configuration, and summary.json.
inline RunOutcome run_to_files(const RunConfig& cfg) {
  cfg.validate();  // before touching the filesystem
  const std::filesystem::path dir =
      std::filesystem::path(cfg.output_dir) / cfg.name;
  std::filesystem::create_directories(dir);
  FileSink sink(dir);
  RunOutcome out = run_simulation(cfg, &sink);
  sink.close();

  {
    std::ofstream f(dir / "config.json");
    f << config_to_json(cfg).dump(2) << "\n";
  }
  nlohmann::json summary;
  summary["scheme"] = scheme_to_string(cfg.scheme);
  summary["steps"] = out.agg.steps;
  summary["wall_time_seconds"] = out.wall_seconds;
  summary["invariants"] = {
      {"max_abs_mass_rel_drift", out.agg.max_abs_mass_drift},
      {"min_rho", out.agg.min_rho},
      {"max_rho", out.agg.max_rho},
      {"max_lambda_linf", out.agg.max_lambda_linf},
      {"max_abs_law_residual", out.agg.max_abs_law_residual},
      {"max_picard_iters", out.agg.max_picard_iters},
      {"final_energy", out.agg.final_energy}};
  std::ofstream f(dir / "summary.json");
  f << summary.dump(2) << "\n";
  return out;
}

struct ConvergePoint {
  double dt = 0.0;
  double err_rho = 0.0;
  double err_c = 0.0;
};

struct ConvergeResult {
  std::vector<ConvergePoint> points;  // sorted by decreasing dt
  double slope_rho = 0.0;
  double slope_c = 0.0;
  double dt_ref = 0.0;
};

inline int sweep_thread_cap() {
  if (const char* env = std::getenv("KSKIT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

/// Reference scheme for a refinement study: the second-order member of the
/// same family.
inline SchemeSpec reference_scheme(const SchemeSpec& s) {
  switch (s.kind) {
    case SchemeKind::cn_pos:
    case SchemeKind::bdf_pos:
      return {SchemeKind::bdf_pos, 2};
    case SchemeKind::cn_bound:
    case SchemeKind::bdf_bound:
      return {SchemeKind::bdf_bound, 2};
    case SchemeKind::semi_implicit:
      return {SchemeKind::semi_implicit, 2};
  }
  return s;
}

/// Runs the template config at each dt in dts plus a fine-step reference,
/// measures final-time sup-norm errors against the reference, and fits
/// slopes. Members run in parallel (capped by KSKIT_THREADS).
inline ConvergeResult converge(const RunConfig& base,
                               std::vector<double> dts, double dt_ref) {
  if (dts.size() < 3)
    throw config_error("converge: need at least 3 dt points");
  std::sort(dts.begin(), dts.end(), std::greater<>());
  if (!(dt_ref > 0.0) || dt_ref >= dts.back())
    throw config_error("converge: dt_ref must be smaller than every dt");

  std::vector<RunConfig> members;
  for (double dt : dts) {
    RunConfig cfg = base;
    cfg.dt = dt;
    cfg.snapshot_times.clear();
    cfg.validate();
    members.push_back(cfg);
  }
  RunConfig ref = base;
  ref.dt = dt_ref;
  ref.scheme = reference_scheme(base.scheme);
  ref.snapshot_times.clear();
  ref.validate();
  members.push_back(ref);

  std::vector<RunOutcome> outcomes(members.size());
  std::vector<std::exception_ptr> errors(members.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= members.size()) return;
      try {
        outcomes[i] = run_simulation(members[i], nullptr);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int cap = std::min<int>(sweep_thread_cap(),
                                static_cast<int>(members.size()));
  std::vector<std::thread> pool;
  for (int i = 0; i < cap; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const RunOutcome& r = outcomes.back();
  ConvergeResult res;
  res.dt_ref = dt_ref;
  std::vector<double> xs, er, ec;
  for (std::size_t i = 0; i + 1 < members.size(); ++i) {
    ConvergePoint p{members[i].dt,
                    linf_error(outcomes[i].rho_final, r.rho_final),
                    linf_error(outcomes[i].c_final, r.c_final)};
    res.points.push_back(p);
    xs.push_back(p.dt);
    er.push_back(p.err_rho);
    ec.push_back(p.err_c);
  }
  res.slope_rho = fit_order(xs, er);
  res.slope_c = fit_order(xs, ec);
  return res;
}

/// Writes convergence.csv and converge_summary.json under
/// <output_dir>/<name>_converge/.
inline std::filesystem::path write_converge_files(const RunConfig& base,
                                                  const ConvergeResult& res) {
  const std::filesystem::path dir =
      std::filesystem::path(base.output_dir) / (base.name + "_converge");
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "convergence.csv");
    csv << "dt,linf_rho,linf_c\n";
    char buf[160];
    for (const ConvergePoint& p : res.points) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", p.dt, p.err_rho,
                    p.err_c);
      csv << buf << "\n";
    }
  }
  nlohmann::json j;
  j["scheme"] = scheme_to_string(base.scheme);
  j["dt_ref"] = res.dt_ref;
  j["slope_rho"] = res.slope_rho;
  j["slope_c"] = res.slope_c;
  std::ofstream f(dir / "converge_summary.json");
  f << j.dump(2) << "\n";
  return dir;
}

}  // namespace kskit
