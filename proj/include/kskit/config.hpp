#pragma once

// Run configuration: JSON schema, validation, scheme-name parsing, and the
// built-in presets. Command-line flags override individual fields after the
// config is loaded. Invalid configurations raise config_error before any
// output file is created.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kskit/common.hpp"
#include "kskit/grid.hpp"
#include "kskit/integrators.hpp"
#include "kskit/models.hpp"

namespace kskit {

struct RunConfig {
  std::string name = "run";
  SchemeSpec scheme{SchemeKind::bdf_pos, 2};
  ModelParams model;
  Grid grid = Grid::periodic(64, 64, 2.0 * pi, 2.0 * pi);
  double dt = 1e-4;
  double t_final = 1e-2;
  InitialCondition initial;
  std::vector<double> snapshot_times;
  std::string output_dir = "out";
  SolverOptions solver;

  void validate() const {
    model.validate();
    if (!(dt > 0.0)) throw config_error("config: dt must be positive");
    if (!(t_final > 0.0)) throw config_error("config: t_final must be positive");
    const double steps = t_final / dt;
    if (std::abs(steps - std::llround(steps)) > 1e-8 * std::max(1.0, steps))
      throw config_error("config: t_final must be an integer multiple of dt");
    if (scheme.is_bdf() && (scheme.order < 1 || scheme.order > 4))
      throw config_error("config: BDF order must be 1..4");
    if (scheme.is_positivity() && model.kind != ModelKind::type1)
      throw config_error("config: positivity schemes require model kind 1");
    if ((scheme.is_bound() || scheme.kind == SchemeKind::semi_implicit) &&
        model.kind != ModelKind::type2)
      throw config_error("config: bounded schemes require model kind 2");
    if (!(solver.picard_tol > 0.0) || solver.picard_max_iters < 1)
      throw config_error("config: invalid solver tolerances");
    for (double ts : snapshot_times) {
      if (ts < 0.0 || ts > t_final + 1e-12)
        throw config_error("config: snapshot time outside [0, t_final]");
      const double k = ts / dt;
      if (std::abs(k - std::llround(k)) > 1e-6 * std::max(1.0, k))
        throw config_error("config: snapshot time not aligned with dt");
    }
  }

  long steps() const { return std::llround(t_final / dt); }
};

inline SchemeSpec scheme_from_string(const std::string& s) {
  auto parse_order = [](const std::string& str, const std::string& head,
                        int& order) {
    if (str.size() == head.size() + 3 && str.compare(0, head.size(), head) == 0 &&
        str[head.size()] == '(' && str.back() == ')') {
      const char d = str[head.size() + 1];
      if (d >= '1' && d <= '4') {
        order = d - '0';
        return true;
      }
    }
    return false;
  };
  int order = 0;
  if (s == "cn_pos") return {SchemeKind::cn_pos, 2};
  if (s == "cn_bound") return {SchemeKind::cn_bound, 2};
  if (s == "semi_implicit") return {SchemeKind::semi_implicit, 2};
  if (parse_order(s, "bdf_pos", order)) return {SchemeKind::bdf_pos, order};
  if (parse_order(s, "bdf_bound", order))
    return {SchemeKind::bdf_bound, order};
  throw config_error(
      "config: unknown scheme '" + s +
      "' (expected cn_pos, bdf_pos(k), cn_bound, bdf_bound(k), semi_implicit)");
}

inline std::string scheme_to_string(const SchemeSpec& s) {
  switch (s.kind) {
    case SchemeKind::cn_pos: return "cn_pos";
    case SchemeKind::cn_bound: return "cn_bound";
    case SchemeKind::semi_implicit: return "semi_implicit";
    case SchemeKind::bdf_pos:
      return "bdf_pos(" + std::to_string(s.order) + ")";
    case SchemeKind::bdf_bound:
      return "bdf_bound(" + std::to_string(s.order) + ")";
  }
  return "?";
}

namespace detail {

inline std::vector<GaussianTerm> parse_terms(const nlohmann::json& j) {
  std::vector<GaussianTerm> out;
  for (const auto& t : j) {
    GaussianTerm g;
    g.amplitude = t.at("amplitude").get<double>();
    g.x0 = t.at("x0").get<double>();
    g.y0 = t.at("y0").get<double>();
    g.inv_width = t.at("inv_width").get<double>();
    out.push_back(g);
  }
  return out;
}

inline nlohmann::json terms_to_json(const std::vector<GaussianTerm>& terms) {
  nlohmann::json out = nlohmann::json::array();
  for (const GaussianTerm& g : terms)
    out.push_back({{"amplitude", g.amplitude},
                   {"x0", g.x0},
                   {"y0", g.y0},
                   {"inv_width", g.inv_width}});
  return out;
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  try {
    RunConfig cfg;
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
    if (j.contains("scheme"))
      cfg.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    if (j.contains("model")) {
      const auto& m = j.at("model");
      if (m.contains("kind")) {
        const std::string k = m.at("kind").get<std::string>();
        if (k == "type1")
          cfg.model.kind = ModelKind::type1;
        else if (k == "type2")
          cfg.model.kind = ModelKind::type2;
        else
          throw config_error("config: model.kind must be type1 or type2");
      }
      if (m.contains("gamma")) cfg.model.gamma = m.at("gamma").get<double>();
      if (m.contains("chi")) cfg.model.chi = m.at("chi").get<double>();
      if (m.contains("mu")) cfg.model.mu = m.at("mu").get<double>();
      if (m.contains("epsilon"))
        cfg.model.epsilon = m.at("epsilon").get<double>();
      if (m.contains("M")) cfg.model.M = m.at("M").get<double>();
      if (m.contains("sigma")) cfg.model.sigma = m.at("sigma").get<double>();
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      const int nx = g.value("nx", 64);
      const int ny = g.value("ny", nx);
      const double lx = g.value("lx", 2.0 * pi);
      const double ly = g.value("ly", lx);
      cfg.grid = Grid::periodic(nx, ny, lx, ly);
    }
    if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
    if (j.contains("t_final")) cfg.t_final = j.at("t_final").get<double>();
    if (j.contains("initial")) {
      const auto& ic = j.at("initial");
      if (ic.contains("rho"))
        cfg.initial.rho = detail::parse_terms(ic.at("rho"));
      if (ic.contains("c")) cfg.initial.c = detail::parse_terms(ic.at("c"));
    }
    if (j.contains("snapshot_times"))
      cfg.snapshot_times = j.at("snapshot_times").get<std::vector<double>>();
    if (j.contains("output_dir"))
      cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      if (s.contains("picard_tol"))
        cfg.solver.picard_tol = s.at("picard_tol").get<double>();
      if (s.contains("picard_max_iters"))
        cfg.solver.picard_max_iters = s.at("picard_max_iters").get<int>();
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: malformed JSON: ") + e.what());
  }
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["scheme"] = scheme_to_string(cfg.scheme);
  j["model"] = {
      {"kind", cfg.model.kind == ModelKind::type1 ? "type1" : "type2"},
      {"gamma", cfg.model.gamma},   {"chi", cfg.model.chi},
      {"mu", cfg.model.mu},         {"epsilon", cfg.model.epsilon},
      {"M", cfg.model.M},           {"sigma", cfg.model.sigma}};
  j["grid"] = {{"nx", cfg.grid.nx},
               {"ny", cfg.grid.ny},
               {"lx", cfg.grid.lx},
               {"ly", cfg.grid.ly}};
  j["dt"] = cfg.dt;
  j["t_final"] = cfg.t_final;
  j["initial"] = {{"rho", detail::terms_to_json(cfg.initial.rho)},
                  {"c", detail::terms_to_json(cfg.initial.c)}};
  j["snapshot_times"] = cfg.snapshot_times;
  j["output_dir"] = cfg.output_dir;
  j["solver"] = {{"picard_tol", cfg.solver.picard_tol},
                 {"picard_max_iters", cfg.solver.picard_max_iters}};
  return j;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: JSON parse failure: ") + e.what());
  }
  return config_from_json(j);
}

/// Built-in experiment presets. "compare" expands to two runs (the
/// bound-preserving scheme and the semi-implicit baseline on the same data).
inline std::vector<std::string> preset_names() {
  return {"convergence_pos", "convergence_bound", "blowup", "compare"};
}

inline std::string preset_description(const std::string& name) {
  if (name == "convergence_pos")
    return "smooth kind-1 run used for the positivity-scheme accuracy study";
  if (name == "convergence_bound")
    return "smooth kind-2 run used for the bound-scheme accuracy study";
  if (name == "blowup")
    return "large-amplitude kind-1 run driving cell aggregation";
  if (name == "compare")
    return "bound-preserving scheme versus the semi-implicit baseline";
  throw config_error("config: unknown preset '" + name + "'");
}

inline std::vector<RunConfig> preset(const std::string& name) {
  const double cx = pi, cy = pi;
  RunConfig cfg;
  if (name == "convergence_pos") {
    cfg.name = name;
    cfg.scheme = {SchemeKind::bdf_pos, 2};
    cfg.model = {ModelKind::type1, 1.0, 2.0, 1.0, 1.0, 0.0, 1e-10};
    cfg.grid = Grid::periodic(64, 64, 2.0 * pi, 2.0 * pi);
    cfg.dt = 1e-4;
    cfg.t_final = 0.2;
    cfg.initial.rho = {{10.0, cx, cy, 10.0}};
    cfg.initial.c = {{10.0, cx, cy, 0.5}};
    cfg.snapshot_times = {0.0, 0.05, 0.2};
    return {cfg};
  }
  if (name == "convergence_bound") {
    cfg.name = name;
    cfg.scheme = {SchemeKind::bdf_bound, 2};
    cfg.model = {ModelKind::type2, 1.0, 1.0, 1.0, 0.01, 100.0, 1e-10};
    cfg.grid = Grid::periodic(64, 64, 2.0 * pi, 2.0 * pi);
    cfg.dt = 1e-4;
    cfg.t_final = 2.0;
    cfg.initial.rho = {{10.0, cx, cy, 10.0}};
    cfg.initial.c = {{30.0, cx, cy, 0.5}};
    cfg.snapshot_times = {0.0, 0.001, 0.1, 2.0};
    return {cfg};
  }
  if (name == "blowup") {
    cfg.name = name;
    cfg.scheme = {SchemeKind::bdf_pos, 2};
    cfg.model = {ModelKind::type1, 1.0, 1.0, 1.0, 0.01, 0.0, 1e-10};
    cfg.grid = Grid::periodic(64, 64, 2.0 * pi, 2.0 * pi);
    cfg.dt = 1e-4;
    cfg.t_final = 0.02;
    cfg.initial.rho = {{80.0, cx, cy, 1.0}};
    cfg.initial.c = {{30.0, cx, cy, 1.0}};
    cfg.snapshot_times = {0.0, 0.005, 0.01, 0.02};
    return {cfg};
  }
  if (name == "compare") {
    cfg.name = "compare_bdf_bound";
    cfg.scheme = {SchemeKind::bdf_bound, 2};
    cfg.model = {ModelKind::type2, 1.0, 2.0, 1.0, 0.01, 100.0, 1e-10};
    cfg.grid = Grid::periodic(128, 128, 2.0 * pi, 2.0 * pi);
    cfg.dt = 1e-4;
    cfg.t_final = 1.0;
    cfg.initial.rho = {{10.0, cx, cy, 0.5}};
    cfg.initial.c = {{30.0, cx, cy, 0.5}};
    cfg.snapshot_times = {0.0, 0.01, 0.1, 0.5, 1.0};
    RunConfig base = cfg;
    base.name = "compare_semi_implicit";
    base.scheme = {SchemeKind::semi_implicit, 2};
    return {cfg, base};
  }
  throw config_error("config: unknown preset '" + name + "'");
}

/// Optional command-line overrides applied on top of a loaded config.
struct Overrides {
  std::optional<std::string> scheme;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<int> nx;
  std::optional<std::string> out;
};

inline void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.scheme) cfg.scheme = scheme_from_string(*o.scheme);
  if (o.dt) cfg.dt = *o.dt;
  if (o.t_final) cfg.t_final = *o.t_final;
  if (o.nx) cfg.grid = Grid::periodic(*o.nx, *o.nx, cfg.grid.lx, cfg.grid.ly);
  if (o.out) cfg.output_dir = *o.out;
}

}  // namespace kskit
