// kskit command-line tool.
//
//   kskit run        --preset NAME | --config PATH  [overrides]
//   kskit converge   --preset NAME | --config PATH  --dts a,b,c --dt-ref r
//   kskit preset-list
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure.
// KSKIT_THREADS caps the refinement-sweep parallelism.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kskit/config.hpp"
#include "kskit/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset_name;
  kskit::Overrides overrides;
  std::string scheme, out;
  double dt = 0.0, tfinal = 0.0;
  int nx = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "JSON configuration file");
  cmd->add_option("--preset", a.preset_name, "built-in preset name");
  cmd->add_option("--scheme", a.scheme,
                  "scheme: cn_pos, bdf_pos(k), cn_bound, bdf_bound(k), "
                  "semi_implicit");
  cmd->add_option("--dt", a.dt, "time step");
  cmd->add_option("--tfinal", a.tfinal, "final time");
  cmd->add_option("--nx", a.nx, "grid size (sets nx = ny)");
  cmd->add_option("--out", a.out, "output directory");
}

std::vector<kskit::RunConfig> resolve_configs(const CommonArgs& a) {
  if (a.config_path.empty() == a.preset_name.empty())
    throw kskit::config_error("exactly one of --config or --preset is required");
  std::vector<kskit::RunConfig> cfgs;
  if (!a.preset_name.empty())
    cfgs = kskit::preset(a.preset_name);
  else
    cfgs = {kskit::load_config(a.config_path)};
  kskit::Overrides o;
  if (!a.scheme.empty()) o.scheme = a.scheme;
  if (a.dt > 0.0) o.dt = a.dt;
  if (a.tfinal > 0.0) o.t_final = a.tfinal;
  if (a.nx > 0) o.nx = a.nx;
  if (!a.out.empty()) o.out = a.out;
  for (kskit::RunConfig& cfg : cfgs) {
    kskit::apply_overrides(cfg, o);
    cfg.validate();
  }
  return cfgs;
}

std::vector<double> parse_dt_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    try {
      out.push_back(std::stod(s.substr(pos, comma - pos)));
    } catch (const std::exception&) {
      throw kskit::config_error("converge: bad dt list entry '" +
                                s.substr(pos, comma - pos) + "'");
    }
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving spectral solver for chemotaxis systems"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "run one configuration");
  add_common(run_cmd, run_args);

  CommonArgs conv_args;
  std::string dts_arg;
  double dt_ref = 0.0;
  CLI::App* conv_cmd =
      app.add_subcommand("converge", "time-step refinement study");
  add_common(conv_cmd, conv_args);
  conv_cmd->add_option("--dts", dts_arg, "comma-separated dt list (>= 3)")
      ->required();
  conv_cmd->add_option("--dt-ref", dt_ref, "reference time step")->required();

  CLI::App* list_cmd =
      app.add_subcommand("preset-list", "list built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints usage; 0 for --help
    return code == 0 ? 0 : 2;
  }

  try {
    if (list_cmd->parsed()) {
      for (const std::string& name : kskit::preset_names())
        std::printf("%-18s %s\n", name.c_str(),
                    kskit::preset_description(name).c_str());
      return 0;
    }
    if (run_cmd->parsed()) {
      for (const kskit::RunConfig& cfg : resolve_configs(run_args)) {
        const kskit::RunOutcome out = kskit::run_to_files(cfg);
        std::printf(
            "%s: %ld steps, rho in [%.6g, %.6g], |mass drift| <= %.3g, "
            "|law residual| <= %.3g, %.2fs\n",
            cfg.name.c_str(), out.agg.steps, out.agg.min_rho, out.agg.max_rho,
            out.agg.max_abs_mass_drift, out.agg.max_abs_law_residual,
            out.wall_seconds);
      }
      return 0;
    }
    // converge
    const std::vector<kskit::RunConfig> cfgs = resolve_configs(conv_args);
    const kskit::RunConfig& base = cfgs.front();
    const kskit::ConvergeResult res =
        kskit::converge(base, parse_dt_list(dts_arg), dt_ref);
    const auto dir = kskit::write_converge_files(base, res);
    for (const kskit::ConvergePoint& p : res.points)
      std::printf("dt=%.3e  linf_rho=%.6e  linf_c=%.6e\n", p.dt, p.err_rho,
                  p.err_c);
    std::printf("slope_rho=%.3f  slope_c=%.3f  (written to %s)\n",
                res.slope_rho, res.slope_c, dir.string().c_str());
    return 0;
  } catch (const kskit::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  }
}
