#include <CLI11.hpp>
#include <algorithm>
#include <iostream>

#include "gflow/io.hpp"
#include "gflow/verify.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string scenario;
  std::string out_dir;
  std::string freeze_mode;
  std::string zeta_variant;
  int grid = 0;
  int stride = 0;
  int levels = 3;
  double dt = 0.0;
  double t_end = 0.0;
  bool no_transport = false;
  bool has_dt = false, has_t_end = false;
};

gflow::RunConfig make_run_config(const CliOptions& o) {
  gflow::Json j = o.config_path.empty() ? gflow::Json::object() : gflow::load_json_file(o.config_path);
  if (!o.scenario.empty()) j["scenario"] = o.scenario;
  gflow::RunConfig rc = gflow::parse_run_config(j);
  if (o.has_dt) rc.dt = o.dt;
  if (o.has_t_end) rc.t_end = o.t_end;
  if (!o.out_dir.empty()) rc.out_dir = o.out_dir;
  if (o.stride > 0) rc.stride = o.stride;
  if (!o.freeze_mode.empty()) rc.freeze_mode = o.freeze_mode;
  if (!o.zeta_variant.empty()) rc.zeta_variant = o.zeta_variant;
  if (o.no_transport) rc.transport = false;
  if (o.grid > 0) {
    rc.params["nodes"] = o.grid;
    rc.params["transverse"] = o.grid;
    rc.params["tangential"] = std::max(4, o.grid / 2);
  }
  return rc;
}

void add_common(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--scenario", o.scenario, "scenario name (overrides config)");
  cmd->add_option("--grid", o.grid, "grid scale (nodes / transverse size)");
  cmd->add_option("--dt", o.dt, "time step")->each([&](const std::string&) { o.has_dt = true; });
  cmd->add_option("--t-end", o.t_end, "final time")->each([&](const std::string&) {
    o.has_t_end = true;
  });
  cmd->add_option("--freeze-mode", o.freeze_mode, "paper | lagged");
  cmd->add_option("--zeta-variant", o.zeta_variant, "derived | verbatim");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ricci-DeTurck flow on a band chart: quasilinear parabolic solver and verification"};
  app.require_subcommand(1);
  CliOptions o;

  CLI::App* run = app.add_subcommand("run", "evolve a scenario and write snapshots/diagnostics");
  add_common(run, o);
  run->add_option("--out", o.out_dir, "output directory");
  run->add_option("--stride", o.stride, "snapshot stride");
  run->add_flag("--no-transport", o.no_transport, "skip the DeTurck pullback post-processing");

  CLI::App* verify = app.add_subcommand("verify", "run the acceptance criteria covering a scenario");
  add_common(verify, o);

  CLI::App* conv = app.add_subcommand("convergence", "refinement study with fitted orders");
  add_common(conv, o);
  conv->add_option("--levels", o.levels, "number of refinement levels");

  app.add_subcommand("list-scenarios", "print registered scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? 0 : 30;
  }

  try {
    if (app.got_subcommand("list-scenarios")) return gflow::cmd_list_scenarios();
    if (app.got_subcommand("run")) return gflow::cmd_run(make_run_config(o));
    if (app.got_subcommand("verify")) return gflow::cmd_verify(make_run_config(o));
    if (app.got_subcommand("convergence")) return gflow::cmd_convergence(make_run_config(o), o.levels);
  } catch (const gflow::Error& e) {
    std::cerr << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
