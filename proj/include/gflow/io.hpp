#pragma once

#include <optional>
#include <string>

#include "gflow/scenarios.hpp"
#include "gflow/transport.hpp"

namespace gflow {

struct RunConfig {
  std::string scenario;
  Json params = Json::object();
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::string> freeze_mode;   // "paper" | "lagged"
  std::optional<std::string> zeta_variant;  // "derived" | "verbatim"
  std::string out_dir;                      // empty: no files written
  int stride = 1;
  bool transport = true;  // DeTurck pullback post-processing for RDT runs
};

Json load_json_file(const std::string& path);
RunConfig parse_run_config(const Json& j);
SolverConfig solver_config_for(const RunConfig& rc, const Scenario& sc);

// Snapshot documents round-trip bit-identically: numeric payloads are written
// as decimals with 17 significant digits.
void write_snapshot(const std::string& path, const std::string& scenario, const ChartGrid& grid,
                    double time, const std::vector<std::pair<std::string, const Field*>>& fields);
Json read_snapshot(const std::string& path);
Field snapshot_field(const Json& snap, const std::string& name);

struct TransportResult {
  DiffeoTrace psi;
  PullbackTrace pullback;
  std::vector<double> ricci_residual;
  std::vector<double> mean_curv_err;
  std::vector<double> pullback_ii_err;
  std::vector<double> convexity_min;
};

TransportResult run_transport(const Scenario& sc, const FlowTrace& trace);

void write_diagnostics_csv(const std::string& path, const FlowTrace& trace,
                           const TransportResult* transport);

// Executes a scenario pipeline end to end; returns the process exit code and
// prints the error name on failure.
int cmd_run(const RunConfig& rc);
int cmd_list_scenarios();

std::string format_double(double v);  // %.17g

}  // namespace gflow
