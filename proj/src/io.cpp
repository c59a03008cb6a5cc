#include "gflow/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace gflow {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed JSON in '" + path + "'");
  return j;
}

RunConfig parse_run_config(const Json& j) {
  if (!j.is_object() || !j.contains("scenario") || !j["scenario"].is_string())
    throw ConfigError("config must be an object with a 'scenario' string");
  RunConfig rc;
  rc.scenario = j["scenario"].get<std::string>();
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError("'params' must be an object");
    rc.params = j["params"];
  }
  if (j.contains("dt")) rc.dt = j["dt"].get<double>();
  if (j.contains("t_end")) rc.t_end = j["t_end"].get<double>();
  if (j.contains("freeze_mode")) rc.freeze_mode = j["freeze_mode"].get<std::string>();
  if (j.contains("zeta_variant")) rc.zeta_variant = j["zeta_variant"].get<std::string>();
  if (j.contains("out_dir")) rc.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("stride")) rc.stride = j["stride"].get<int>();
  if (j.contains("transport")) rc.transport = j["transport"].get<bool>();
  if (rc.stride < 1) throw ConfigError("stride must be >= 1");
  return rc;
}

SolverConfig solver_config_for(const RunConfig& rc, const Scenario& sc) {
  SolverConfig cfg = sc.default_config;
  if (rc.dt) cfg.dt = *rc.dt;
  if (rc.t_end) cfg.t_end = *rc.t_end;
  if (rc.freeze_mode) {
    if (*rc.freeze_mode == "paper")
      cfg.freeze_mode = FreezeMode::paper;
    else if (*rc.freeze_mode == "lagged")
      cfg.freeze_mode = FreezeMode::lagged;
    else
      throw ConfigError("freeze_mode must be 'paper' or 'lagged'");
  }
  cfg.validate();
  return cfg;
}

void write_snapshot(const std::string& path, const std::string& scenario, const ChartGrid& grid,
                    double time, const std::vector<std::pair<std::string, const Field*>>& fields) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write snapshot '" + path + "'");
  out << "{\n";
  out << "  \"schema_version\": 1,\n";
  out << "  \"scenario\": \"" << scenario << "\",\n";
  out << "  \"time\": " << format_double(time) << ",\n";
  out << "  \"grid\": {\"n\": " << grid.dim() << ", \"sizes\": [";
  for (int a = 0; a < grid.dim(); ++a) out << (a ? ", " : "") << grid.size(a);
  out << "], \"transverse_axis\": " << grid.transverse_axis() << ", \"spacings\": [";
  for (int a = 0; a < grid.dim(); ++a) out << (a ? ", " : "") << format_double(grid.spacing(a));
  out << "]},\n";
  out << "  \"fields\": {";
  bool first_field = true;
  for (const auto& [name, f] : fields) {
    out << (first_field ? "\n" : ",\n");
    first_field = false;
    out << "    \"" << name << "\": {\"ncomp\": " << f->ncomp() << ", \"data\": [";
    const auto& d = f->data();
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (k) out << ", ";
      out << format_double(d[k]);
    }
    out << "]}";
  }
  out << "\n  }\n}\n";
}

Json read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open snapshot '" + path + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed snapshot '" + path + "'");
  return j;
}

Field snapshot_field(const Json& snap, const std::string& name) {
  const auto& grid_j = snap.at("grid");
  std::vector<int> sizes = grid_j.at("sizes").get<std::vector<int>>();
  GridPtr grid = make_grid(sizes, grid_j.at("transverse_axis").get<int>());
  const auto& fj = snap.at("fields").at(name);
  Field f(grid, fj.at("ncomp").get<int>());
  const auto& data = fj.at("data");
  if (data.size() != f.data().size()) throw ConfigError("snapshot field size mismatch");
  for (std::size_t k = 0; k < f.data().size(); ++k) f.data()[k] = data[k].get<double>();
  return f;
}

TransportResult run_transport(const Scenario& sc, const FlowTrace& trace) {
  if (!sc.rdt) throw ConfigError("transport requires a Ricci-DeTurck scenario");
  TransportResult tr;
  const std::vector<VectorField> p_trace = deturck_vector_trace(trace, sc.rdt->ghat);
  tr.psi = integrate_diffeo(p_trace, trace.times, trace.grid);
  tr.pullback = pullback_trace(trace, tr.psi);
  tr.ricci_residual = ricci_flow_residual(tr.pullback);
  if (sc.rdt->mode == RdtMode::mean_curvature)
    tr.mean_curv_err = mean_curvature_check(tr.pullback, sc.rdt->mu, sc.rdt->H0_mean);
  tr.pullback_ii_err = boundary_pullback_check(tr.pullback, tr.psi, sc.rdt->II_hat);
  tr.convexity_min = convexity_monitor(tr.pullback);
  return tr;
}

void write_diagnostics_csv(const std::string& path, const FlowTrace& trace,
                           const TransportResult* transport) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write diagnostics '" + path + "'");
  out << "t,picard_iters,lin_residual,stability_ratio,bc_dirichlet_res,bc_neumann_res,"
         "p_tangency_res,spd_margin,min_II_eig_lower,min_II_eig_upper,mean_curv_err,ricci_residual\n";
  for (std::size_t s = 0; s < trace.steps(); ++s) {
    const StepDiagnostics& d = trace.diag[s];
    double ricci_res = std::numeric_limits<double>::quiet_NaN();
    if (transport && s < transport->ricci_residual.size()) ricci_res = transport->ricci_residual[s];
    out << format_double(d.t) << ',' << d.picard_iters << ',' << format_double(d.lin_residual)
        << ',' << format_double(d.stability_ratio) << ',' << format_double(d.bc_dirichlet_res)
        << ',' << format_double(d.bc_neumann_res) << ',' << format_double(d.p_tangency_res) << ','
        << format_double(d.spd_margin) << ',' << format_double(d.min_II_eig_lower) << ','
        << format_double(d.min_II_eig_upper) << ',' << format_double(d.mean_curv_err) << ','
        << format_double(ricci_res) << '\n';
  }
}

int cmd_run(const RunConfig& rc) {
  try {
    Json params = rc.params;
    if (rc.zeta_variant) params["zeta_variant"] = *rc.zeta_variant;
    Scenario sc = build_scenario(rc.scenario, params);
    const SolverConfig cfg = solver_config_for(rc, sc);

    FlowTrace trace;
    if (sc.is_rdt()) {
      RdtProblem prob{sc.spec, sc.rdt};
      trace = evolve_rdt(prob, cfg).trace;
    } else {
      trace = evolve(sc.spec, cfg);
    }

    std::optional<TransportResult> transport;
    if (trace.ok() && sc.is_rdt() && rc.transport) transport = run_transport(sc, trace);

    if (!rc.out_dir.empty()) {
      std::filesystem::create_directories(rc.out_dir);
      for (std::size_t s = 0; s < trace.steps(); ++s) {
        if (s % static_cast<std::size_t>(rc.stride) != 0 && s + 1 != trace.steps()) continue;
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%06zu.json", s);
        const Field& u = trace.fields[s];
        write_snapshot((std::filesystem::path(rc.out_dir) / name).string(), rc.scenario,
                       *trace.grid, trace.times[s], {{"u", &u}});
      }
      write_diagnostics_csv((std::filesystem::path(rc.out_dir) / "diagnostics.csv").string(), trace,
                            transport ? &*transport : nullptr);
    }

    if (!trace.ok()) {
      std::cerr << trace.failure->message << "\n";
      return static_cast<int>(trace.failure->code);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_list_scenarios() {
  for (const auto& n : scenario_names()) std::cout << n << "\n";
  return 0;
}

}  // namespace gflow
