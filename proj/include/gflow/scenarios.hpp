#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gflow/parabolic.hpp"
#include "gflow/ricci_deturck.hpp"

namespace gflow {

using Json = nlohmann::json;

using ReferenceSolution = std::function<void(double t, std::size_t node, std::span<double> out)>;

struct Scenario {
  std::string name;
  GridPtr grid;
  ProblemSpec spec;
  std::shared_ptr<const RdtContext> rdt;  // null for plain parabolic scenarios
  ReferenceSolution reference;            // optional exact section
  double expected_space_order = 2.0;
  double expected_time_order = 1.0;
  double compat_dirichlet = 0.0;
  double compat_neumann = 0.0;
  double c1 = 0.0;
  SolverConfig default_config;

  bool is_rdt() const { return rdt != nullptr; }
};

std::vector<std::string> scenario_names();

// Assembles a registered scenario; every clean build passes the parabolicity
// and compatibility checks at construction. Throws UnknownScenario.
Scenario build_scenario(const std::string& name, const Json& params = Json::object());

// Closed-form solution data for the method of manufactured solutions.
struct ManufacturedSolution {
  int d = 1;
  std::function<void(std::span<const double> x, double t, std::span<double> out)> value;
  std::function<void(std::span<const double> x, double t, std::span<double> out)> time_derivative;
  std::function<void(std::span<const double> x, double t, std::span<double> out)> gradient;  // (j,m)
  std::function<void(std::span<const double> x, double t, std::span<double> out)> hessian;   // (i,j,m)
};

SectionField sample_manufactured(const ManufacturedSolution& ms, GridPtr grid, double t);

// F gains dt(u*) - H^{ij}(u*) hess_{ij}(u*); Psi becomes the discrete conormal
// flux of the sampled u*, so the compatibility residual vanishes by
// construction. Requires the trivial chart background and Pr_W u* = 0 on the
// faces. Throws ManufactureInconsistent.
ProblemSpec manufacture(const ManufacturedSolution& ms, const ProblemSpec& skeleton);

// sup error of the final stored step against the scenario reference.
double final_time_error(const Scenario& sc, const FlowTrace& trace);
// max over all stored steps.
double max_trace_error(const Scenario& sc, const FlowTrace& trace);

double fit_order(std::span<const double> h, std::span<const double> err);

}  // namespace gflow
