#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gflow/linear_solver.hpp"
#include "gflow/problem.hpp"

namespace gflow {

struct StepDiagnostics {
  double t = 0.0;
  int picard_iters = 0;
  double lin_residual = 0.0;
  double stability_ratio = 0.0;
  double bc_dirichlet_res = 0.0;
  double bc_neumann_res = 0.0;
  std::vector<double> picard_residuals;
  // Filled by geometric monitors where applicable.
  double p_tangency_res = std::numeric_limits<double>::quiet_NaN();
  double spd_margin = std::numeric_limits<double>::quiet_NaN();
  double min_II_eig_lower = std::numeric_limits<double>::quiet_NaN();
  double min_II_eig_upper = std::numeric_limits<double>::quiet_NaN();
  double mean_curv_err = std::numeric_limits<double>::quiet_NaN();
};

struct TraceFailure {
  ErrorCode code;
  std::string name;
  std::string message;
  double t = 0.0;
};

struct FlowTrace {
  GridPtr grid;
  int d = 0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<SectionField> fields;
  std::vector<StepDiagnostics> diag;
  std::optional<TraceFailure> failure;

  bool ok() const { return !failure.has_value(); }
  std::size_t steps() const { return times.size(); }
  const SectionField& back() const { return fields.back(); }
};

// Smallest eigenvalue of H over the sampled sections and times; positive
// return certifies sampled parabolicity. Throws NotParabolic otherwise.
double check_parabolicity(const ProblemSpec& spec, std::span<const SectionField> samples,
                          std::span<const double> times);

// (sup |Pr_W u0| over faces, sup |Pr_Wperp(H(u0,0) nu nabla u0) - Psi(u0,0)|),
// with the solver's discrete covariant operators. Throws IncompatibleData
// beyond the threshold (spec.compat_threshold when threshold < 0).
std::pair<double, double> check_compatibility(const ProblemSpec& spec, double threshold = -1.0);

// The fixed-point map: one frozen-coefficient linear solve around w.
SectionField picard_operator(const ProblemSpec& spec, const SectionField& u_t, const SectionField& w,
                             double t_next, double dt, FreezeMode mode);

using StepMonitor = std::function<void(double t, const SectionField& u, StepDiagnostics& diag)>;

FlowTrace evolve(const ProblemSpec& spec, const SolverConfig& config, const StepMonitor& monitor = {});

// Equivalent problem for the shifted unknown u - u0, whose initial section is zero.
ProblemSpec shift_to_zero_initial(const ProblemSpec& spec);

// Nonlinear boundary-condition residual of a section (diagnostic).
std::pair<double, double> boundary_residuals(const ProblemSpec& spec, const SectionField& u, double t);

}  // namespace gflow
