#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace gflow {

inline std::string num_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Exit-code bands used by the CLI: 10-19 solver, 20-29 geometry, 30-39 config.
enum class ErrorCode : int {
  no_contraction = 11,
  not_parabolic = 12,
  incompatible_data = 13,
  linear_solve_failure = 14,
  left_admissible_set = 15,
  not_positive_definite = 20,
  boundary_escape = 21,
  jacobian_degenerate = 22,
  adapted_chart_violation = 23,
  config_error = 30,
  unknown_scenario = 31,
  manufacture_inconsistent = 32,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), code_(code), name_(std::move(name)) {}

  int exit_code() const { return static_cast<int>(code_); }
  ErrorCode code() const { return code_; }
  const std::string& name() const { return name_; }

private:
  ErrorCode code_;
  std::string name_;
};

struct NotParabolic : Error {
  NotParabolic(std::size_t node, double t, double min_eig)
      : Error(ErrorCode::not_parabolic, "NotParabolic",
              "principal symbol has eigenvalue " + num_str(min_eig) + " <= 0 at node " +
                  std::to_string(node) + ", t = " + std::to_string(t)) {}
};

struct NoContraction : Error {
  NoContraction(double t, int iters, double residual)
      : Error(ErrorCode::no_contraction, "NoContraction",
              "Picard iteration did not reach tolerance at t = " + std::to_string(t) + " after " +
                  std::to_string(iters) + " iterates (residual " + num_str(residual) + ")") {}
};

struct IncompatibleData : Error {
  IncompatibleData(double dirichlet_res, double neumann_res, double threshold)
      : Error(ErrorCode::incompatible_data, "IncompatibleData",
              "initial data violates the boundary conditions: dirichlet residual " +
                  num_str(dirichlet_res) + ", neumann residual " + num_str(neumann_res) +
                  ", threshold " + num_str(threshold)) {}
};

struct LinearSolveFailure : Error {
  explicit LinearSolveFailure(const std::string& what)
      : Error(ErrorCode::linear_solve_failure, "LinearSolveFailure", what) {}
};

struct LeftAdmissibleSet : Error {
  LeftAdmissibleSet(std::size_t node, double t)
      : Error(ErrorCode::left_admissible_set, "LeftAdmissibleSet",
              "iterate exited the admissible set at node " + std::to_string(node) +
                  ", t = " + std::to_string(t)) {}
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(std::size_t node)
      : Error(ErrorCode::not_positive_definite, "NotPositiveDefinite",
              "tensor is not positive-definite at node " + std::to_string(node)) {}
};

struct BoundaryEscape : Error {
  BoundaryEscape(std::size_t node, double t, double overshoot)
      : Error(ErrorCode::boundary_escape, "BoundaryEscape",
              "trajectory left the chart at node " + std::to_string(node) + ", t = " +
                  std::to_string(t) + " (overshoot " + num_str(overshoot) + ")") {}
};

struct JacobianDegenerate : Error {
  JacobianDegenerate(std::size_t node, double t, double det)
      : Error(ErrorCode::jacobian_degenerate, "JacobianDegenerate",
              "det Dpsi = " + num_str(det) + " <= 0 at node " + std::to_string(node) +
                  ", t = " + std::to_string(t)) {}
};

struct AdaptedChartViolation : Error {
  AdaptedChartViolation(std::size_t node, double value)
      : Error(ErrorCode::adapted_chart_violation, "AdaptedChartViolation",
              "mixed metric component " + num_str(value) + " nonzero at face node " +
                  std::to_string(node)) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCode::config_error, "ConfigError", what) {}
};

struct UnknownScenario : Error {
  explicit UnknownScenario(const std::string& name)
      : Error(ErrorCode::unknown_scenario, "UnknownScenario", "no scenario named '" + name + "'") {}
};

struct ManufactureInconsistent : Error {
  explicit ManufactureInconsistent(const std::string& what)
      : Error(ErrorCode::manufacture_inconsistent, "ManufactureInconsistent", what) {}
};

}  // namespace gflow
