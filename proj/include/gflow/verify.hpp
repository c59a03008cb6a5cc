#pragma once

#include <span>
#include <string>
#include <vector>

#include "gflow/io.hpp"

namespace gflow {

struct CriterionResult {
  std::string id;
  bool pass = false;
  std::string detail;
};

std::vector<std::string> all_criteria();
std::vector<std::string> criteria_for_scenario(const std::string& scenario);

// Runs the named acceptance criteria at their pinned scales and tolerances.
std::vector<CriterionResult> run_criteria(std::span<const std::string> ids);

// Convergence studies shared by cmd_convergence and criterion A7.
struct ConvergenceStudy {
  std::string name;
  std::vector<double> h;
  std::vector<double> dt;
  std::vector<double> error;
  double order = 0.0;
};

ConvergenceStudy heat_spatial_study(int levels);
ConvergenceStudy heat_temporal_study(int levels);
ConvergenceStudy s3_ricci_residual_study(int levels);

int cmd_verify(const RunConfig& rc);
int cmd_convergence(const RunConfig& rc, int levels);

}  // namespace gflow
