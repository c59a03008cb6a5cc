#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gflow/fields.hpp"
#include "gflow/subbundle.hpp"
#include "gflow/tensor_calculus.hpp"

namespace gflow {

// Connection data of the bundle E over the chart and the background conormal
// normalization at the faces. Empty members mean the flat chart background
// with the trivial fiber connection.
struct BundleGeometry {
  std::shared_ptr<const ChristoffelField> base_gamma;  // Gamma^k_{ij} of the base metric
  std::vector<Field> fiber_conn;        // per axis j: d x d matrix field A_j, (nabla_j u)^m = d_j u^m + A_j^{mp} u^p
  std::vector<Field> fiber_conn_grad;   // d_i A_j at flat index i*n + j
  std::array<std::vector<double>, 2> conormal_scale;  // per face node: |dx_n|^{-1} in the background metric

  bool trivial() const { return !base_gamma && fiber_conn.empty(); }
  double conormal(Face f, std::size_t face_k) const {
    const auto& v = conormal_scale[static_cast<int>(f)];
    return v.empty() ? 1.0 : v[face_k];
  }
};

// Fiber connection of E = Sym^2 T*M induced by base Christoffel symbols,
// together with the background conormal normalization of ghat.
BundleGeometry make_sym2_geometry(const MetricField& ghat,
                                  std::shared_ptr<const ChristoffelField> gamma_hat);

using HCallback =
    std::function<void(std::span<const double> eta, double t, std::size_t node, std::span<double> h_sym)>;
using FFieldCallback =
    std::function<void(const SectionField& w, const Field& grad_w, double t, SectionField& out)>;
using FPointCallback = std::function<void(std::span<const double> eta, std::span<const double> theta,
                                          double t, std::size_t node, std::span<double> out)>;
using PsiCallback = std::function<void(std::span<const double> eta, double t, std::size_t node, Face face,
                                       std::span<double> out)>;
using AdmissiblePredicate = std::function<bool(std::span<const double> eta, std::size_t node)>;

FFieldCallback wrap_pointwise_f(int d, FPointCallback f);

// Complete data of the initial-boundary value problem: principal coefficients
// H, right-hand side F, boundary map Psi, the Dirichlet/Neumann splitting, the
// initial section, and the admissible set of fiber values.
struct ProblemSpec {
  GridPtr grid;
  int d = 1;
  SubbundleSplit split;
  HCallback H;
  FFieldCallback F;       // null means zero
  PsiCallback Psi;        // null means zero
  SectionField u0;
  AdmissiblePredicate admissible;  // null means "all finite entries"
  BundleGeometry geometry;
  double compat_threshold = 1e-8;

  bool is_admissible(std::span<const double> eta, std::size_t node) const {
    if (admissible) return admissible(eta, node);
    for (double v : eta)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

enum class FreezeMode { paper, lagged };

struct SolverConfig {
  double dt = 1e-4;
  double t_end = 1e-2;
  double picard_tol = 1e-10;
  int picard_max = 50;
  double lin_tol = 1e-12;
  FreezeMode freeze_mode = FreezeMode::lagged;

  void validate() const {
    if (dt <= 0 || t_end <= 0) throw ConfigError("dt and t_end must be positive");
    if (picard_tol <= 0 || lin_tol <= 0) throw ConfigError("tolerances must be positive");
    if (picard_max < 1) throw ConfigError("picard_max must be >= 1");
  }
};

// Data of one frozen-coefficient implicit step.
struct LinearProblem {
  GridPtr grid;
  int d = 1;
  Sym2Field K;                      // frozen principal coefficients, (2,0) symmetric
  SectionField G;                   // interior right-hand side
  std::array<FaceField, 2> p;       // Neumann data per face, W-block zero
  const SubbundleSplit* split = nullptr;
  const BundleGeometry* geometry = nullptr;
};

// Field of H evaluated along a section.
Sym2Field eval_h_field(const ProblemSpec& spec, const SectionField& w, double t);

}  // namespace gflow
