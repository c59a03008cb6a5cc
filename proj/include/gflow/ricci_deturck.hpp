#pragma once

#include <functional>
#include <memory>

#include "gflow/boundary_geometry.hpp"
#include "gflow/parabolic.hpp"
#include "gflow/problem.hpp"

namespace gflow {

struct RdtState {
  const MetricField& gbar;
  const MetricField& ghat;
  double t = 0.0;
};

enum class RdtMode { mean_curvature, convexity };

// Square-root normalization of the nn boundary component. On the constraint
// surface gbar_{alpha n} = 0 (enforced exactly by the Dirichlet rows) the two
// agree identically; 'derived' keeps the surface-intrinsic lowered-index form,
// 'verbatim' the transcribed one.
enum class ZetaVariant { derived, verbatim };

// Smooth normalization factor with mu(0) = 1.
struct MuFunction {
  std::function<double(double)> f;
  double operator()(double t) const { return f ? f(t) : 1.0; }
  static MuFunction one() { return {[](double) { return 1.0; }}; }
};

// P_i = gbar_{ij} gbar^{kl} (Gamma(gbar)^j_{kl} - Gamma(ghat)^j_{kl}).
CovectorField deturck_covector(const MetricField& gbar, const MetricField& ghat);
CovectorField deturck_covector(const MetricField& gbar, const ChristoffelField& gamma_bar,
                               const ChristoffelField& gamma_hat);

// Q_{ij} = (nabla_i P)_j + (nabla_j P)_i with the Levi-Civita connection of gbar.
Sym2Field deturck_correction(const MetricField& gbar, const ChristoffelField& gamma_bar,
                             const CovectorField& P);
Sym2Field deturck_correction(const MetricField& gbar, const CovectorField& P);

// -2 Ric(gbar) + Q(gbar).
Sym2Field rdt_rhs_direct(const RdtState& s);

// gbar^{ij} nabla(ghat)_i nabla(ghat)_j gbar + R(gbar, nabla gbar), with the
// lower-order map realized by subtraction from the direct form.
Sym2Field rdt_rhs_parabolic(const RdtState& s);

// Boundary maps of the two flow modes, packed as full symmetric fiber values
// with vanishing mixed components; transcribed component formulas, oriented so
// the enforced condition in outward-conormal form reads
//   Pr_{F^perp}(gbar^{ij} nu_i nabla(ghat)_j gbar) = -zeta  (resp. -chi)
// at both faces.
FaceField zeta_map(const RdtState& s, const MuFunction& mu, Face face,
                   ZetaVariant variant = ZetaVariant::derived);
FaceField chi_map(const RdtState& s, Face face, ZetaVariant variant = ZetaVariant::derived);

// Shared immutable background data of one Ricci-DeTurck problem.
struct RdtContext {
  MetricField ghat;
  std::shared_ptr<const ChristoffelField> gamma_hat;
  std::array<FaceField, 2> II_hat;
  RdtMode mode = RdtMode::mean_curvature;
  ZetaVariant variant = ZetaVariant::derived;
  MuFunction mu;
  double margin0 = 0.0;   // min spd margin of ghat
  double H0_mean = 0.0;   // discrete mean curvature of ghat, averaged over both faces
};

struct RdtProblem {
  ProblemSpec spec;
  std::shared_ptr<const RdtContext> ctx;
};

// The flow as an instance of the parabolic problem: H = gbar^{-1}, F = R,
// Psi from zeta or chi, Dirichlet block = mixed components, u0 = ghat.
RdtProblem rdt_problem_spec(const MetricField& ghat, RdtMode mode, MuFunction mu = MuFunction::one(),
                            ZetaVariant variant = ZetaVariant::derived);

// Dirichlet mask of the subbundle F of Sym^2 T*M (mixed components).
SubbundleSplit make_sym_split_f(int n, int transverse_axis);

struct RdtRun {
  FlowTrace trace;
  std::shared_ptr<const RdtContext> ctx;
};

RdtRun evolve_rdt(const MetricField& ghat, RdtMode mode, MuFunction mu, const SolverConfig& config,
                  ZetaVariant variant = ZetaVariant::derived);
RdtRun evolve_rdt(const RdtProblem& problem, const SolverConfig& config);

// Metric view of one stored trace step.
MetricField metric_at_step(const FlowTrace& trace, std::size_t step);

}  // namespace gflow
