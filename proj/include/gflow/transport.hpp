#pragma once

#include <vector>

#include "gflow/boundary_geometry.hpp"
#include "gflow/ricci_deturck.hpp"

namespace gflow {

// DeTurck diffeomorphisms stored as displacements: psi(x,t) = x + u(x,t).
// Displacements stay small and periodic, so finite differences never cross a
// period seam.
struct DiffeoTrace {
  GridPtr grid;
  std::vector<double> times;
  std::vector<Field> displacement;  // ncomp = n
  std::vector<double> min_det_jac;  // per step

  std::size_t steps() const { return times.size(); }
};

struct PullbackTrace {
  GridPtr grid;
  std::vector<double> times;
  std::vector<MetricField> metrics;
};

// P^i = gbar^{ij} P_j.
VectorField deturck_vector_field(const MetricField& gbar, const CovectorField& P);

// sup |P^n| over both faces.
double p_tangency_residual(const MetricField& gbar, const CovectorField& P);

// Vector fields -P at each stored step of an accepted trace.
std::vector<VectorField> deturck_vector_trace(const FlowTrace& trace, const MetricField& ghat);

// Classical RK4 per node on dpsi/dt = -P(psi,t), multilinear in space and
// linear in t between stored steps. The transverse coordinate may overshoot
// [0,1] by at most h^2 (then clamped); larger overshoot throws BoundaryEscape.
// Throws JacobianDegenerate when det(I + Du) <= 0.
DiffeoTrace integrate_diffeo(const std::vector<VectorField>& p_trace,
                             const std::vector<double>& times, GridPtr grid);

// Jacobian D psi = I + D u at one step, ncomp n*n (row i, col j = d_j psi^i).
Field diffeo_jacobian(const DiffeoTrace& psi, std::size_t step);

// g_{ij}(x) = (Dpsi)^k_i (Dpsi)^l_j gbar_{kl}(psi(x)).
MetricField pullback_metric(const MetricField& gbar_at_t, const DiffeoTrace& psi, std::size_t step);

PullbackTrace pullback_trace(const FlowTrace& trace, const DiffeoTrace& psi);

// sup |d_t g + 2 Ric(g)| with centered time differences; entries for the first
// and last stored steps are NaN (no centered difference there).
std::vector<double> ricci_flow_residual(const PullbackTrace& trace);

// sup over faces of |H(g(.,t)) - mu(t) H0| per step.
std::vector<double> mean_curvature_check(const PullbackTrace& trace, const MuFunction& mu, double H0);

// sup |II(g(.,t)) - (psi|face)^* II_hat| per step.
std::vector<double> boundary_pullback_check(const PullbackTrace& trace, const DiffeoTrace& psi,
                                            const std::array<FaceField, 2>& II_hat);

// min tangential II eigenvalue over both faces per step.
std::vector<double> convexity_monitor(const PullbackTrace& trace);

// Multilinear interpolation of a field at chart coordinates x (periodic wrap
// tangentially, clamped on the transverse axis).
void interpolate_field(const Field& f, std::span<const double> x, std::span<double> out);

}  // namespace gflow
