#include "gflow/parabolic.hpp"

#include <algorithm>
#include <cmath>

#include "gflow/operator_kernel.hpp"

namespace gflow {

namespace {

// Neumann data of the linearized problem around w:
//   Psi(w,t) - Pr_Wperp((H_w - H0) nu nabla w),
// evaluated with the same conormal stencils the matrix rows use.
FaceField neumann_data(const ProblemSpec& spec, const Sym2Field& Hw, const Sym2Field& H0,
                       const SectionField& w, double t, Face face) {
  const ChartGrid& g = *spec.grid;
  const int d = spec.d;
  FaceField out(g.face_num_nodes(), d, 0.0);

  Sym2Field dK(spec.grid);
  for (std::size_t k = 0; k < dK.data().size(); ++k) dK.data()[k] = Hw.data()[k] - H0.data()[k];
  const bool correction = sup_norm(dK) > 0.0;
  FaceField corr;
  if (correction) corr = apply_conormal_flux(dK, spec.geometry, w, face);

  std::vector<double> psi(d);
  for (std::size_t k = 0; k < g.face_num_nodes(); ++k) {
    const std::size_t node = g.face_node(face, k);
    std::fill(psi.begin(), psi.end(), 0.0);
    if (spec.Psi) spec.Psi(w.node_values(node), t, node, face, psi);
    for (int m = 0; m < d; ++m) {
      double v = psi[m];
      if (correction) v -= corr.at(k, m);
      out.at(k, m) = v;
    }
    spec.split.project_w_perp(face, out.node_values(k));
  }
  return out;
}

SectionField eval_f_field(const ProblemSpec& spec, const SectionField& w, double t) {
  SectionField out(spec.grid, spec.d, 0.0);
  if (spec.F) {
    const Field grad = covariant_gradient(spec.d, spec.geometry, w);
    spec.F(w, grad, t, out);
  }
  return out;
}

LinearProblem build_linear_problem(const ProblemSpec& spec, const Sym2Field& H0,
                                   const SectionField& w, double t) {
  const Sym2Field Hw = eval_h_field(spec, w, t);

  LinearProblem lp;
  lp.grid = spec.grid;
  lp.d = spec.d;
  lp.K = H0;
  lp.split = &spec.split;
  lp.geometry = &spec.geometry;

  lp.G = eval_f_field(spec, w, t);
  Sym2Field dK(spec.grid);
  bool any = false;
  for (std::size_t k = 0; k < dK.data().size(); ++k) {
    dK.data()[k] = Hw.data()[k] - H0.data()[k];
    any |= dK.data()[k] != 0.0;
  }
  if (any) {
    const SectionField corr = apply_interior_operator(dK, spec.geometry, w);
    for (std::size_t k = 0; k < lp.G.data().size(); ++k) lp.G.data()[k] += corr.data()[k];
  }

  lp.p[0] = neumann_data(spec, Hw, H0, w, t, Face::lower);
  lp.p[1] = neumann_data(spec, Hw, H0, w, t, Face::upper);
  return lp;
}

void check_admissible(const ProblemSpec& spec, const SectionField& v, double t) {
  for (std::size_t node = 0; node < v.num_nodes(); ++node)
    if (!spec.is_admissible(v.node_values(node), node)) throw LeftAdmissibleSet(node, t);
}

}  // namespace

double check_parabolicity(const ProblemSpec& spec, std::span<const SectionField> samples,
                          std::span<const double> times) {
  const int n = spec.grid->dim();
  std::vector<double> h(sym_count(n));
  double c1 = std::numeric_limits<double>::infinity();
  for (const SectionField& s : samples)
    for (double t : times)
      for (std::size_t node = 0; node < spec.grid->num_nodes(); ++node) {
        spec.H(s.node_values(node), t, node, h);
        const double ev = sym_min_eigenvalue(n, h);
        if (ev <= 0.0) throw NotParabolic(node, t, ev);
        c1 = std::min(c1, ev);
      }
  return c1;
}

std::pair<double, double> check_compatibility(const ProblemSpec& spec, double threshold) {
  const ChartGrid& g = *spec.grid;
  const int d = spec.d;
  if (threshold < 0) threshold = spec.compat_threshold;

  const Sym2Field H0 = eval_h_field(spec, spec.u0, 0.0);

  double dres = 0.0, nres = 0.0;
  std::vector<double> psi(d), flux(d);
  for (Face face : {Face::lower, Face::upper}) {
    const FaceField fluxes = apply_conormal_flux(H0, spec.geometry, spec.u0, face);
    for (std::size_t k = 0; k < g.face_num_nodes(); ++k) {
      const std::size_t node = g.face_node(face, k);
      std::fill(psi.begin(), psi.end(), 0.0);
      if (spec.Psi) spec.Psi(spec.u0.node_values(node), 0.0, node, face, psi);
      for (int m = 0; m < d; ++m) {
        if (spec.split.is_dirichlet(face, m))
          dres = std::max(dres, std::abs(spec.u0.at(node, m)));
        else
          nres = std::max(nres, std::abs(fluxes.at(k, m) - psi[m]));
      }
    }
  }
  if (dres > threshold || nres > threshold) throw IncompatibleData(dres, nres, threshold);
  return {dres, nres};
}

std::pair<double, double> boundary_residuals(const ProblemSpec& spec, const SectionField& u,
                                             double t) {
  const ChartGrid& g = *spec.grid;
  const int d = spec.d;
  const Sym2Field Hu = eval_h_field(spec, u, t);
  double dres = 0.0, nres = 0.0;
  std::vector<double> psi(d);
  for (Face face : {Face::lower, Face::upper}) {
    const FaceField fluxes = apply_conormal_flux(Hu, spec.geometry, u, face);
    for (std::size_t k = 0; k < g.face_num_nodes(); ++k) {
      const std::size_t node = g.face_node(face, k);
      std::fill(psi.begin(), psi.end(), 0.0);
      if (spec.Psi) spec.Psi(u.node_values(node), t, node, face, psi);
      for (int m = 0; m < d; ++m) {
        if (spec.split.is_dirichlet(face, m))
          dres = std::max(dres, std::abs(u.at(node, m)));
        else
          nres = std::max(nres, std::abs(fluxes.at(k, m) - psi[m]));
      }
    }
  }
  return {dres, nres};
}

SectionField picard_operator(const ProblemSpec& spec, const SectionField& u_t, const SectionField& w,
                             double t_next, double dt, FreezeMode mode) {
  for (std::size_t node = 0; node < w.num_nodes(); ++node)
    if (!spec.is_admissible(w.node_values(node), node)) throw LeftAdmissibleSet(node, t_next);
  const Sym2Field H0 = mode == FreezeMode::paper ? eval_h_field(spec, spec.u0, 0.0)
                                                 : eval_h_field(spec, w, t_next);
  const LinearProblem lp = build_linear_problem(spec, H0, w, t_next);
  return solve_linear_step(lp, u_t, dt, 1e-12);
}

FlowTrace evolve(const ProblemSpec& spec, const SolverConfig& config, const StepMonitor& monitor) {
  config.validate();

  FlowTrace trace;
  trace.grid = spec.grid;
  trace.d = spec.d;
  trace.dt = config.dt;
  trace.times.push_back(0.0);
  trace.fields.push_back(spec.u0);

  auto record_failure = [&](const Error& e, double t) {
    trace.failure = TraceFailure{e.code(), e.name(), e.what(), t};
  };

  {
    StepDiagnostics d0;
    d0.t = 0.0;
    auto [dres, nres] = boundary_residuals(spec, spec.u0, 0.0);
    d0.bc_dirichlet_res = dres;
    d0.bc_neumann_res = nres;
    if (monitor) monitor(0.0, spec.u0, d0);
    trace.diag.push_back(std::move(d0));
  }

  try {
    const SectionField samples[] = {spec.u0};
    const double times[] = {0.0, config.t_end};
    check_parabolicity(spec, samples, times);
    check_compatibility(spec);
  } catch (const Error& e) {
    record_failure(e, 0.0);
    return trace;
  }

  const std::size_t nsteps = static_cast<std::size_t>(std::llround(config.t_end / config.dt));
  if (nsteps < 1 || std::abs(nsteps * config.dt - config.t_end) > 1e-9 * config.t_end + 1e-15)
    throw ConfigError("t_end must be a multiple of dt");

  LinearSolver solver;
  Sym2Field H0;
  if (config.freeze_mode == FreezeMode::paper) H0 = eval_h_field(spec, spec.u0, 0.0);

  SectionField u = spec.u0;
  for (std::size_t step = 0; step < nsteps; ++step) {
    const double t_next = (step + 1) * config.dt;
    StepDiagnostics sd;
    sd.t = t_next;

    try {
      SectionField w = u;
      double r0 = 0.0;
      bool converged = false;
      LinearProblem lp;
      SectionField v;
      for (int it = 0; it < config.picard_max; ++it) {
        if (config.freeze_mode == FreezeMode::lagged) H0 = eval_h_field(spec, w, t_next);
        check_ellipticity(H0);
        lp = build_linear_problem(spec, H0, w, t_next);
        SolveStats stats;
        v = solve_linear_step(lp, u, config.dt, config.lin_tol, &solver, &stats);
        sd.lin_residual = stats.rel_residual;
        check_admissible(spec, v, t_next);
        const double r = sup_norm_diff(v, w);
        sd.picard_residuals.push_back(r);
        w = v;
        sd.picard_iters = it + 1;
        if (it == 0) r0 = r;
        if (r <= config.picard_tol) {
          converged = true;
          break;
        }
        if (!std::isfinite(r) || (it >= 4 && r > 1e8 * std::max(r0, 1e-30)))
          throw NoContraction(t_next, it + 1, r);
      }
      if (!converged)
        throw NoContraction(t_next, sd.picard_iters,
                            sd.picard_residuals.empty() ? 0.0 : sd.picard_residuals.back());

      sd.stability_ratio = stability_ratio(lp, u, config.dt, v);
      u = std::move(w);
    } catch (const Error& e) {
      record_failure(e, t_next);
      return trace;
    }

    auto [dres, nres] = boundary_residuals(spec, u, t_next);
    sd.bc_dirichlet_res = dres;
    sd.bc_neumann_res = nres;
    if (monitor) monitor(t_next, u, sd);

    trace.times.push_back(t_next);
    trace.fields.push_back(u);
    trace.diag.push_back(std::move(sd));
  }
  return trace;
}

ProblemSpec shift_to_zero_initial(const ProblemSpec& spec) {
  auto u0 = std::make_shared<const SectionField>(spec.u0);
  const int d = spec.d;
  const int n = spec.grid->dim();

  // Solver-consistent derivatives of the shift, so that the shifted and the
  // original discrete systems are algebraically identical.
  auto grad_u0 = std::make_shared<const Field>(covariant_gradient(d, spec.geometry, spec.u0));
  auto dd_u0 = std::make_shared<const Field>(second_covariant_section(d, spec.geometry, spec.u0));
  auto conormal = std::make_shared<const std::array<std::vector<double>, 2>>(
      spec.geometry.conormal_scale);

  ProblemSpec out = spec;
  out.u0 = SectionField(spec.grid, d, 0.0);

  HCallback base_h = spec.H;
  out.H = [base_h, u0, d](std::span<const double> eta, double t, std::size_t node,
                          std::span<double> h) {
    std::vector<double> full(eta.begin(), eta.end());
    const auto shift = u0->node_values(node);
    for (int m = 0; m < d; ++m) full[m] += shift[m];
    base_h(full, t, node, h);
  };

  FFieldCallback base_f = spec.F;
  HCallback h_of_full = spec.H;
  out.F = [base_f, h_of_full, u0, grad_u0, dd_u0, d, n](const SectionField& w, const Field& grad_w,
                                                        double t, SectionField& outf) {
    SectionField full(w.grid_ptr(), d);
    Field grad_full(w.grid_ptr(), n * d);
    for (std::size_t k = 0; k < full.data().size(); ++k)
      full.data()[k] = w.data()[k] + u0->data()[k];
    for (std::size_t k = 0; k < grad_full.data().size(); ++k)
      grad_full.data()[k] = grad_w.data()[k] + grad_u0->data()[k];
    if (base_f) base_f(full, grad_full, t, outf);
    // + H(u, t)^{ij} (nabla nabla u0)_{ij}
    std::vector<double> h(sym_count(n));
    for (std::size_t node = 0; node < w.num_nodes(); ++node) {
      h_of_full(full.node_values(node), t, node, h);
      auto o = outf.node_values(node);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double hij = h[sym_index(n, i, j)];
          if (hij == 0.0) continue;
          for (int m = 0; m < d; ++m) o[m] += hij * dd_u0->at(node, (i * n + j) * d + m);
        }
    }
  };

  PsiCallback base_psi = spec.Psi;
  const SubbundleSplit split = spec.split;
  GridPtr grid = spec.grid;
  HCallback h_for_psi = spec.H;
  out.Psi = [base_psi, h_for_psi, u0, grad_u0, conormal, split, grid, d, n](
                std::span<const double> eta, double t, std::size_t node, Face face,
                std::span<double> psi) {
    std::vector<double> full(eta.begin(), eta.end());
    const auto shift = u0->node_values(node);
    for (int m = 0; m < d; ++m) full[m] += shift[m];
    std::fill(psi.begin(), psi.end(), 0.0);
    if (base_psi) base_psi(full, t, node, face, psi);
    // - Pr_Wperp(H(u,t) nu nabla u0), contracted against the covariant gradient
    //   so it matches the conormal rows of the matrix exactly.
    std::vector<double> h(sym_count(n));
    h_for_psi(full, t, node, h);
    const ChartGrid& g = *grid;
    const int ta = g.transverse_axis();
    const auto& scale = (*conormal)[static_cast<int>(face)];
    const double nu =
        outward_sign(face) * (scale.empty() ? 1.0 : scale[g.face_ordinal(node)]);
    for (int j = 0; j < n; ++j) {
      const double coef = nu * h[sym_index(n, ta, j)];
      if (coef == 0.0) continue;
      for (int m = 0; m < d; ++m) psi[m] -= coef * grad_u0->at(node, j * d + m);
    }
    split.project_w_perp(face, psi);
  };

  AdmissiblePredicate base_adm = spec.admissible;
  out.admissible = [base_adm, u0, d](std::span<const double> eta, std::size_t node) {
    std::vector<double> full(eta.begin(), eta.end());
    const auto shift = u0->node_values(node);
    for (int m = 0; m < d; ++m) full[m] += shift[m];
    if (base_adm) return base_adm(full, node);
    for (double v : full)
      if (!std::isfinite(v)) return false;
    return true;
  };
  return out;
}

}  // namespace gflow
