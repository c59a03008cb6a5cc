#include "gflow/ricci_deturck.hpp"

#include <cmath>

#include "gflow/operator_kernel.hpp"

namespace gflow {

CovectorField deturck_covector(const MetricField& gbar, const ChristoffelField& gamma_bar,
                               const ChristoffelField& gamma_hat) {
  const ChartGrid& g = gbar.grid();
  const int n = g.dim();
  const Sym2Field& ginv = gbar.inverse();
  CovectorField P(gbar.grid_ptr());
  for (std::size_t node = 0; node < g.num_nodes(); ++node)
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        double tr = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            tr += ginv.at(node, sym_index(n, k, l)) *
                  (gamma_bar.g(node, j, k, l) - gamma_hat.g(node, j, k, l));
        acc += gbar.components().at(node, sym_index(n, i, j)) * tr;
      }
      P.v(node, i) = acc;
    }
  return P;
}

CovectorField deturck_covector(const MetricField& gbar, const MetricField& ghat) {
  return deturck_covector(gbar, christoffel(gbar), christoffel(ghat));
}

Sym2Field deturck_correction(const MetricField& gbar, const ChristoffelField& gamma_bar,
                             const CovectorField& P) {
  const ChartGrid& g = gbar.grid();
  const int n = g.dim();
  std::vector<Field> dP;
  dP.reserve(n);
  for (int a = 0; a < n; ++a) dP.push_back(partial_derivative(P, a));

  Sym2Field Q(gbar.grid_ptr());
  for (std::size_t node = 0; node < g.num_nodes(); ++node)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double acc = dP[i].at(node, j) + dP[j].at(node, i);
        for (int k = 0; k < n; ++k) acc -= 2.0 * gamma_bar.g(node, k, i, j) * P.v(node, k);
        Q.s(node, i, j) = acc;
      }
  return Q;
}

Sym2Field deturck_correction(const MetricField& gbar, const CovectorField& P) {
  return deturck_correction(gbar, christoffel(gbar), P);
}

Sym2Field rdt_rhs_direct(const RdtState& s) {
  const ChristoffelField gamma_bar = christoffel(s.gbar);
  const ChristoffelField gamma_hat = christoffel(s.ghat);
  const CovectorField P = deturck_covector(s.gbar, gamma_bar, gamma_hat);
  const Sym2Field Q = deturck_correction(s.gbar, gamma_bar, P);
  Sym2Field ric = ricci(s.gbar);
  for (std::size_t k = 0; k < ric.data().size(); ++k)
    ric.data()[k] = -2.0 * ric.data()[k] + Q.data()[k];
  return ric;
}

Sym2Field rdt_rhs_parabolic(const RdtState& s) {
  const ChristoffelField gamma_hat = christoffel(s.ghat);
  const Sym2Field principal =
      laplacian_like(s.gbar.inverse(), second_covariant_sym2(s.gbar.components(), gamma_hat));
  const Sym2Field direct = rdt_rhs_direct(s);
  Sym2Field out = principal;
  for (std::size_t k = 0; k < out.data().size(); ++k) {
    const double lower_order = direct.data()[k] - principal.data()[k];
    out.data()[k] = principal.data()[k] + lower_order;
  }
  return out;
}

namespace {

// Boundary maps at one face node. Inputs are packed symmetric components of
// gbar, ghat, the full inverses, the tangential II of ghat, and mu(t).
void boundary_map_fiber(int n, int transverse, bool convexity_mode, ZetaVariant variant, double mu,
                        std::span<const double> gbar, std::span<const double> gbar_inv,
                        std::span<const double> ghat, std::span<const double> ghat_inv,
                        std::span<const double> II_hat, std::span<double> out) {
  if (n < 2 || n > kMaxDim) throw ConfigError("boundary maps need 2 <= n <= kMaxDim");
  const int nb = n - 1;
  auto tax = [&](int alpha) { return alpha < transverse ? alpha : alpha + 1; };

  const double gbar_nn = gbar[sym_index(n, transverse, transverse)];
  const double gbar_nn_up = gbar_inv[sym_index(n, transverse, transverse)];
  const double ghat_nn = ghat[sym_index(n, transverse, transverse)];
  const double q_raised = ghat_nn * gbar_nn_up;
  const double q_lowered = ghat_nn * gbar_nn;

  // S_{ab} = gbar_{ac} ghat^{cs} II_{sb} + gbar_{bc} ghat^{cs} II_{sa}
  double S[kMaxDim * (kMaxDim + 1) / 2] = {0.0};
  for (int a = 0; a < nb; ++a)
    for (int b = a; b < nb; ++b) {
      double acc = 0.0;
      for (int c = 0; c < nb; ++c)
        for (int s2 = 0; s2 < nb; ++s2) {
          const double raise = ghat_inv[sym_index(n, tax(c), tax(s2))];
          acc += gbar[sym_index(n, tax(a), tax(c))] * raise * II_hat[sym_index(nb, s2, b)];
          acc += gbar[sym_index(n, tax(b), tax(c))] * raise * II_hat[sym_index(nb, s2, a)];
        }
      S[sym_index(nb, a, b)] = acc;
    }

  double tr_hat = 0.0, tr_bar = 0.0;
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b) {
      tr_hat += ghat_inv[sym_index(n, tax(a), tax(b))] * II_hat[sym_index(nb, a, b)];
      tr_bar += gbar_inv[sym_index(n, tax(a), tax(b))] * II_hat[sym_index(nb, a, b)];
    }

  std::fill(out.begin(), out.end(), 0.0);
  const double sq_r = std::sqrt(q_raised);
  const double sq_l = std::sqrt(q_lowered);

  if (!convexity_mode) {
    for (int a = 0; a < nb; ++a)
      for (int b = a; b < nb; ++b)
        out[sym_index(n, tax(a), tax(b))] = (q_raised - mu * sq_r) * S[sym_index(nb, a, b)];
    out[sym_index(n, transverse, transverse)] =
        variant == ZetaVariant::verbatim ? -2.0 * gbar_nn * (mu * sq_r * tr_hat - tr_bar)
                                         : -2.0 * (mu * sq_l * tr_hat - gbar_nn * tr_bar);
  } else {
    for (int a = 0; a < nb; ++a)
      for (int b = a; b < nb; ++b)
        out[sym_index(n, tax(a), tax(b))] =
            -2.0 * sq_r * II_hat[sym_index(nb, a, b)] + q_raised * S[sym_index(nb, a, b)];
    out[sym_index(n, transverse, transverse)] = -2.0 * (sq_l - gbar_nn) * tr_bar;
  }
}

FaceField boundary_map_face(const RdtState& s, const MuFunction& mu, Face face, RdtMode mode,
                            ZetaVariant variant) {
  const ChartGrid& g = s.gbar.grid();
  const int n = g.dim();
  const FaceField II_hat = second_fundamental_form(s.ghat, face);
  const Sym2Field& gbar_inv = s.gbar.inverse();
  const Sym2Field& ghat_inv = s.ghat.inverse();
  FaceField out(g.face_num_nodes(), sym_count(n));
  const double mu_t = mu(s.t);
  for (std::size_t k = 0; k < out.count(); ++k) {
    const std::size_t node = g.face_node(face, k);
    boundary_map_fiber(n, g.transverse_axis(), mode == RdtMode::convexity, variant, mu_t,
                       s.gbar.components().node_values(node), gbar_inv.node_values(node),
                       s.ghat.components().node_values(node), ghat_inv.node_values(node),
                       II_hat.node_values(k), out.node_values(k));
  }
  return out;
}

}  // namespace

FaceField zeta_map(const RdtState& s, const MuFunction& mu, Face face, ZetaVariant variant) {
  return boundary_map_face(s, mu, face, RdtMode::mean_curvature, variant);
}

FaceField chi_map(const RdtState& s, Face face, ZetaVariant variant) {
  return boundary_map_face(s, MuFunction::one(), face, RdtMode::convexity, variant);
}

SubbundleSplit make_sym_split_f(int n, int transverse_axis) {
  std::vector<std::uint8_t> mask(sym_count(n), 0);
  for (int a = 0; a < n; ++a)
    if (a != transverse_axis) mask[sym_index(n, a, transverse_axis)] = 1;
  auto upper = mask;
  return SubbundleSplit::from_masks(std::move(mask), std::move(upper));
}

MetricField metric_at_step(const FlowTrace& trace, std::size_t step) {
  Sym2Field g(trace.grid);
  g.data() = trace.fields[step].data();
  return MetricField(std::move(g));
}

RdtProblem rdt_problem_spec(const MetricField& ghat, RdtMode mode, MuFunction mu,
                            ZetaVariant variant) {
  const ChartGrid& g = ghat.grid();
  const int n = g.dim();
  const int t = g.transverse_axis();
  const int d = sym_count(n);

  // Adapted chart: mixed components of ghat vanish on both faces.
  const double scale = sup_norm(ghat.components());
  for (Face face : {Face::lower, Face::upper})
    for (std::size_t k = 0; k < g.face_num_nodes(); ++k) {
      const std::size_t node = g.face_node(face, k);
      for (int a = 0; a < n; ++a) {
        if (a == t) continue;
        const double v = ghat.components().at(node, sym_index(n, a, t));
        if (std::abs(v) > 1e-12 * scale) throw AdaptedChartViolation(node, v);
      }
    }

  auto ctx = std::make_shared<RdtContext>();
  ctx->ghat = ghat;
  ctx->gamma_hat = std::make_shared<const ChristoffelField>(christoffel(ghat));
  ctx->II_hat[0] = second_fundamental_form(ghat, *ctx->gamma_hat, Face::lower);
  ctx->II_hat[1] = second_fundamental_form(ghat, *ctx->gamma_hat, Face::upper);
  ctx->mode = mode;
  ctx->variant = variant;
  ctx->mu = std::move(mu);
  ctx->margin0 = min_spd_margin(ghat.components());
  const FaceField h_lower = mean_curvature(ghat, *ctx->gamma_hat, Face::lower);
  const FaceField h_upper = mean_curvature(ghat, *ctx->gamma_hat, Face::upper);
  double acc = 0.0;
  for (std::size_t k = 0; k < h_lower.count(); ++k) acc += h_lower.at(k, 0) + h_upper.at(k, 0);
  ctx->H0_mean = acc / (2.0 * h_lower.count());

  ProblemSpec spec;
  spec.grid = ghat.grid_ptr();
  spec.d = d;
  spec.split = make_sym_split_f(n, t);
  spec.geometry = make_sym2_geometry(ghat, ctx->gamma_hat);
  spec.compat_threshold = 1e-8;

  spec.H = [n](std::span<const double> eta, double, std::size_t node, std::span<double> h) {
    sym_invert(n, eta, h, node);
  };

  auto ghat_shared = std::make_shared<const MetricField>(ghat);
  std::shared_ptr<const ChristoffelField> gamma_hat = ctx->gamma_hat;
  spec.F = [ghat_shared, gamma_hat](const SectionField& w, const Field&, double, SectionField& out) {
    Sym2Field gw(w.grid_ptr());
    gw.data() = w.data();
    MetricField gbar(std::move(gw));
    const Sym2Field principal =
        laplacian_like(gbar.inverse(), second_covariant_sym2(gbar.components(), *gamma_hat));
    const RdtState state{gbar, *ghat_shared, 0.0};
    const Sym2Field direct = rdt_rhs_direct(state);
    for (std::size_t k = 0; k < out.data().size(); ++k)
      out.data()[k] = direct.data()[k] - principal.data()[k];
  };

  RdtContext* cptr = ctx.get();
  auto ctx_keep = ctx;
  spec.Psi = [cptr, ctx_keep, n, t](std::span<const double> eta, double time, std::size_t node,
                                    Face face, std::span<double> psi) {
    const ChartGrid& grid = cptr->ghat.grid();
    const std::size_t k = grid.face_ordinal(node);
    std::vector<double> eta_inv(sym_count(n));
    sym_invert(n, eta, eta_inv, node);
    boundary_map_fiber(n, t, cptr->mode == RdtMode::convexity, cptr->variant, cptr->mu(time), eta,
                       eta_inv, cptr->ghat.components().node_values(node),
                       cptr->ghat.inverse().node_values(node), cptr->II_hat[static_cast<int>(face)].node_values(k),
                       psi);
    // Outward-conormal Neumann row: the transcribed maps carry the chart's
    // inward-pointing normal convention, hence the sign flip.
    for (double& v : psi) v = -v;
  };

  {
    Sym2Field u0(ghat.grid_ptr());
    u0.data() = ghat.components().data();
    spec.u0 = std::move(u0);
  }

  const double margin0 = ctx->margin0;
  spec.admissible = [n, margin0](std::span<const double> eta, std::size_t) {
    for (double v : eta)
      if (!std::isfinite(v)) return false;
    return sym_min_eigenvalue(n, eta) > 0.05 * margin0;
  };

  return RdtProblem{std::move(spec), std::move(ctx)};
}

RdtRun evolve_rdt(const RdtProblem& problem, const SolverConfig& config) {
  const RdtContext& ctx = *problem.ctx;
  const ChartGrid& grid = *problem.spec.grid;
  const int n = grid.dim();

  StepMonitor monitor = [&ctx, &grid, n](double t, const SectionField& u, StepDiagnostics& sd) {
    Sym2Field gs(u.grid_ptr());
    gs.data() = u.data();
    MetricField gbar(std::move(gs));
    const ChristoffelField gamma_bar = christoffel(gbar);
    const CovectorField P = deturck_covector(gbar, gamma_bar, *ctx.gamma_hat);

    double ptan = 0.0;
    const Sym2Field& ginv = gbar.inverse();
    const int tr = grid.transverse_axis();
    for (Face face : {Face::lower, Face::upper})
      for (std::size_t k = 0; k < grid.face_num_nodes(); ++k) {
        const std::size_t node = grid.face_node(face, k);
        double pn = 0.0;
        for (int j = 0; j < n; ++j) pn += ginv.at(node, sym_index(n, tr, j)) * P.v(node, j);
        ptan = std::max(ptan, std::abs(pn));
      }
    sd.p_tangency_res = ptan;
    sd.spd_margin = min_spd_margin(gbar.components());

    const FaceField II_lower = second_fundamental_form(gbar, gamma_bar, Face::lower);
    const FaceField II_upper = second_fundamental_form(gbar, gamma_bar, Face::upper);
    sd.min_II_eig_lower = min_II_eigenvalue(II_lower, n);
    sd.min_II_eig_upper = min_II_eigenvalue(II_upper, n);

    if (ctx.mode == RdtMode::mean_curvature) {
      const double target = ctx.mu(t) * ctx.H0_mean;
      double err = 0.0;
      for (Face face : {Face::lower, Face::upper}) {
        const FaceField h = mean_curvature(gbar, gamma_bar, face);
        for (std::size_t k = 0; k < h.count(); ++k)
          err = std::max(err, std::abs(h.at(k, 0) - target));
      }
      sd.mean_curv_err = err;
    }
  };

  RdtRun run;
  run.ctx = problem.ctx;
  run.trace = evolve(problem.spec, config, monitor);
  return run;
}

RdtRun evolve_rdt(const MetricField& ghat, RdtMode mode, MuFunction mu, const SolverConfig& config,
                  ZetaVariant variant) {
  return evolve_rdt(rdt_problem_spec(ghat, mode, std::move(mu), variant), config);
}

}  // namespace gflow
