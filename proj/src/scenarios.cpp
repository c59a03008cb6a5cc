#include "gflow/scenarios.hpp"

#include <cmath>

#include "gflow/operator_kernel.hpp"

namespace gflow {

namespace {

constexpr double kPi = 3.14159265358979323846;


void run_construction_checks(Scenario& sc) {
  const SectionField samples[] = {sc.spec.u0};
  const double times[] = {0.0, sc.default_config.t_end};
  sc.c1 = check_parabolicity(sc.spec, samples, times);
  auto [dres, nres] = check_compatibility(sc.spec);
  sc.compat_dirichlet = dres;
  sc.compat_neumann = nres;
}

// ---------------------------------------------------------------------------
// heat_dirichlet: 1D heat equation with Dirichlet ends plus a stabilized zero
// reaction F = lambda_r (u - u*), which leaves the Fourier solution exact while
// making the Picard map genuinely dt-sensitive.
Scenario build_heat_dirichlet(const Json& params) {
  const int nodes = params.value("nodes", 128);
  const double lambda_r = params.value("reaction", 20.0);
  const bool plant_h = params.value("plant_indefinite_h", false);
  const bool violate_dirichlet = params.value("dirichlet_violation", false);

  Scenario sc;
  sc.name = "heat_dirichlet";
  sc.grid = make_grid({nodes});
  sc.spec.grid = sc.grid;
  sc.spec.d = 1;
  sc.spec.split = SubbundleSplit::first_components(1, 1, 1);

  const std::size_t mid = sc.grid->num_nodes() / 2;
  sc.spec.H = [plant_h, mid](std::span<const double>, double, std::size_t node,
                             std::span<double> h) {
    h[0] = (plant_h && node == mid) ? -0.1 : 1.0;
  };

  auto exact = [](double x, double t) { return std::exp(-kPi * kPi * t) * std::sin(kPi * x); };
  GridPtr grid = sc.grid;
  sc.spec.F = wrap_pointwise_f(
      1, [lambda_r, exact, grid](std::span<const double> eta, std::span<const double>, double t,
                                 std::size_t node, std::span<double> out) {
        out[0] = lambda_r * (eta[0] - exact(grid->axis_coord(node, 0), t));
      });

  sc.spec.u0 = SectionField(sc.grid, 1);
  for (std::size_t node = 0; node < sc.grid->num_nodes(); ++node)
    sc.spec.u0.at(node, 0) = exact(sc.grid->axis_coord(node, 0), 0.0);
  if (violate_dirichlet) sc.spec.u0.at(0, 0) += 0.5;

  sc.reference = [exact, grid](double t, std::size_t node, std::span<double> out) {
    out[0] = exact(grid->axis_coord(node, 0), t);
  };
  sc.default_config.dt = 5e-5;
  sc.default_config.t_end = 0.01;
  if (!plant_h && !violate_dirichlet) run_construction_checks(sc);
  return sc;
}

// ---------------------------------------------------------------------------
// heat_neumann_manufactured: quasilinear scalar problem on [0,1] x T^1 with
// nonhomogeneous Neumann data from a manufactured solution.
Scenario build_heat_neumann(const Json& params) {
  const int nodes = params.value("nodes", 64);

  Scenario sc;
  sc.name = "heat_neumann_manufactured";
  sc.grid = make_grid({nodes, nodes});
  ProblemSpec skeleton;
  skeleton.grid = sc.grid;
  skeleton.d = 1;
  skeleton.split = SubbundleSplit::first_components(1, 0, 0);
  skeleton.H = [](std::span<const double> eta, double, std::size_t, std::span<double> h) {
    const double a = 1.0 + 0.25 * eta[0] * eta[0];
    h[0] = a;  // H^{11}
    h[1] = 0.0;
    h[2] = a;  // H^{22}
  };

  const double phase = 0.3;
  ManufacturedSolution ms;
  ms.d = 1;
  ms.value = [phase](std::span<const double> x, double t, std::span<double> out) {
    out[0] = std::exp(-t) * std::cos(2.0 * kPi * x[0]) * std::cos(kPi * x[1] + phase);
  };
  ms.time_derivative = [phase](std::span<const double> x, double t, std::span<double> out) {
    out[0] = -std::exp(-t) * std::cos(2.0 * kPi * x[0]) * std::cos(kPi * x[1] + phase);
  };
  ms.gradient = [phase](std::span<const double> x, double t, std::span<double> out) {
    const double e = std::exp(-t);
    out[0] = -2.0 * kPi * e * std::sin(2.0 * kPi * x[0]) * std::cos(kPi * x[1] + phase);
    out[1] = -kPi * e * std::cos(2.0 * kPi * x[0]) * std::sin(kPi * x[1] + phase);
  };
  ms.hessian = [phase](std::span<const double> x, double t, std::span<double> out) {
    const double e = std::exp(-t);
    const double c1 = std::cos(2.0 * kPi * x[0]), s1 = std::sin(2.0 * kPi * x[0]);
    const double c2 = std::cos(kPi * x[1] + phase), s2 = std::sin(kPi * x[1] + phase);
    out[0] = -4.0 * kPi * kPi * e * c1 * c2;  // (0,0)
    out[1] = 2.0 * kPi * kPi * e * s1 * s2;   // (0,1)
    out[2] = out[1];                          // (1,0)
    out[3] = -kPi * kPi * e * c1 * c2;        // (1,1)
  };

  sc.spec = manufacture(ms, skeleton);
  GridPtr grid = sc.grid;
  auto value = ms.value;
  sc.reference = [value, grid](double t, std::size_t node, std::span<double> out) {
    double x[2] = {grid->axis_coord(node, 0), grid->axis_coord(node, 1)};
    value(x, t, out);
  };
  sc.default_config.dt = 1e-4;
  sc.default_config.t_end = 0.05;
  run_construction_checks(sc);
  return sc;
}

// ---------------------------------------------------------------------------
// coupled_mixed_bc: two coupled components on [0,1] x T^1, Dirichlet on the
// first and a nonlinear Neumann condition on the second; no exact solution.
Scenario build_coupled_mixed(const Json& params) {
  const int nodes = params.value("nodes", 32);

  Scenario sc;
  sc.name = "coupled_mixed_bc";
  sc.grid = make_grid({nodes, nodes + 1});
  sc.spec.grid = sc.grid;
  sc.spec.d = 2;
  sc.spec.split = SubbundleSplit::first_components(2, 1, 1);

  sc.spec.H = [](std::span<const double> eta, double, std::size_t, std::span<double> h) {
    const double a = 1.0 + 0.2 * std::sin(eta[0]) * std::cos(eta[1]);
    h[0] = a;
    h[1] = 0.25 * a;
    h[2] = 0.8 * a;
  };

  const int t_axis = sc.grid->transverse_axis();
  sc.spec.F = wrap_pointwise_f(
      2, [t_axis](std::span<const double> eta, std::span<const double> theta, double, std::size_t,
                  std::span<double> out) {
        out[0] = eta[1] - eta[0] * eta[0] * eta[0];
        out[1] = -eta[0] * eta[1] + 0.1 * theta[t_axis * 2 + 0];
      });

  sc.spec.u0 = SectionField(sc.grid, 2);
  for (std::size_t node = 0; node < sc.grid->num_nodes(); ++node) {
    const double xp = sc.grid->axis_coord(node, 0);
    const double xt = sc.grid->axis_coord(node, t_axis);
    sc.spec.u0.at(node, 0) = 0.4 * std::sin(kPi * xt) * std::cos(2.0 * kPi * xp);
    sc.spec.u0.at(node, 1) = 0.3 + 0.2 * std::cos(2.0 * kPi * xp) * (1.0 + 0.5 * xt * xt);
  }

  // Face offset making the nonlinear Neumann condition exactly compatible at t=0.
  auto psi0 = std::make_shared<std::array<std::vector<double>, 2>>();
  {
    const Sym2Field H0 = eval_h_field(sc.spec, sc.spec.u0, 0.0);
    for (Face face : {Face::lower, Face::upper}) {
      const FaceField flux = apply_conormal_flux(H0, sc.spec.geometry, sc.spec.u0, face);
      auto& v = (*psi0)[static_cast<int>(face)];
      v.resize(flux.count());
      for (std::size_t k = 0; k < flux.count(); ++k) {
        const std::size_t node = sc.grid->face_node(face, k);
        v[k] = flux.at(k, 1) - 0.2 * std::sin(sc.spec.u0.at(node, 1));
      }
    }
  }
  GridPtr grid = sc.grid;
  sc.spec.Psi = [psi0, grid](std::span<const double> eta, double t, std::size_t node, Face face,
                             std::span<double> out) {
    out[0] = 0.0;
    out[1] = 0.2 * std::sin(eta[1]) * std::cos(t) + (*psi0)[static_cast<int>(face)][grid->face_ordinal(node)];
  };

  sc.default_config.dt = 1e-4;
  sc.default_config.t_end = 0.01;
  run_construction_checks(sc);
  return sc;
}

// ---------------------------------------------------------------------------
// Ricci-DeTurck fixtures.

MetricField flat_band_metric(GridPtr grid) {
  Sym2Field g(grid);
  for (std::size_t node = 0; node < grid->num_nodes(); ++node)
    for (int i = 0; i < grid->dim(); ++i) g.s(node, i, i) = 1.0;
  return MetricField(std::move(g));
}

// Round unit S^3 in Hopf coordinates, band theta in [pi/4 - a, pi/4 + a]
// rescaled to the chart: axes (phi1, phi2, x), angles 2*pi periodic.
MetricField s3_band_metric(GridPtr grid, double a) {
  const int t = grid->transverse_axis();
  Sym2Field g(grid);
  for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
    const double theta = kPi / 4.0 - a + 2.0 * a * grid->axis_coord(node, t);
    const double c = std::cos(theta), s = std::sin(theta);
    g.s(node, 0, 0) = 4.0 * kPi * kPi * c * c;
    g.s(node, 1, 1) = 4.0 * kPi * kPi * s * s;
    g.s(node, t, t) = 4.0 * a * a;
  }
  return MetricField(std::move(g));
}

// Warped product dr^2 + f(r)^2 (dy1^2 + dy2^2) over unit-period torus fibers.
MetricField warped_bowl_metric(GridPtr grid, double amp) {
  const int t = grid->transverse_axis();
  Sym2Field g(grid);
  for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
    const double r = grid->axis_coord(node, t);
    const double f = 1.0 + amp * (r - 0.5) * (r - 0.5);
    g.s(node, 0, 0) = f * f;
    g.s(node, 1, 1) = f * f;
    g.s(node, t, t) = 1.0;
  }
  return MetricField(std::move(g));
}

MuFunction parse_mu(const std::string& name) {
  if (name == "one") return MuFunction::one();
  if (name == "shrink") return MuFunction{[](double t) { return 1.0 / std::sqrt(1.0 - 4.0 * t); }};
  if (name == "linear") return MuFunction{[](double t) { return 1.0 + t; }};
  throw ConfigError("unknown mu '" + name + "' (one|shrink|linear)");
}

ZetaVariant parse_variant(const std::string& name) {
  if (name == "derived") return ZetaVariant::derived;
  if (name == "verbatim") return ZetaVariant::verbatim;
  throw ConfigError("unknown zeta variant '" + name + "' (derived|verbatim)");
}

Scenario finish_rdt_scenario(Scenario sc, const MetricField& ghat, RdtMode mode, MuFunction mu,
                             ZetaVariant variant) {
  RdtProblem prob = rdt_problem_spec(ghat, mode, std::move(mu), variant);
  sc.spec = std::move(prob.spec);
  sc.rdt = std::move(prob.ctx);
  run_construction_checks(sc);
  return sc;
}

Scenario build_rdt_flat(const Json& params) {
  const int nodes = params.value("nodes", 16);
  Scenario sc;
  sc.name = "rdt_flat";
  sc.grid = make_grid({nodes, nodes, nodes});
  const MetricField ghat = flat_band_metric(sc.grid);
  sc.default_config.dt = 1e-4;
  sc.default_config.t_end = 0.01;
  GridPtr grid = sc.grid;
  sc.reference = [grid](double, std::size_t, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const int n = grid->dim();
    for (int i = 0; i < n; ++i) out[sym_index(n, i, i)] = 1.0;
  };
  return finish_rdt_scenario(std::move(sc), ghat, RdtMode::mean_curvature, MuFunction::one(),
                             parse_variant(params.value("zeta_variant", "derived")));
}

Scenario build_s3_band(const Json& params) {
  const int transverse = params.value("transverse", 32);
  const int tangential = params.value("tangential", 16);
  const double a = params.value("a", 0.2);
  const std::string mu_name = params.value("mu", "shrink");

  Scenario sc;
  sc.name = "s3_band";
  sc.grid = make_grid({tangential, tangential, transverse});
  const MetricField ghat = s3_band_metric(sc.grid, a);
  sc.default_config.dt = 2e-4;
  sc.default_config.t_end = 0.02;

  if (mu_name == "shrink") {
    GridPtr grid = sc.grid;
    auto g0 = std::make_shared<const Sym2Field>(ghat.components());
    sc.reference = [g0](double t, std::size_t node, std::span<double> out) {
      const auto v = g0->node_values(node);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - 4.0 * t) * v[k];
    };
  }
  return finish_rdt_scenario(std::move(sc), ghat, RdtMode::mean_curvature, parse_mu(mu_name),
                             parse_variant(params.value("zeta_variant", "derived")));
}

Scenario build_warped_bowl(const Json& params) {
  const int transverse = params.value("transverse", 32);
  const int tangential = params.value("tangential", 16);
  const double amp = params.value("concave", false) ? -0.3 : 0.3;

  Scenario sc;
  sc.name = "warped_bowl";
  sc.grid = make_grid({tangential, tangential, transverse});
  const MetricField ghat = warped_bowl_metric(sc.grid, amp);
  sc.default_config.dt = 2e-4;
  sc.default_config.t_end = 0.02;
  return finish_rdt_scenario(std::move(sc), ghat, RdtMode::convexity, MuFunction::one(),
                             parse_variant(params.value("zeta_variant", "derived")));
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"heat_dirichlet", "heat_neumann_manufactured", "coupled_mixed_bc",
          "rdt_flat",       "s3_band",                   "warped_bowl"};
}

Scenario build_scenario(const std::string& name, const Json& params) {
  if (name == "heat_dirichlet") return build_heat_dirichlet(params);
  if (name == "heat_neumann_manufactured") return build_heat_neumann(params);
  if (name == "coupled_mixed_bc") return build_coupled_mixed(params);
  if (name == "rdt_flat") return build_rdt_flat(params);
  if (name == "s3_band") return build_s3_band(params);
  if (name == "warped_bowl") return build_warped_bowl(params);
  throw UnknownScenario(name);
}

SectionField sample_manufactured(const ManufacturedSolution& ms, GridPtr grid, double t) {
  SectionField out(grid, ms.d);
  std::vector<double> x(grid->dim());
  for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
    grid->coords(node, x);
    ms.value(x, t, out.node_values(node));
  }
  return out;
}

ProblemSpec manufacture(const ManufacturedSolution& ms, const ProblemSpec& skeleton) {
  if (!skeleton.geometry.trivial())
    throw ConfigError("manufacture requires the trivial chart background");
  if (!ms.value || !ms.time_derivative || !ms.gradient || !ms.hessian)
    throw ManufactureInconsistent("closed-form value and derivatives are required");

  GridPtr grid = skeleton.grid;
  const ChartGrid& g = *grid;
  const int n = g.dim();
  const int d = ms.d;

  ProblemSpec out = skeleton;
  out.d = d;
  out.u0 = sample_manufactured(ms, grid, 0.0);

  for (Face face : {Face::lower, Face::upper})
    for (std::size_t k = 0; k < g.face_num_nodes(); ++k) {
      const std::size_t node = g.face_node(face, k);
      for (int m = 0; m < d; ++m)
        if (out.split.is_dirichlet(face, m) && std::abs(out.u0.at(node, m)) > 1e-12)
          throw ManufactureInconsistent("Dirichlet block of the exact solution is nonzero at face node " +
                                        std::to_string(node));
    }

  // F += dt(u*) - H^{ij}(u*) hess_{ij}(u*), all in closed form.
  FFieldCallback base_f = skeleton.F;
  HCallback h_cb = skeleton.H;
  auto msp = std::make_shared<const ManufacturedSolution>(ms);
  out.F = [base_f, h_cb, msp, grid, n, d](const SectionField& w, const Field& grad_w, double t,
                                          SectionField& o) {
    if (base_f)
      base_f(w, grad_w, t, o);
    else
      o.fill(0.0);
    std::vector<double> x(n), val(d), ut(d), hess(n * n * d), hsym(sym_count(n));
    for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
      grid->coords(node, x);
      msp->value(x, t, val);
      msp->time_derivative(x, t, ut);
      msp->hessian(x, t, hess);
      h_cb(val, t, node, hsym);
      auto row = o.node_values(node);
      for (int m = 0; m < d; ++m) {
        double acc = ut[m];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            acc -= hsym[sym_index(n, i, j)] * hess[(i * n + j) * d + m];
        row[m] += acc;
      }
    }
  };

  // Psi += discrete conormal flux of the sampled exact solution.
  struct FluxCache {
    double t = std::numeric_limits<double>::quiet_NaN();
    std::array<FaceField, 2> flux;
  };
  auto cache = std::make_shared<FluxCache>();
  PsiCallback base_psi = skeleton.Psi;
  const SubbundleSplit split = out.split;
  const BundleGeometry* geom_ptr = nullptr;  // bound below after out is finalized
  auto geom = std::make_shared<const BundleGeometry>(out.geometry);
  out.Psi = [base_psi, h_cb, msp, cache, geom, split, grid, d](std::span<const double> eta, double t,
                                                               std::size_t node, Face face,
                                                               std::span<double> psi) {
    if (!(cache->t == t)) {
      const SectionField us = sample_manufactured(*msp, grid, t);
      Sym2Field K(grid);
      for (std::size_t nd = 0; nd < grid->num_nodes(); ++nd)
        h_cb(us.node_values(nd), t, nd, K.node_values(nd));
      cache->flux[0] = apply_conormal_flux(K, *geom, us, Face::lower);
      cache->flux[1] = apply_conormal_flux(K, *geom, us, Face::upper);
      cache->t = t;
    }
    std::fill(psi.begin(), psi.end(), 0.0);
    if (base_psi) base_psi(eta, t, node, face, psi);
    const std::size_t k = grid->face_ordinal(node);
    for (int m = 0; m < d; ++m) psi[m] += cache->flux[static_cast<int>(face)].at(k, m);
    split.project_w_perp(face, psi);
  };
  (void)geom_ptr;

  const double h = g.max_spacing();
  out.compat_threshold = 5.0 * h * h;
  return out;
}

double final_time_error(const Scenario& sc, const FlowTrace& trace) {
  if (!sc.reference) throw ConfigError("scenario has no reference solution");
  const std::size_t s = trace.steps() - 1;
  const double t = trace.times[s];
  std::vector<double> ref(trace.d);
  double worst = 0.0;
  for (std::size_t node = 0; node < trace.grid->num_nodes(); ++node) {
    sc.reference(t, node, ref);
    for (int m = 0; m < trace.d; ++m)
      worst = std::max(worst, std::abs(trace.fields[s].at(node, m) - ref[m]));
  }
  return worst;
}

double max_trace_error(const Scenario& sc, const FlowTrace& trace) {
  if (!sc.reference) throw ConfigError("scenario has no reference solution");
  std::vector<double> ref(trace.d);
  double worst = 0.0;
  for (std::size_t s = 0; s < trace.steps(); ++s)
    for (std::size_t node = 0; node < trace.grid->num_nodes(); ++node) {
      sc.reference(trace.times[s], node, ref);
      for (int m = 0; m < trace.d; ++m)
        worst = std::max(worst, std::abs(trace.fields[s].at(node, m) - ref[m]));
    }
  return worst;
}

double fit_order(std::span<const double> h, std::span<const double> err) {
  if (h.size() != err.size() || h.size() < 2) throw ConfigError("order fit needs >= 2 levels");
  const std::size_t m = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(std::max(err[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace gflow
