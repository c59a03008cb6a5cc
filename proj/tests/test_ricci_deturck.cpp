#include <doctest.h>

#include <cmath>

#include "gflow/parabolic.hpp"
#include "gflow/ricci_deturck.hpp"
#include "test_helpers.hpp"

using namespace gflow;
using namespace gflow::testing;

namespace {

MetricField scaled(const MetricField& g, double c) {
  Sym2Field s = g.components();
  for (double& v : s.data()) v *= c;
  return MetricField(std::move(s));
}

// ghat + smooth symmetric perturbation with mixed components tapered to zero
// at the faces, so the state stays adapted.
MetricField perturbed_adapted(const MetricField& ghat, unsigned seed, double rel) {
  const ChartGrid& g = ghat.grid();
  const int n = g.dim();
  const int t = g.transverse_axis();
  Sym2Field out = ghat.components();
  const Sym2Field bump = smooth_random_sym2(ghat.grid_ptr(), seed, rel * min_spd_margin(out));
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    const double xt = g.axis_coord(node, t);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double b = bump.s(node, i, j);
        if ((i == t) != (j == t)) b *= std::sin(kPi * xt);
        out.s(node, i, j) += b;
      }
  }
  MetricField m(std::move(out));
  REQUIRE(min_spd_margin(m.components()) > 0.0);
  return m;
}

}  // namespace

TEST_CASE("second_fundamental_form: flat faces, Hopf band closed form, scaling law") {
  GridPtr fgrid = make_grid({6, 6, 8});
  const MetricField flat = flat_metric(fgrid);
  for (Face f : {Face::lower, Face::upper}) {
    const FaceField II = second_fundamental_form(flat, f);
    for (double v : II.data()) CHECK(v == 0.0);
  }

  const HopfBand band;
  double errs[2];
  int level = 0;
  for (int nx : {24, 48}) {
    GridPtr grid = make_grid({8, 8, nx});
    const MetricField g = band.metric(grid);
    double err = 0.0;
    for (Face f : {Face::lower, Face::upper}) {
      const FaceField II = second_fundamental_form(g, f);
      for (std::size_t k = 0; k < II.count(); ++k)
        for (int a = 0; a < 2; ++a)
          for (int b = a; b < 2; ++b)
            err = std::max(err, std::abs(II.at(k, sym_index(2, a, b)) - band.II(f, a, b)));
    }
    errs[level++] = err;
  }
  CHECK(errs[1] <= 0.05 * HopfBand::C);
  CHECK(slope2(errs[0], errs[1]) >= 1.8);

  // II(c g) = sqrt(c) II(g) to round-off.
  GridPtr grid = make_grid({6, 6, 12});
  const MetricField g = band.metric(grid);
  const double c = 2.37;
  for (Face f : {Face::lower, Face::upper}) {
    const FaceField II = second_fundamental_form(g, f);
    const FaceField IIc = second_fundamental_form(scaled(g, c), f);
    double err = 0.0;
    for (std::size_t k = 0; k < II.data().size(); ++k)
      err = std::max(err, std::abs(IIc.data()[k] - std::sqrt(c) * II.data()[k]));
    CHECK(err <= 1e-10 * HopfBand::C);
  }
}

TEST_CASE("mean_curvature: flat band, symmetric Hopf band constants, scaling law") {
  GridPtr fgrid = make_grid({6, 6, 8});
  const MetricField flat = flat_metric(fgrid);
  for (Face f : {Face::lower, Face::upper}) {
    const FaceField h = mean_curvature(flat, f);
    for (double v : h.data()) CHECK(v == 0.0);
  }

  const HopfBand band;
  GridPtr grid = make_grid({8, 8, 48});
  const MetricField g = band.metric(grid);
  const FaceField h_lower = mean_curvature(g, Face::lower);
  const FaceField h_upper = mean_curvature(g, Face::upper);
  const double h = grid->spacing(grid->transverse_axis());
  for (std::size_t k = 0; k < h_lower.count(); ++k) {
    CHECK(h_lower.at(k, 0) == doctest::Approx(band.mean_curv()).epsilon(20.0 * h * h));
    // mirror symmetry of the band: both faces carry the same constant
    CHECK(std::abs(h_lower.at(k, 0) - h_upper.at(k, 0)) <= 1e-12);
  }

  const double c = 3.1;
  const FaceField hc = mean_curvature(scaled(g, c), Face::upper);
  for (std::size_t k = 0; k < hc.count(); ++k)
    CHECK(hc.at(k, 0) == doctest::Approx(h_upper.at(k, 0) / std::sqrt(c)).epsilon(1e-10));
}

TEST_CASE("deturck_covector: vanishing cases and independent formula check") {
  const HopfBand band;
  GridPtr grid = make_grid({8, 8, 12});
  const MetricField ghat = band.metric(grid);

  CHECK(sup_norm(deturck_covector(ghat, ghat)) <= 1e-10);
  CHECK(sup_norm(deturck_covector(scaled(ghat, 2.7), ghat)) <= 1e-10);

  const MetricField gbar = perturbed_adapted(ghat, 5, 0.05);
  const ChristoffelField gb = christoffel(gbar);
  const ChristoffelField gh = christoffel(ghat);
  const CovectorField P = deturck_covector(gbar, gb, gh);
  const int n = 3;
  double err = 0.0;
  for (std::size_t node = 0; node < grid->num_nodes(); ++node)
    for (int i = 0; i < n; ++i) {
      double ref = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            ref += gbar.components().s(node, i, j) * gbar.inverse().s(node, k, l) *
                   (gb.g(node, j, k, l) - gh.g(node, j, k, l));
      err = std::max(err, std::abs(P.v(node, i) - ref));
    }
  CHECK(err <= 1e-12 * std::max(1.0, sup_norm(P)));
}

TEST_CASE("deturck_correction: zero field, flat analytic oracle, symmetry") {
  GridPtr grid = make_grid({32, 10});
  const MetricField flat = flat_metric(grid);
  CHECK(sup_norm(deturck_correction(flat, CovectorField(grid))) == 0.0);

  CovectorField P(grid);
  for (std::size_t node = 0; node < grid->num_nodes(); ++node)
    P.v(node, 1) = std::sin(2.0 * kPi * grid->axis_coord(node, 0));
  const Sym2Field Q = deturck_correction(flat, P);
  double err = 0.0;
  for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
    const double ref = 2.0 * kPi * std::cos(2.0 * kPi * grid->axis_coord(node, 0));
    err = std::max(err, std::abs(Q.s(node, 0, 1) - ref));
    err = std::max(err, std::abs(Q.s(node, 0, 0)));
  }
  CHECK(err <= std::pow(2.0 * kPi, 3) * grid->spacing(0) * grid->spacing(0));
  // stored symmetric by construction
  CHECK(Q.s(5, 0, 1) == Q.s(5, 1, 0));
}

TEST_CASE("rdt_rhs_direct: flat zero, constant-curvature band, equivalence") {
  GridPtr fgrid = make_grid({6, 6, 8});
  const MetricField flat = flat_metric(fgrid);
  CHECK(sup_norm(rdt_rhs_direct({flat, flat, 0.0})) <= 1e-12);

  const HopfBand band;
  GridPtr grid = make_grid({8, 8, 48});
  const MetricField g = band.metric(grid);
  const Sym2Field rhs = rdt_rhs_direct({g, g, 0.0});
  double err = 0.0;
  for (std::size_t k = 0; k < rhs.data().size(); ++k)
    err = std::max(err, std::abs(rhs.data()[k] + 4.0 * g.components().data()[k]));
  CHECK(err <= 0.1 * HopfBand::C);  // -2 Ric(ghat) = -4 ghat within O(h^2)

  const MetricField gbar = perturbed_adapted(g, 9, 0.05);
  const Sym2Field direct = rdt_rhs_direct({gbar, g, 0.0});
  const Sym2Field parab = rdt_rhs_parabolic({gbar, g, 0.0});
  CHECK(sup_norm_diff(direct, parab) <= 1e-10 * std::max(1.0, sup_norm(direct)));
}

TEST_CASE("rdt_rhs_parabolic: lower-order map reduces to -2 Ric at ghat") {
  const HopfBand band;
  GridPtr grid = make_grid({8, 8, 24});
  const MetricField g = band.metric(grid);

  const ChristoffelField gh = christoffel(g);
  const Sym2Field principal =
      laplacian_like(g.inverse(), second_covariant_sym2(g.components(), gh));
  // nabla ghat = 0 discretely, so the principal term vanishes to round-off and
  // R(ghat, nabla ghat) = -2 Ric(ghat).
  CHECK(sup_norm(principal) <= 1e-8);
  const Sym2Field parab = rdt_rhs_parabolic({g, g, 0.0});
  Sym2Field ric = ricci(g);
  double err = 0.0;
  for (std::size_t k = 0; k < ric.data().size(); ++k)
    err = std::max(err, std::abs(parab.data()[k] + 2.0 * ric.data()[k]));
  CHECK(err <= 1e-8);

  GridPtr fgrid = make_grid({6, 6, 8});
  const MetricField flat = flat_metric(fgrid);
  CHECK(sup_norm(rdt_rhs_parabolic({flat, flat, 0.0})) <= 1e-12);
}

TEST_CASE("rdt_rhs_parabolic: first-order dependence probe") {
  // Perturb second derivatives at a marked node while holding the value and
  // first derivatives there; the lower-order map R must respond O(h^2).
  // All axes refine together: the probe varies in every direction.
  const HopfBand band;
  double response[2];
  int level = 0;
  for (int nx : {16, 32}) {
    GridPtr grid = make_grid({nx / 2, nx / 2, nx});
    const MetricField ghat = band.metric(grid);
    const MetricField gbar = perturbed_adapted(ghat, 13, 0.04);

    const int t = grid->transverse_axis();
    int multi[3] = {nx / 4, nx / 8, nx / 2};
    const std::size_t node0 = grid->index(std::span<const int>(multi, 3));
    double x0[3];
    grid->coords(node0, std::span<double>(x0, 3));

    const double eps = 1e-3;
    Sym2Field pert = gbar.components();
    for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
      double bump = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double dxa = grid->axis_coord(node, a) - x0[a];
        bump += (a == t) ? (dxa * dxa) * std::cos(kPi * grid->axis_coord(node, a))
                         : 1.0 - std::cos(2.0 * kPi * dxa);
      }
      for (int i = 0; i < 3; ++i) pert.s(node, i, i) += eps * bump;
    }
    const MetricField gp(std::move(pert));

    auto lower_order = [&](const MetricField& m) {
      const ChristoffelField gh = christoffel(ghat);
      const Sym2Field principal =
          laplacian_like(m.inverse(), second_covariant_sym2(m.components(), gh));
      Sym2Field R = rdt_rhs_direct({m, ghat, 0.0});
      for (std::size_t k = 0; k < R.data().size(); ++k) R.data()[k] -= principal.data()[k];
      return R;
    };
    const Sym2Field r0 = lower_order(gbar);
    const Sym2Field r1 = lower_order(gp);
    double resp = 0.0;
    for (int c = 0; c < r0.ncomp(); ++c)
      resp = std::max(resp, std::abs(r1.at(node0, c) - r0.at(node0, c)));
    response[level++] = resp / eps;
  }
  // second-order decay of the pointwise response at the marked node
  CHECK(slope2(response[0], response[1]) >= 1.5);
}

TEST_CASE("zeta and chi: structural zeros, compatibility identities, self-similarity") {
  const HopfBand band;
  GridPtr grid = make_grid({8, 8, 16});
  const MetricField ghat = band.metric(grid);
  const MuFunction mu_one = MuFunction::one();

  // zeta(ghat) = chi(ghat) = 0 at t = 0.
  for (Face f : {Face::lower, Face::upper}) {
    const FaceField z = zeta_map({ghat, ghat, 0.0}, mu_one, f);
    const FaceField c = chi_map({ghat, ghat, 0.0}, f);
    for (double v : z.data()) CHECK(std::abs(v) <= 1e-12);
    for (double v : c.data()) CHECK(std::abs(v) <= 1e-12);
  }

  // Self-similar consistency: gbar = c ghat with mu = c^{-1/2}.
  const double c0 = 0.64;
  const MuFunction mu_c{[c0](double) { return 1.0 / std::sqrt(c0); }};
  for (Face f : {Face::lower, Face::upper}) {
    const FaceField z = zeta_map({scaled(ghat, c0), ghat, 0.0}, mu_c, f);
    for (double v : z.data()) CHECK(std::abs(v) <= 1e-10);
  }

  // Mixed components vanish for arbitrary admissible inputs, both variants.
  const MetricField gbar = perturbed_adapted(ghat, 21, 0.1);
  const int n = 3, t = grid->transverse_axis();
  for (Face f : {Face::lower, Face::upper})
    for (ZetaVariant var : {ZetaVariant::derived, ZetaVariant::verbatim}) {
      const FaceField z = zeta_map({gbar, ghat, 0.1}, MuFunction{[](double t2) { return 1.0 + t2; }},
                                   f, var);
      const FaceField ch = chi_map({gbar, ghat, 0.1}, f, var);
      for (std::size_t k = 0; k < z.count(); ++k)
        for (int a = 0; a < n; ++a) {
          if (a == t) continue;
          CHECK(z.at(k, sym_index(n, a, t)) == 0.0);
          CHECK(ch.at(k, sym_index(n, a, t)) == 0.0);
        }
    }

  // The square-root variants agree exactly on the constraint surface
  // (adapted states) and differ off it.
  for (Face f : {Face::lower, Face::upper}) {
    const FaceField zd = zeta_map({gbar, ghat, 0.1}, mu_one, f, ZetaVariant::derived);
    const FaceField zv = zeta_map({gbar, ghat, 0.1}, mu_one, f, ZetaVariant::verbatim);
    double diff = 0.0;
    for (std::size_t k = 0; k < zd.data().size(); ++k)
      diff = std::max(diff, std::abs(zd.data()[k] - zv.data()[k]));
    CHECK(diff <= 1e-9);
  }
  Sym2Field off = gbar.components();
  for (std::size_t node = 0; node < grid->num_nodes(); ++node) off.s(node, 0, t) += 0.3;
  const MetricField goff(std::move(off));
  REQUIRE(min_spd_margin(goff.components()) > 0.0);
  double diff_off = 0.0;
  for (Face f : {Face::lower, Face::upper}) {
    const FaceField zd = zeta_map({goff, ghat, 0.1}, mu_one, f, ZetaVariant::derived);
    const FaceField zv = zeta_map({goff, ghat, 0.1}, mu_one, f, ZetaVariant::verbatim);
    for (std::size_t k = 0; k < zd.data().size(); ++k)
      diff_off = std::max(diff_off, std::abs(zd.data()[k] - zv.data()[k]));
  }
  CHECK(diff_off > 1e-6);
}

TEST_CASE("chi vanishes identically on a flat band for every SPD state") {
  GridPtr grid = make_grid({6, 6, 10});
  const MetricField ghat = flat_metric(grid);
  const MetricField gbar = perturbed_adapted(ghat, 33, 0.2);
  for (Face f : {Face::lower, Face::upper}) {
    const FaceField c = chi_map({gbar, ghat, 0.0}, f);
    for (double v : c.data()) CHECK(std::abs(v) <= 1e-14);
  }
}

TEST_CASE("rdt_problem_spec: compatibility, parabolicity constant, adaptedness guard") {
  const HopfBand band;
  GridPtr grid = make_grid({8, 8, 16});
  const MetricField ghat = band.metric(grid);

  RdtProblem prob = rdt_problem_spec(ghat, RdtMode::mean_curvature,
                                     MuFunction{[](double t) { return 1.0 / std::sqrt(1.0 - 4.0 * t); }});
  auto [dres, nres] = check_compatibility(prob.spec);
  CHECK(dres <= 1e-10);
  CHECK(nres <= 1e-10);

  const SectionField samples[] = {prob.spec.u0};
  const double times[] = {0.0};
  const double c1 = check_parabolicity(prob.spec, samples, times);
  CHECK(c1 == doctest::Approx(min_spd_margin(ghat.inverse())).epsilon(1e-10));

  Sym2Field bad = ghat.components();
  for (std::size_t k = 0; k < grid->face_num_nodes(); ++k)
    bad.s(grid->face_node(Face::lower, k), 0, grid->transverse_axis()) = 0.05;
  CHECK_THROWS_AS((void)rdt_problem_spec(MetricField(std::move(bad)), RdtMode::mean_curvature),
                  AdaptedChartViolation);
}

TEST_CASE("evolve_rdt: flat stationarity and exact Dirichlet block, small scale") {
  GridPtr grid = make_grid({6, 6, 8});
  const MetricField ghat = flat_metric(grid);
  SolverConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 1e-3;
  const RdtRun run = evolve_rdt(ghat, RdtMode::mean_curvature, MuFunction::one(), cfg);
  REQUIRE(run.trace.ok());
  double drift = 0.0;
  for (const auto& f : run.trace.fields) drift = std::max(drift, sup_norm_diff(f, run.trace.fields[0]));
  CHECK(drift <= 1e-9);
  for (const auto& d : run.trace.diag) {
    CHECK(d.bc_dirichlet_res <= 1e-13);
    if (std::isfinite(d.p_tangency_res)) CHECK(d.p_tangency_res <= 1e-10);
  }
}

TEST_CASE("evolve_rdt: shrinking band tracks (1 - 4t) ghat at reduced scale") {
  const HopfBand band;
  GridPtr grid = make_grid({8, 8, 16});
  const MetricField ghat = band.metric(grid);
  SolverConfig cfg;
  cfg.dt = 5e-4;
  cfg.t_end = 5e-3;
  const RdtRun run = evolve_rdt(ghat, RdtMode::mean_curvature,
                                MuFunction{[](double t) { return 1.0 / std::sqrt(1.0 - 4.0 * t); }}, cfg);
  REQUIRE(run.trace.ok());
  double err = 0.0;
  for (std::size_t s = 0; s < run.trace.steps(); ++s) {
    const double shrink = 1.0 - 4.0 * run.trace.times[s];
    for (std::size_t k = 0; k < run.trace.fields[s].data().size(); ++k)
      err = std::max(err, std::abs(run.trace.fields[s].data()[k] -
                                   shrink * ghat.components().data()[k]));
  }
  CHECK(err <= 2e-2 * sup_norm(ghat.components()));
  // Dirichlet block exact at every accepted step.
  const int t = grid->transverse_axis();
  for (const auto& f : run.trace.fields)
    for (Face face : {Face::lower, Face::upper})
      for (std::size_t k = 0; k < grid->face_num_nodes(); ++k) {
        const std::size_t node = grid->face_node(face, k);
        for (int a = 0; a < 3; ++a)
          if (a != t) CHECK(std::abs(f.at(node, sym_index(3, a, t))) <= 1e-11);
      }
}
