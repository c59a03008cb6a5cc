#include <doctest.h>

#include <cmath>

#include "gflow/scenarios.hpp"
#include "test_helpers.hpp"

using namespace gflow;
using namespace gflow::testing;

TEST_CASE("registry: every scenario self-checks at construction") {
  for (const std::string& name : scenario_names()) {
    CAPTURE(name);
    Json p = Json::object();
    if (name == "s3_band" || name == "warped_bowl") p = Json{{"transverse", 16}, {"tangential", 8}};
    if (name == "rdt_flat") p = Json{{"nodes", 8}};
    if (name == "heat_dirichlet" || name == "heat_neumann_manufactured") p = Json{{"nodes", 24}};
    if (name == "coupled_mixed_bc") p = Json{{"nodes", 16}};
    const Scenario sc = build_scenario(name, p);
    CHECK(sc.c1 > 0.0);
    const double h = sc.grid->max_spacing();
    const double threshold = sc.spec.compat_threshold > 0 ? sc.spec.compat_threshold
                                                          : std::max(1e-8, 5.0 * h * h);
    CHECK(sc.compat_dirichlet <= threshold);
    CHECK(sc.compat_neumann <= threshold);
    // exact geometries sit far below the manufactured threshold
    if (name != "heat_neumann_manufactured") CHECK(sc.compat_neumann <= 1e-8);
  }
  CHECK_THROWS_AS((void)build_scenario("no_such_scenario"), UnknownScenario);
}

TEST_CASE("s3_band: geometric identities of the fixture at t = 0") {
  Scenario sc = build_scenario("s3_band", Json{{"transverse", 32}, {"tangential", 8}, {"a", 0.2}});
  const MetricField& ghat = sc.rdt->ghat;
  const double scale = sup_norm(ghat.components());

  // Ric = 2 g within O(h^2).
  const Sym2Field ric = ricci(ghat);
  double err = 0.0;
  for (std::size_t k = 0; k < ric.data().size(); ++k)
    err = std::max(err, std::abs(ric.data()[k] - 2.0 * ghat.components().data()[k]));
  CHECK(err <= 0.01 * scale);

  // Constant mean curvature -tan(2a) on both faces, equal within 1e-12.
  const HopfBand band;
  const FaceField h_lower = mean_curvature(ghat, Face::lower);
  const FaceField h_upper = mean_curvature(ghat, Face::upper);
  const double ht = sc.grid->spacing(sc.grid->transverse_axis());
  for (std::size_t k = 0; k < h_lower.count(); ++k) {
    CHECK(std::abs(h_lower.at(k, 0) - band.mean_curv()) <= 20.0 * ht * ht);
    CHECK(std::abs(h_lower.at(k, 0) - h_upper.at(k, 0)) <= 1e-12);
    // constant along the face
    CHECK(std::abs(h_lower.at(k, 0) - h_lower.at(0, 0)) <= 1e-12);
  }
  CHECK(sc.rdt->H0_mean == doctest::Approx(band.mean_curv()).epsilon(1e-2));

  // II matches the closed form within O(h^2).
  for (Face f : {Face::lower, Face::upper}) {
    const FaceField II = sc.rdt->II_hat[static_cast<int>(f)];
    for (std::size_t k = 0; k < II.count(); ++k)
      for (int a = 0; a < 2; ++a)
        for (int b = a; b < 2; ++b)
          CHECK(std::abs(II.at(k, sym_index(2, a, b)) - band.II(f, a, b)) <=
                30.0 * ht * ht * HopfBand::C);
  }
}

TEST_CASE("warped_bowl: strictly convex faces with the closed-form margin") {
  Scenario sc = build_scenario("warped_bowl", Json{{"transverse", 32}, {"tangential", 8}});
  const WarpedBowl bowl;
  const double ht = sc.grid->spacing(sc.grid->transverse_axis());
  const FaceField& II_lower = sc.rdt->II_hat[0];
  const double min_eig = min_II_eigenvalue(II_lower, 3);
  CHECK(min_eig > 0.0);
  CHECK(min_eig == doctest::Approx(bowl.f(0.0) * std::abs(bowl.fp(0.0))).epsilon(50.0 * ht * ht));

  // Ricci closed form of the warped product, interior nodes.
  const Sym2Field ric = ricci(sc.rdt->ghat);
  double err = 0.0;
  for (std::size_t node = 0; node < sc.grid->num_nodes(); ++node) {
    const double r = sc.grid->axis_coord(node, sc.grid->transverse_axis());
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j)
        err = std::max(err, std::abs(ric.s(node, i, j) - bowl.ricci(r, i, j)));
  }
  CHECK(err <= 0.02);
}

TEST_CASE("manufacture: zero solution, oracle reproduction, inconsistency guard") {
  GridPtr grid = make_grid({24, 24});
  ProblemSpec skeleton;
  skeleton.grid = grid;
  skeleton.d = 1;
  skeleton.split = SubbundleSplit::first_components(1, 0, 0);
  skeleton.H = [](std::span<const double>, double, std::size_t, std::span<double> h) {
    h[0] = 1.0;
    h[1] = 0.0;
    h[2] = 1.0;
  };

  // u* = 0 keeps the skeleton's zero data.
  ManufacturedSolution zero;
  zero.d = 1;
  zero.value = [](std::span<const double>, double, std::span<double> o) { o[0] = 0.0; };
  zero.time_derivative = zero.value;
  zero.gradient = [](std::span<const double>, double, std::span<double> o) {
    std::fill(o.begin(), o.end(), 0.0);
  };
  zero.hessian = zero.gradient;
  const ProblemSpec zspec = manufacture(zero, skeleton);
  CHECK(sup_norm(zspec.u0) == 0.0);
  SolverConfig zcfg;
  zcfg.dt = 1e-3;
  zcfg.t_end = 5e-3;
  const FlowTrace ztrace = evolve(zspec, zcfg);
  REQUIRE(ztrace.ok());
  for (const auto& f : ztrace.fields) CHECK(sup_norm(f) == 0.0);

  // The documented example solution is reproduced within the A2 tolerance.
  ManufacturedSolution ms;
  ms.d = 1;
  ms.value = [](std::span<const double> x, double t, std::span<double> o) {
    o[0] = std::exp(-t) * std::cos(2.0 * kPi * x[0]) * std::cos(kPi * x[1]);
  };
  ms.time_derivative = [](std::span<const double> x, double t, std::span<double> o) {
    o[0] = -std::exp(-t) * std::cos(2.0 * kPi * x[0]) * std::cos(kPi * x[1]);
  };
  ms.gradient = [](std::span<const double> x, double t, std::span<double> o) {
    o[0] = -2.0 * kPi * std::exp(-t) * std::sin(2.0 * kPi * x[0]) * std::cos(kPi * x[1]);
    o[1] = -kPi * std::exp(-t) * std::cos(2.0 * kPi * x[0]) * std::sin(kPi * x[1]);
  };
  ms.hessian = [](std::span<const double> x, double t, std::span<double> o) {
    const double e = std::exp(-t);
    o[0] = -4.0 * kPi * kPi * e * std::cos(2.0 * kPi * x[0]) * std::cos(kPi * x[1]);
    o[1] = 2.0 * kPi * kPi * e * std::sin(2.0 * kPi * x[0]) * std::sin(kPi * x[1]);
    o[2] = o[1];
    o[3] = -kPi * kPi * e * std::cos(2.0 * kPi * x[0]) * std::cos(kPi * x[1]);
  };
  const ProblemSpec mspec = manufacture(ms, skeleton);
  auto [dres, nres] = check_compatibility(mspec);
  CHECK(dres <= 1e-12);
  CHECK(nres <= 1e-12);
  SolverConfig cfg;
  cfg.dt = 2e-4;
  cfg.t_end = 2e-2;
  const FlowTrace trace = evolve(mspec, cfg);
  REQUIRE(trace.ok());
  double err = 0.0;
  std::vector<double> x(2), ref(1);
  for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
    grid->coords(node, x);
    ms.value(x, trace.times.back(), ref);
    err = std::max(err, std::abs(trace.back().at(node, 0) - ref[0]));
  }
  CHECK(err <= 5e-3);

  // Nonzero Dirichlet block of u* trips the guard.
  ProblemSpec dirichlet_skeleton = skeleton;
  dirichlet_skeleton.split = SubbundleSplit::first_components(1, 1, 1);
  CHECK_THROWS_AS((void)manufacture(ms, dirichlet_skeleton), ManufactureInconsistent);
}

TEST_CASE("planted failure scenarios abort with the contracted errors") {
  {
    Scenario sc = build_scenario("heat_dirichlet", Json{{"nodes", 32}, {"plant_indefinite_h", true}});
    const FlowTrace trace = evolve(sc.spec, sc.default_config);
    REQUIRE_FALSE(trace.ok());
    CHECK(trace.failure->code == ErrorCode::not_parabolic);
  }
  {
    Scenario sc = build_scenario("heat_dirichlet", Json{{"nodes", 32}, {"dirichlet_violation", true}});
    const FlowTrace trace = evolve(sc.spec, sc.default_config);
    REQUIRE_FALSE(trace.ok());
    CHECK(trace.failure->code == ErrorCode::incompatible_data);
  }
}

TEST_CASE("references: scenario oracles agree with the initial data at t = 0") {
  for (const char* name : {"heat_dirichlet", "heat_neumann_manufactured", "s3_band", "rdt_flat"}) {
    CAPTURE(name);
    Json p = Json::object();
    if (std::string(name) == "s3_band") p = Json{{"transverse", 12}, {"tangential", 8}};
    if (std::string(name) == "rdt_flat") p = Json{{"nodes", 8}};
    if (std::string(name)[0] == 'h') p = Json{{"nodes", 16}};
    Scenario sc = build_scenario(name, p);
    REQUIRE(static_cast<bool>(sc.reference));
    std::vector<double> ref(sc.spec.d);
    double err = 0.0;
    for (std::size_t node = 0; node < sc.grid->num_nodes(); ++node) {
      sc.reference(0.0, node, ref);
      for (int m = 0; m < sc.spec.d; ++m)
        err = std::max(err, std::abs(sc.spec.u0.at(node, m) - ref[m]));
    }
    CHECK(err <= 1e-14);
  }
}
