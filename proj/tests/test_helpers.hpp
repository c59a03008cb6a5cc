#pragma once

#include <cmath>
#include <random>

#include "gflow/tensor_calculus.hpp"

namespace gflow::testing {

inline constexpr double kPi = 3.14159265358979323846;

// Round unit S^3 in Hopf coordinates, theta in [pi/4 - a, pi/4 + a] mapped to
// the transverse chart coordinate; tangential coordinates are angles / 2 pi.
struct HopfBand {
  double a = 0.2;
  double theta0 = kPi / 4.0;
  static constexpr double C = 4.0 * kPi * kPi;

  double theta(double x) const { return theta0 - a + 2.0 * a * x; }

  MetricField metric(GridPtr grid) const {
    Sym2Field g(grid);
    const int t = grid->transverse_axis();
    for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
      const double th = theta(grid->axis_coord(node, t));
      g.s(node, 0, 0) = C * std::cos(th) * std::cos(th);
      g.s(node, 1, 1) = C * std::sin(th) * std::sin(th);
      g.s(node, t, t) = 4.0 * a * a;
    }
    return MetricField(std::move(g));
  }

  // Closed-form Christoffel symbols in chart components.
  double gamma(double x, int k, int i, int j) const {
    const double th = theta(x);
    const double c = std::cos(th), s = std::sin(th);
    auto is = [&](int kk, int ii, int jj) {
      return k == kk && ((i == ii && j == jj) || (i == jj && j == ii));
    };
    if (is(0, 0, 2)) return -2.0 * a * s / c;
    if (is(1, 1, 2)) return 2.0 * a * c / s;
    if (k == 2 && i == 0 && j == 0) return C * c * s / (2.0 * a);
    if (k == 2 && i == 1 && j == 1) return -C * c * s / (2.0 * a);
    return 0.0;
  }

  // Outward-face second fundamental form, tangential chart components.
  double II(Face f, int alpha, int beta) const {
    if (alpha != beta) return 0.0;
    const double th = theta(f == Face::lower ? 0.0 : 1.0);
    const double cs = std::cos(th) * std::sin(th);
    const double sign = outward_sign(f);
    return (alpha == 0 ? -1.0 : 1.0) * sign * C * cs;
  }

  double mean_curv() const { return -std::tan(2.0 * a); }
};

// Warped product dr^2 + f(r)^2 (dy1^2 + dy2^2), unit-period flat torus fibers.
struct WarpedBowl {
  double amp = 0.3;
  double f(double r) const { return 1.0 + amp * (r - 0.5) * (r - 0.5); }
  double fp(double r) const { return 2.0 * amp * (r - 0.5); }
  double fpp(double) const { return 2.0 * amp; }

  MetricField metric(GridPtr grid) const {
    Sym2Field g(grid);
    const int t = grid->transverse_axis();
    for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
      const double r = grid->axis_coord(node, t);
      g.s(node, 0, 0) = f(r) * f(r);
      g.s(node, 1, 1) = f(r) * f(r);
      g.s(node, t, t) = 1.0;
    }
    return MetricField(std::move(g));
  }

  double ricci(double r, int i, int j) const {
    if (i != j) return 0.0;
    if (i == 2) return -2.0 * fpp(r) / f(r);
    return -(f(r) * fpp(r) + fp(r) * fp(r));
  }

  double II(Face face, int alpha, int beta) const {
    if (alpha != beta) return 0.0;
    const double r = face == Face::lower ? 0.0 : 1.0;
    return outward_sign(face) * f(r) * fp(r);
  }
};

inline MetricField flat_metric(GridPtr grid) {
  Sym2Field g(grid);
  for (std::size_t node = 0; node < grid->num_nodes(); ++node)
    for (int i = 0; i < grid->dim(); ++i) g.s(node, i, i) = 1.0;
  return MetricField(std::move(g));
}

// Smooth deterministic pseudo-random symmetric field built from a few Fourier
// modes; periodic tangentially, polynomial x smooth transversally.
inline Sym2Field smooth_random_sym2(GridPtr grid, unsigned seed, double amp) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int n = grid->dim();
  const int t = grid->transverse_axis();
  Sym2Field out(grid);
  for (int c = 0; c < out.ncomp(); ++c) {
    const double a1 = unif(rng), a2 = unif(rng), ph = kPi * unif(rng);
    const int k1 = 1 + (rng() % 2), k2 = 1 + (rng() % 2);
    for (std::size_t node = 0; node < grid->num_nodes(); ++node) {
      double tang = 0.0;
      for (int ax = 0; ax < n; ++ax)
        if (ax != t) tang += (ax + 1) * grid->axis_coord(node, ax);
      const double xt = grid->axis_coord(node, t);
      out.at(node, c) = amp * (a1 * std::cos(2.0 * kPi * k1 * tang + ph) * std::cos(kPi * k2 * xt) +
                               a2 * (0.3 + xt * xt * (1.0 - xt)));
    }
  }
  return out;
}

inline MetricField random_spd_metric(GridPtr grid, unsigned seed, double amp = 0.2) {
  Sym2Field g = smooth_random_sym2(grid, seed, amp);
  for (std::size_t node = 0; node < grid->num_nodes(); ++node)
    for (int i = 0; i < grid->dim(); ++i) g.s(node, i, i) += 1.5;
  return MetricField(std::move(g));
}

inline double slope2(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace gflow::testing
