#pragma once

#include <cstddef>

#include "gflow/fields.hpp"

namespace gflow {

// A one-dimensional difference stencil at a node: absolute node indices and weights.
struct Stencil {
  int n = 0;
  std::size_t idx[4];
  double w[4];
};

// Second-order first derivative: central on periodic axes and in the transverse
// interior, one-sided at the two transverse boundary layers. The one-sided
// weights are chosen with the same leading error term +h^2/6 f''' as the
// central stencil, so the pointwise error field stays smooth across the whole
// chart and composed second derivatives remain O(h^2) up to the faces.
inline Stencil d1_stencil(const ChartGrid& g, std::size_t node, int axis) {
  const double h = g.spacing(axis);
  Stencil s;
  if (!g.periodic(axis)) {
    const int i = g.axis_index(node, axis);
    const int last = g.size(axis) - 1;
    if (i == 0 || i == last) {
      const int d = (i == 0) ? 1 : -1;
      const double sg = static_cast<double>(d);
      s.n = 4;
      s.idx[0] = node;
      s.idx[1] = g.neighbor(node, axis, d);
      s.idx[2] = g.neighbor(node, axis, 2 * d);
      s.idx[3] = g.neighbor(node, axis, 3 * d);
      s.w[0] = sg * -2.0 / h;
      s.w[1] = sg * 3.5 / h;
      s.w[2] = sg * -2.0 / h;
      s.w[3] = sg * 0.5 / h;
      return s;
    }
  }
  s.n = 2;
  s.idx[0] = g.neighbor(node, axis, -1);
  s.idx[1] = g.neighbor(node, axis, 1);
  s.w[0] = -0.5 / h;
  s.w[1] = 0.5 / h;
  return s;
}

// Second-order pure second derivative along an axis.
inline Stencil d2_stencil(const ChartGrid& g, std::size_t node, int axis) {
  const double h2 = g.spacing(axis) * g.spacing(axis);
  Stencil s;
  if (!g.periodic(axis)) {
    const int i = g.axis_index(node, axis);
    const int last = g.size(axis) - 1;
    if (i == 0 || i == last) {
      const int d = (i == 0) ? 1 : -1;
      s.n = 4;
      s.idx[0] = node;
      s.idx[1] = g.neighbor(node, axis, d);
      s.idx[2] = g.neighbor(node, axis, 2 * d);
      s.idx[3] = g.neighbor(node, axis, 3 * d);
      s.w[0] = 2.0 / h2; s.w[1] = -5.0 / h2; s.w[2] = 4.0 / h2; s.w[3] = -1.0 / h2;
      return s;
    }
  }
  s.n = 3;
  s.idx[0] = g.neighbor(node, axis, -1);
  s.idx[1] = node;
  s.idx[2] = g.neighbor(node, axis, 1);
  s.w[0] = 1.0 / h2; s.w[1] = -2.0 / h2; s.w[2] = 1.0 / h2;
  return s;
}

// Discretization of the coordinate derivative of every component of a field.
Field partial_derivative(const Field& f, int axis);

}  // namespace gflow
