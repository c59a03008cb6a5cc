#include "gflow/boundary_geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace gflow {

namespace {

// Tangential first derivative of a face field, axis given by tangential index.
double face_d1(const ChartGrid& g, const FaceField& f, Face face, std::size_t k, int alpha, int c) {
  const int axis = g.tangential_axis(alpha);
  const std::size_t node = g.face_node(face, k);
  const std::size_t np = g.neighbor(node, axis, 1);
  const std::size_t nm = g.neighbor(node, axis, -1);
  const double h = g.spacing(axis);
  return (f.at(g.face_ordinal(np), c) - f.at(g.face_ordinal(nm), c)) / (2.0 * h);
}

}  // namespace

FaceField outward_unit_normal(const MetricField& g, Face face) {
  const ChartGrid& grid = g.grid();
  const int n = grid.dim();
  const int t = grid.transverse_axis();
  const Sym2Field& ginv = g.inverse();
  const int s = outward_sign(face);
  FaceField out(grid.face_num_nodes(), n);
  for (std::size_t k = 0; k < out.count(); ++k) {
    const std::size_t node = grid.face_node(face, k);
    const double gnn = ginv.at(node, sym_index(n, t, t));
    const double inv_len = 1.0 / std::sqrt(gnn);
    for (int i = 0; i < n; ++i)
      out.at(k, i) = s * ginv.at(node, sym_index(n, i, t)) * inv_len;
  }
  return out;
}

FaceField outward_unit_conormal(const MetricField& g, Face face) {
  const ChartGrid& grid = g.grid();
  const int n = grid.dim();
  const int t = grid.transverse_axis();
  const Sym2Field& ginv = g.inverse();
  const int s = outward_sign(face);
  FaceField out(grid.face_num_nodes(), n);
  for (std::size_t k = 0; k < out.count(); ++k) {
    const std::size_t node = grid.face_node(face, k);
    out.at(k, t) = s / std::sqrt(ginv.at(node, sym_index(n, t, t)));
  }
  return out;
}

FaceField second_fundamental_form(const MetricField& g, const ChristoffelField& gamma, Face face) {
  const ChartGrid& grid = g.grid();
  const int n = grid.dim();
  const int nb = n - 1;
  const FaceField ups = outward_unit_normal(g, face);
  FaceField out(grid.face_num_nodes(), sym_count(nb));

  for (std::size_t k = 0; k < out.count(); ++k) {
    const std::size_t node = grid.face_node(face, k);
    auto entry = [&](int alpha, int beta) {
      const int b_axis = grid.tangential_axis(beta);
      double acc = 0.0;
      for (int c = 0; c < n; ++c) {
        double dcov = face_d1(grid, ups, face, k, beta, c);
        for (int kk = 0; kk < n; ++kk) dcov += gamma.g(node, c, b_axis, kk) * ups.at(k, kk);
        acc += g.components().at(node, sym_index(n, grid.tangential_axis(alpha), c)) * dcov;
      }
      return acc;
    };
    for (int a = 0; a < nb; ++a)
      for (int b = a; b < nb; ++b)
        out.at(k, sym_index(nb, a, b)) = 0.5 * (entry(a, b) + entry(b, a));
  }
  return out;
}

FaceField second_fundamental_form(const MetricField& g, Face face) {
  return second_fundamental_form(g, christoffel(g), face);
}

FaceField mean_curvature(const MetricField& g, const ChristoffelField& gamma, Face face) {
  const ChartGrid& grid = g.grid();
  const int n = grid.dim();
  const int nb = n - 1;
  const Sym2Field& ginv = g.inverse();
  const FaceField II = second_fundamental_form(g, gamma, face);
  FaceField out(grid.face_num_nodes(), 1);
  for (std::size_t k = 0; k < out.count(); ++k) {
    const std::size_t node = grid.face_node(face, k);
    double acc = 0.0;
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b)
        acc += ginv.at(node, sym_index(n, grid.tangential_axis(a), grid.tangential_axis(b))) *
               II.at(k, sym_index(nb, a, b));
    out.at(k, 0) = acc / nb;
  }
  return out;
}

FaceField mean_curvature(const MetricField& g, Face face) {
  return mean_curvature(g, christoffel(g), face);
}

double min_II_eigenvalue(const FaceField& II, int n) {
  const int nb = n - 1;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < II.count(); ++k)
    m = std::min(m, sym_min_eigenvalue(nb, II.node_values(k)));
  return m;
}

BoundaryGeometry boundary_geometry(const MetricField& g, const ChristoffelField& gamma, Face face) {
  BoundaryGeometry b;
  b.unit_normal = outward_unit_normal(g, face);
  b.unit_conormal = outward_unit_conormal(g, face);
  b.second_fundamental = second_fundamental_form(g, gamma, face);
  b.mean_curv = mean_curvature(g, gamma, face);
  return b;
}

}  // namespace gflow
