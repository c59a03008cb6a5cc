#include "gflow/tensor_calculus.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "gflow/errors.hpp"

namespace gflow {

namespace {

Eigen::MatrixXd unpack_sym(int n, std::span<const double> sym) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = sym[sym_index(n, i, j)];
  return m;
}

}  // namespace

void sym_invert(int n, std::span<const double> sym, std::span<double> out, std::size_t node_for_error) {
  Eigen::MatrixXd m = unpack_sym(n, sym);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(node_for_error);
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out[sym_index(n, i, j)] = 0.5 * (inv(i, j) + inv(j, i));
}

double sym_min_eigenvalue(int n, std::span<const double> sym) {
  Eigen::MatrixXd m = unpack_sym(n, sym);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (n <= 3)
    es.computeDirect(m, Eigen::EigenvaluesOnly);
  else
    es.compute(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Sym2Field metric_inverse(const Sym2Field& g) {
  Sym2Field out(g.grid_ptr());
  for (std::size_t node = 0; node < g.num_nodes(); ++node)
    sym_invert(g.grid().dim(), g.node_values(node), out.node_values(node), node);
  return out;
}

ChristoffelField christoffel(const MetricField& g) {
  const ChartGrid& grid = g.grid();
  const int n = grid.dim();
  const Sym2Field& ginv = g.inverse();

  std::vector<Field> dg;
  dg.reserve(n);
  for (int a = 0; a < n; ++a) dg.push_back(partial_derivative(g.components(), a));

  ChristoffelField out(g.grid_ptr());
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double acc = 0.0;
          for (int l = 0; l < n; ++l) {
            const double term = dg[i].at(node, sym_index(n, j, l)) +
                                dg[j].at(node, sym_index(n, i, l)) -
                                dg[l].at(node, sym_index(n, i, j));
            acc += ginv.at(node, sym_index(n, k, l)) * term;
          }
          out.g(node, k, i, j) = 0.5 * acc;
        }
  }
  return out;
}

Sym2Field ricci(const MetricField& g) {
  const ChartGrid& grid = g.grid();
  const int n = grid.dim();
  const ChristoffelField gamma = christoffel(g);

  std::vector<Field> dgamma;
  dgamma.reserve(n);
  for (int a = 0; a < n; ++a) dgamma.push_back(partial_derivative(gamma, a));

  const int nsym = sym_count(n);
  auto dG = [&](std::size_t node, int a, int k, int i, int j) {
    return dgamma[a].at(node, k * nsym + sym_index(n, i, j));
  };

  Sym2Field out(g.grid_ptr());
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    auto entry = [&](int j, int k) {
      double r = 0.0;
      for (int i = 0; i < n; ++i) {
        r += dG(node, i, i, j, k) - dG(node, j, i, i, k);
        for (int p = 0; p < n; ++p)
          r += gamma.g(node, i, i, p) * gamma.g(node, p, j, k) -
               gamma.g(node, i, j, p) * gamma.g(node, p, i, k);
      }
      return r;
    };
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) out.s(node, j, k) = 0.5 * (entry(j, k) + entry(k, j));
  }
  return out;
}

Tensor3Field covariant_derivative_sym2(const Sym2Field& T, const ChristoffelField& gamma) {
  const ChartGrid& grid = T.grid();
  const int n = grid.dim();

  std::vector<Field> dT;
  dT.reserve(n);
  for (int a = 0; a < n; ++a) dT.push_back(partial_derivative(T, a));

  Tensor3Field out(T.grid_ptr());
  for (std::size_t node = 0; node < grid.num_nodes(); ++node)
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double acc = dT[a].at(node, sym_index(n, i, j));
          for (int p = 0; p < n; ++p)
            acc -= gamma.g(node, p, a, i) * T.at(node, sym_index(n, p, j)) +
                   gamma.g(node, p, a, j) * T.at(node, sym_index(n, i, p));
          out.t(node, a, i, j) = acc;
        }
  return out;
}

Tensor4Field second_covariant_sym2(const Sym2Field& T, const ChristoffelField& gamma) {
  const ChartGrid& grid = T.grid();
  const int n = grid.dim();
  const int nsym = sym_count(n);
  const Tensor3Field dT = covariant_derivative_sym2(T, gamma);

  std::vector<Field> ddT;
  ddT.reserve(n);
  for (int a = 0; a < n; ++a) ddT.push_back(partial_derivative(dT, a));

  auto DT = [&](std::size_t node, int b, int i, int j) { return dT.t(node, b, i, j); };

  Tensor4Field out(T.grid_ptr());
  for (std::size_t node = 0; node < grid.num_nodes(); ++node)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double acc = ddT[a].at(node, b * nsym + sym_index(n, i, j));
            for (int p = 0; p < n; ++p)
              acc -= gamma.g(node, p, a, b) * DT(node, p, i, j) +
                     gamma.g(node, p, a, i) * DT(node, b, p, j) +
                     gamma.g(node, p, a, j) * DT(node, b, i, p);
            out.t(node, a, b, i, j) = acc;
          }
  return out;
}

Sym2Field laplacian_like(const Sym2Field& ginv, const Tensor4Field& ddT) {
  const ChartGrid& grid = ginv.grid();
  const int n = grid.dim();
  Sym2Field out(ginv.grid_ptr());
  for (std::size_t node = 0; node < grid.num_nodes(); ++node)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            acc += ginv.at(node, sym_index(n, a, b)) * ddT.t(node, a, b, i, j);
        out.s(node, i, j) = acc;
      }
  return out;
}

double sup_norm(const Field& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

double sup_norm_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

namespace {

double node_quadrature_weight(const ChartGrid& g, std::size_t node) {
  double w = g.cell_volume();
  if (g.on_boundary(node)) w *= 0.5;
  return w;
}

}  // namespace

double lq_norm(const Field& f, double q) {
  const ChartGrid& g = f.grid();
  double acc = 0.0;
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    const double w = node_quadrature_weight(g, node);
    for (double v : f.node_values(node)) acc += std::pow(std::abs(v), q) * w;
  }
  return std::pow(acc, 1.0 / q);
}

double discrete_lq_norm(std::span<const Field> steps, double dt, double q) {
  if (steps.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    double wt = dt;
    if (s == 0 || s + 1 == steps.size()) wt *= 0.5;
    const double ns = lq_norm(steps[s], q);
    acc += std::pow(ns, q) * wt;
  }
  return std::pow(acc, 1.0 / q);
}

ScalarField spd_margin(const Sym2Field& g) {
  ScalarField out(g.grid_ptr(), 1);
  const int n = g.grid().dim();
  for (std::size_t node = 0; node < g.num_nodes(); ++node)
    out.at(node, 0) = sym_min_eigenvalue(n, g.node_values(node));
  return out;
}

double min_spd_margin(const Sym2Field& g) {
  double m = std::numeric_limits<double>::infinity();
  const int n = g.grid().dim();
  for (std::size_t node = 0; node < g.num_nodes(); ++node)
    m = std::min(m, sym_min_eigenvalue(n, g.node_values(node)));
  return m;
}

}  // namespace gflow
