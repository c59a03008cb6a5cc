#include "gflow/problem.hpp"

#include <cmath>

#include "gflow/operator_kernel.hpp"

namespace gflow {

BundleGeometry make_sym2_geometry(const MetricField& ghat,
                                  std::shared_ptr<const ChristoffelField> gamma_hat) {
  const ChartGrid& g = ghat.grid();
  const int n = g.dim();
  const int d = sym_count(n);

  BundleGeometry geom;
  geom.base_gamma = gamma_hat;

  geom.fiber_conn.reserve(n);
  for (int j = 0; j < n; ++j) {
    Field A(ghat.grid_ptr(), d * d, 0.0);
    for (std::size_t node = 0; node < g.num_nodes(); ++node) {
      auto a = A.node_values(node);
      for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) {
          const int row = sym_index(n, k, l);
          for (int p = 0; p < n; ++p) {
            a[row * d + sym_index(n, p, l)] -= gamma_hat->g(node, p, j, k);
            a[row * d + sym_index(n, k, p)] -= gamma_hat->g(node, p, j, l);
          }
        }
    }
    geom.fiber_conn.push_back(std::move(A));
  }

  geom.fiber_conn_grad.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) geom.fiber_conn_grad.push_back(partial_derivative(geom.fiber_conn[j], i));

  const Sym2Field& ginv = ghat.inverse();
  const int t = g.transverse_axis();
  for (int f = 0; f < 2; ++f) {
    auto& scale = geom.conormal_scale[f];
    scale.resize(g.face_num_nodes());
    for (std::size_t k = 0; k < g.face_num_nodes(); ++k) {
      const std::size_t node = g.face_node(static_cast<Face>(f), k);
      scale[k] = 1.0 / std::sqrt(ginv.at(node, sym_index(n, t, t)));
    }
  }
  return geom;
}

FFieldCallback wrap_pointwise_f(int d, FPointCallback f) {
  return [d, f = std::move(f)](const SectionField& w, const Field& grad_w, double t,
                               SectionField& out) {
    for (std::size_t node = 0; node < w.num_nodes(); ++node)
      f(w.node_values(node), grad_w.node_values(node), t, node, out.node_values(node));
  };
}

Sym2Field eval_h_field(const ProblemSpec& spec, const SectionField& w, double t) {
  Sym2Field K(spec.grid);
  for (std::size_t node = 0; node < spec.grid->num_nodes(); ++node)
    spec.H(w.node_values(node), t, node, K.node_values(node));
  return K;
}

}  // namespace gflow
