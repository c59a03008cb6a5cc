#include "gflow/operator_kernel.hpp"

namespace gflow {

SectionField apply_interior_operator(const Sym2Field& K, const BundleGeometry& geom,
                                     const SectionField& w) {
  const ChartGrid& g = w.grid();
  const int d = w.ncomp();
  SectionField out(w.grid_ptr(), d, 0.0);
  std::vector<double> scratch;
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    if (g.on_boundary(node)) continue;
    auto row = out.node_values(node);
    op_entries(
        g, node, d, K.node_values(node), geom, scratch,
        [&](std::size_t col, double wt) {
          const auto v = w.node_values(col);
          for (int m = 0; m < d; ++m) row[m] += wt * v[m];
        },
        [&](std::size_t col, const double* B, double scale) {
          const auto v = w.node_values(col);
          for (int m = 0; m < d; ++m) {
            double acc = 0.0;
            for (int p = 0; p < d; ++p) acc += B[m * d + p] * v[p];
            row[m] += scale * acc;
          }
        });
  }
  return out;
}

FaceField apply_conormal_flux(const Sym2Field& K, const BundleGeometry& geom, const SectionField& w,
                              Face face) {
  const ChartGrid& g = w.grid();
  const int d = w.ncomp();
  FaceField out(g.face_num_nodes(), d, 0.0);
  for (std::size_t k = 0; k < g.face_num_nodes(); ++k) {
    const std::size_t node = g.face_node(face, k);
    auto row = out.node_values(k);
    conormal_entries(
        g, node, face, d, K.node_values(node), geom,
        [&](std::size_t col, double wt) {
          const auto v = w.node_values(col);
          for (int m = 0; m < d; ++m) row[m] += wt * v[m];
        },
        [&](std::size_t col, const double* B, double scale) {
          const auto v = w.node_values(col);
          for (int m = 0; m < d; ++m) {
            double acc = 0.0;
            for (int p = 0; p < d; ++p) acc += B[m * d + p] * v[p];
            row[m] += scale * acc;
          }
        });
  }
  return out;
}

Field covariant_gradient(int d, const BundleGeometry& geom, const SectionField& w) {
  const ChartGrid& g = w.grid();
  const int n = g.dim();
  Field out(w.grid_ptr(), n * d, 0.0);
  const bool has_fiber = !geom.fiber_conn.empty();
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    auto row = out.node_values(node);
    for (int j = 0; j < n; ++j) {
      const Stencil s = d1_stencil(g, node, j);
      for (int a = 0; a < s.n; ++a) {
        const auto v = w.node_values(s.idx[a]);
        for (int m = 0; m < d; ++m) row[j * d + m] += s.w[a] * v[m];
      }
      if (has_fiber) {
        const double* A = geom.fiber_conn[j].node_values(node).data();
        const auto v = w.node_values(node);
        for (int m = 0; m < d; ++m) {
          double acc = 0.0;
          for (int p = 0; p < d; ++p) acc += A[m * d + p] * v[p];
          row[j * d + m] += acc;
        }
      }
    }
  }
  return out;
}

Field second_covariant_section(int d, const BundleGeometry& geom, const SectionField& w) {
  const ChartGrid& g = w.grid();
  const int n = g.dim();
  Field out(w.grid_ptr(), n * n * d, 0.0);
  const bool has_gamma = static_cast<bool>(geom.base_gamma);
  const bool has_fiber = !geom.fiber_conn.empty();

  const Field grad = covariant_gradient(d, geom, w);  // (k,m) covariant first derivative

  std::vector<double> acc(d);
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    auto row = out.node_values(node);
    const auto wv = w.node_values(node);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::fill(acc.begin(), acc.end(), 0.0);
        // d_i d_j w with the matrix's stencil composition
        if (i == j) {
          const Stencil s = d2_stencil(g, node, i);
          for (int a = 0; a < s.n; ++a) {
            const auto v = w.node_values(s.idx[a]);
            for (int m = 0; m < d; ++m) acc[m] += s.w[a] * v[m];
          }
        } else {
          const Stencil si = d1_stencil(g, node, i);
          for (int a = 0; a < si.n; ++a) {
            const Stencil sj = d1_stencil(g, si.idx[a], j);
            for (int b = 0; b < sj.n; ++b) {
              const auto v = w.node_values(sj.idx[b]);
              for (int m = 0; m < d; ++m) acc[m] += si.w[a] * sj.w[b] * v[m];
            }
          }
        }
        if (has_fiber) {
          const double* dAij = geom.fiber_conn_grad[i * n + j].node_values(node).data();
          const double* Ai = geom.fiber_conn[i].node_values(node).data();
          const double* Aj = geom.fiber_conn[j].node_values(node).data();
          for (int m = 0; m < d; ++m) {
            double e = 0.0;
            for (int p = 0; p < d; ++p) {
              e += dAij[m * d + p] * wv[p];
              e += Ai[m * d + p] * grad.at(node, j * d + p);  // A_i d_j w + A_i A_j w
              e += Aj[m * d + p] * grad.at(node, i * d + p);  // A_j d_i w + A_j A_i w
            }
            // A_j A_i w entered twice through the gradients above; remove one copy.
            for (int p = 0; p < d; ++p) {
              double s = 0.0;
              for (int q = 0; q < d; ++q) s += Ai[p * d + q] * wv[q];
              e -= Aj[m * d + p] * s;
            }
            acc[m] += e;
          }
        }
        if (has_gamma) {
          for (int k = 0; k < n; ++k) {
            const double gk = geom.base_gamma->g(node, k, i, j);
            if (gk == 0.0) continue;
            for (int m = 0; m < d; ++m) acc[m] -= gk * grad.at(node, k * d + m);
          }
        }
        for (int m = 0; m < d; ++m) row[(i * n + j) * d + m] = acc[m];
      }
  }
  return out;
}

}  // namespace gflow
