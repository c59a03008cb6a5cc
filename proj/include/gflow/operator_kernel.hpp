#pragma once

#include <cstring>
#include <span>
#include <vector>

#include "gflow/fd.hpp"
#include "gflow/problem.hpp"

namespace gflow {

// Discrete expansion of L = K^{ij} nabla_i nabla_j against the bundle connection:
//   L v = K^{ij} [ d_i d_j v + (d_i A_j) v + A_j d_i v + A_i d_j v + A_i A_j v
//                  - Gamma^k_{ij} (d_k v + A_k v) ].
// One entry generator backs the implicit matrix, the matrix-free application,
// the shifted-problem forcing, and the boundary flux; the Picard correction
// terms cancel at the fixed point because all of them agree.
//
// ScalarEmit(col_node, w): contribution w * delta_{mp}.
// BlockEmit(col_node, B, scale): contribution scale * B[m*d+p] with B a d x d matrix.
template <class ScalarEmit, class BlockEmit>
void op_entries(const ChartGrid& g, std::size_t node, int d, std::span<const double> K,
                const BundleGeometry& geom, std::vector<double>& scratch, ScalarEmit&& es,
                BlockEmit&& eb) {
  const int n = g.dim();
  const bool has_gamma = static_cast<bool>(geom.base_gamma);
  const bool has_fiber = !geom.fiber_conn.empty();

  // Pure second derivatives.
  for (int i = 0; i < n; ++i) {
    const double kii = K[sym_index(n, i, i)];
    if (kii != 0.0) {
      const Stencil s = d2_stencil(g, node, i);
      for (int a = 0; a < s.n; ++a) es(s.idx[a], kii * s.w[a]);
    }
    for (int j = i + 1; j < n; ++j) {
      const double kij = 2.0 * K[sym_index(n, i, j)];
      if (kij == 0.0) continue;
      const Stencil si = d1_stencil(g, node, i);
      for (int a = 0; a < si.n; ++a) {
        const Stencil sj = d1_stencil(g, si.idx[a], j);
        for (int b = 0; b < sj.n; ++b) es(sj.idx[b], kij * si.w[a] * sj.w[b]);
      }
    }
  }

  // Base-connection drift -K^{ij} Gamma^k_{ij} d_k.
  if (has_gamma) {
    const ChristoffelField& gam = *geom.base_gamma;
    for (int k = 0; k < n; ++k) {
      double bk = 0.0;
      for (int i = 0; i < n; ++i) {
        bk -= K[sym_index(n, i, i)] * gam.g(node, k, i, i);
        for (int j = i + 1; j < n; ++j) bk -= 2.0 * K[sym_index(n, i, j)] * gam.g(node, k, i, j);
      }
      if (bk == 0.0) continue;
      const Stencil s = d1_stencil(g, node, k);
      for (int a = 0; a < s.n; ++a) es(s.idx[a], bk * s.w[a]);
    }
  }

  if (!has_fiber) return;

  const int dd = d * d;
  scratch.assign(static_cast<std::size_t>(n + 2) * dd, 0.0);
  double* M1 = scratch.data();            // per axis i: 2 K^{ij} A_j
  double* M0 = scratch.data() + n * dd;   // zeroth-order block
  double* tmp = M0 + dd;

  auto axpy = [dd](double a, const double* x, double* y) {
    for (int r = 0; r < dd; ++r) y[r] += a * x[r];
  };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double kij = K[sym_index(n, i, j)];
      if (kij == 0.0) continue;
      const double* Aj = geom.fiber_conn[j].node_values(node).data();
      axpy(2.0 * kij, Aj, M1 + i * dd);

      // d_i A_j + A_i A_j - Gamma^k_{ij} A_k
      const double* dAij = geom.fiber_conn_grad[i * n + j].node_values(node).data();
      axpy(kij, dAij, M0);
      const double* Ai = geom.fiber_conn[i].node_values(node).data();
      std::memset(tmp, 0, sizeof(double) * dd);
      for (int r = 0; r < d; ++r)
        for (int q = 0; q < d; ++q) {
          const double a = Ai[r * d + q];
          if (a == 0.0) continue;
          for (int p = 0; p < d; ++p) tmp[r * d + p] += a * Aj[q * d + p];
        }
      axpy(kij, tmp, M0);
      if (has_gamma)
        for (int k = 0; k < n; ++k) {
          const double gk = geom.base_gamma->g(node, k, i, j);
          if (gk != 0.0) axpy(-kij * gk, geom.fiber_conn[k].node_values(node).data(), M0);
        }
    }

  for (int i = 0; i < n; ++i) {
    const Stencil s = d1_stencil(g, node, i);
    for (int a = 0; a < s.n; ++a) eb(s.idx[a], M1 + i * dd, s.w[a]);
  }
  eb(node, M0, 1.0);
}

// Outward conormal flux rows nu_i K^{ij} nabla_j at a face node: nu is the
// outward unit conormal of the background metric, a multiple of dx_n.
template <class ScalarEmit, class BlockEmit>
void conormal_entries(const ChartGrid& g, std::size_t node, Face face, [[maybe_unused]] int d,
                      std::span<const double> K, const BundleGeometry& geom, ScalarEmit&& es,
                      BlockEmit&& eb) {
  const int n = g.dim();
  const int t = g.transverse_axis();
  const double nu = outward_sign(face) * geom.conormal(face, g.face_ordinal(node));
  const bool has_fiber = !geom.fiber_conn.empty();
  for (int j = 0; j < n; ++j) {
    const double coef = nu * K[sym_index(n, t, j)];
    if (coef == 0.0) continue;
    const Stencil s = d1_stencil(g, node, j);
    for (int a = 0; a < s.n; ++a) es(s.idx[a], coef * s.w[a]);
    if (has_fiber) eb(node, geom.fiber_conn[j].node_values(node).data(), coef);
  }
}

// L w at interior nodes; boundary nodes are left zero.
SectionField apply_interior_operator(const Sym2Field& K, const BundleGeometry& geom,
                                     const SectionField& w);

// Unprojected flux nu_i K^{ij} nabla_j w at every node of a face.
FaceField apply_conormal_flux(const Sym2Field& K, const BundleGeometry& geom,
                              const SectionField& w, Face face);

// Covariant gradient (nabla w)_{j,m} = d_j w^m + A_j^{mp} w^p, ncomp = n*d.
Field covariant_gradient(int d, const BundleGeometry& geom, const SectionField& w);

// Uncontracted second covariant derivative (nabla nabla w)_{ij,m}, ncomp = n*n*d,
// with the same stencil composition the implicit matrix uses.
Field second_covariant_section(int d, const BundleGeometry& geom, const SectionField& w);

}  // namespace gflow
