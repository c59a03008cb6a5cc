#include "gflow/fd.hpp"

namespace gflow {

Field partial_derivative(const Field& f, int axis) {
  const ChartGrid& g = f.grid();
  Field out(f.grid_ptr(), f.ncomp());
  const int nc = f.ncomp();
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    const Stencil s = d1_stencil(g, node, axis);
    for (int c = 0; c < nc; ++c) {
      double acc = 0.0;
      for (int k = 0; k < s.n; ++k) acc += s.w[k] * f.at(s.idx[k], c);
      out.at(node, c) = acc;
    }
  }
  return out;
}

}  // namespace gflow
