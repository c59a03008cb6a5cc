#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gflow/errors.hpp"

namespace gflow {

inline constexpr int kMaxDim = 6;

enum class Face : int { lower = 0, upper = 1 };

inline int outward_sign(Face f) { return f == Face::lower ? -1 : +1; }
inline Face other_face(Face f) { return f == Face::lower ? Face::upper : Face::lower; }
inline const char* face_name(Face f) { return f == Face::lower ? "lower" : "upper"; }

// Single coordinate chart [0,1] x T^{n-1}: one non-periodic (transverse) axis
// spanning [0,1] with a boundary face at each end, all other axes periodic
// with period 1.
class ChartGrid {
public:
  explicit ChartGrid(std::vector<int> sizes, int transverse_axis = -1)
      : sizes_(std::move(sizes)), transverse_(transverse_axis) {
    const int n = static_cast<int>(sizes_.size());
    if (n < 1 || n > kMaxDim) throw ConfigError("grid dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    if (transverse_ < 0) transverse_ = n - 1;
    if (transverse_ >= n) throw ConfigError("transverse axis out of range");
    for (int s : sizes_)
      if (s < 4) throw ConfigError("grid sizes must be >= 4 per axis");
    spacing_.resize(n);
    for (int a = 0; a < n; ++a)
      spacing_[a] = periodic(a) ? 1.0 / sizes_[a] : 1.0 / (sizes_[a] - 1);
    stride_.assign(n, 1);
    for (int a = n - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * sizes_[a + 1];
    num_nodes_ = static_cast<std::size_t>(stride_[0]) * sizes_[0];
    face_nodes_ = num_nodes_ / sizes_[transverse_];
  }

  int dim() const { return static_cast<int>(sizes_.size()); }
  int size(int axis) const { return sizes_[axis]; }
  const std::vector<int>& sizes() const { return sizes_; }
  double spacing(int axis) const { return spacing_[axis]; }
  bool periodic(int axis) const { return axis != transverse_; }
  int transverse_axis() const { return transverse_; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t stride(int axis) const { return stride_[axis]; }

  int axis_index(std::size_t node, int axis) const {
    return static_cast<int>((node / stride_[axis]) % sizes_[axis]);
  }
  double axis_coord(std::size_t node, int axis) const { return axis_index(node, axis) * spacing_[axis]; }
  void coords(std::size_t node, std::span<double> x) const {
    for (int a = 0; a < dim(); ++a) x[a] = axis_coord(node, a);
  }

  std::size_t index(std::span<const int> multi) const {
    std::size_t r = 0;
    for (int a = 0; a < dim(); ++a) r += static_cast<std::size_t>(multi[a]) * stride_[a];
    return r;
  }

  // Neighbor along an axis; periodic axes wrap, the transverse axis must stay in range.
  std::size_t neighbor(std::size_t node, int axis, int step) const {
    int i = axis_index(node, axis) + step;
    const int s = sizes_[axis];
    if (periodic(axis)) {
      i %= s;
      if (i < 0) i += s;
    }
    return node + (static_cast<std::size_t>(i) - axis_index(node, axis)) * stride_[axis];
  }

  int transverse_index(std::size_t node) const { return axis_index(node, transverse_); }
  bool on_face(std::size_t node, Face f) const {
    const int i = transverse_index(node);
    return f == Face::lower ? i == 0 : i == sizes_[transverse_] - 1;
  }
  bool on_boundary(std::size_t node) const {
    const int i = transverse_index(node);
    return i == 0 || i == sizes_[transverse_] - 1;
  }
  int face_transverse_index(Face f) const { return f == Face::lower ? 0 : sizes_[transverse_] - 1; }

  // Nodes of a boundary face, enumerated row-major over the tangential axes.
  std::size_t face_num_nodes() const { return face_nodes_; }
  std::size_t face_node(Face f, std::size_t k) const {
    std::size_t node = static_cast<std::size_t>(face_transverse_index(f)) * stride_[transverse_];
    std::size_t rem = k;
    for (int a = dim() - 1; a >= 0; --a) {
      if (a == transverse_) continue;
      node += (rem % sizes_[a]) * stride_[a];
      rem /= sizes_[a];
    }
    return node;
  }
  // Position of a boundary node within the face enumeration above.
  std::size_t face_ordinal(std::size_t node) const {
    std::size_t k = 0, mult = 1;
    for (int a = dim() - 1; a >= 0; --a) {
      if (a == transverse_) continue;
      k += static_cast<std::size_t>(axis_index(node, a)) * mult;
      mult *= sizes_[a];
    }
    return k;
  }

  // Tangential axes in increasing order; alpha ranges over [0, dim()-1).
  int tangential_axis(int alpha) const { return alpha < transverse_ ? alpha : alpha + 1; }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= spacing_[a];
    return v;
  }
  double max_spacing() const {
    double h = 0.0;
    for (int a = 0; a < dim(); ++a) h = spacing_[a] > h ? spacing_[a] : h;
    return h;
  }

  bool same_layout(const ChartGrid& o) const {
    return sizes_ == o.sizes_ && transverse_ == o.transverse_;
  }

private:
  std::vector<int> sizes_;
  int transverse_;
  std::vector<double> spacing_;
  std::vector<std::size_t> stride_;
  std::size_t num_nodes_ = 0;
  std::size_t face_nodes_ = 0;
};

using GridPtr = std::shared_ptr<const ChartGrid>;

inline GridPtr make_grid(std::vector<int> sizes, int transverse_axis = -1) {
  return std::make_shared<const ChartGrid>(std::move(sizes), transverse_axis);
}

}  // namespace gflow
