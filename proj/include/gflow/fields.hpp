#pragma once

#include <cassert>
#include <cmath>
#include <span>
#include <vector>

#include "gflow/grid.hpp"

namespace gflow {

// Number of independent components of a symmetric 2-tensor in dimension n.
inline int sym_count(int n) { return n * (n + 1) / 2; }

// Index of (i,j), i<=j, in upper-triangle storage.
inline int sym_index(int n, int i, int j) {
  if (i > j) { const int t = i; i = j; j = t; }
  return i * n - i * (i + 1) / 2 + j;
}

// Node-major component storage over a ChartGrid.
class Field {
public:
  Field() = default;
  Field(GridPtr grid, int ncomp, double init = 0.0)
      : grid_(std::move(grid)), ncomp_(ncomp),
        data_(grid_->num_nodes() * static_cast<std::size_t>(ncomp), init) {}

  const ChartGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int ncomp() const { return ncomp_; }
  std::size_t num_nodes() const { return grid_->num_nodes(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t node, int c) { return data_[node * ncomp_ + c]; }
  double at(std::size_t node, int c) const { return data_[node * ncomp_ + c]; }
  std::span<double> node_values(std::size_t node) {
    return {data_.data() + node * ncomp_, static_cast<std::size_t>(ncomp_)};
  }
  std::span<const double> node_values(std::size_t node) const {
    return {data_.data() + node * ncomp_, static_cast<std::size_t>(ncomp_)};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v) { data_.assign(data_.size(), v); }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

private:
  GridPtr grid_;
  int ncomp_ = 0;
  std::vector<double> data_;
};

using ScalarField = Field;   // ncomp = 1
using SectionField = Field;  // ncomp = fiber dimension d

struct VectorField : Field {
  VectorField() = default;
  explicit VectorField(GridPtr g, double init = 0.0) : Field(g, g->dim(), init) {}
  double& v(std::size_t node, int i) { return at(node, i); }
  double v(std::size_t node, int i) const { return at(node, i); }
};

using CovectorField = VectorField;

// Symmetric (0,2) or (2,0) tensor field, upper triangle stored.
struct Sym2Field : Field {
  Sym2Field() = default;
  explicit Sym2Field(GridPtr g, double init = 0.0) : Field(g, sym_count(g->dim()), init) {}
  double& s(std::size_t node, int i, int j) { return at(node, sym_index(grid().dim(), i, j)); }
  double s(std::size_t node, int i, int j) const { return at(node, sym_index(grid().dim(), i, j)); }
};

// (0,3) tensor symmetric in its last two slots, e.g. a covariant derivative of
// a symmetric 2-tensor: component (a, (i,j)).
struct Tensor3Field : Field {
  Tensor3Field() = default;
  explicit Tensor3Field(GridPtr g, double init = 0.0)
      : Field(g, g->dim() * sym_count(g->dim()), init) {}
  double& t(std::size_t node, int a, int i, int j) {
    return at(node, a * sym_count(grid().dim()) + sym_index(grid().dim(), i, j));
  }
  double t(std::size_t node, int a, int i, int j) const {
    return at(node, a * sym_count(grid().dim()) + sym_index(grid().dim(), i, j));
  }
};

// (0,4) tensor symmetric in its last two slots: component (a, b, (i,j)).
struct Tensor4Field : Field {
  Tensor4Field() = default;
  explicit Tensor4Field(GridPtr g, double init = 0.0)
      : Field(g, g->dim() * g->dim() * sym_count(g->dim()), init) {}
  double& t(std::size_t node, int a, int b, int i, int j) {
    const int n = grid().dim();
    return at(node, (a * n + b) * sym_count(n) + sym_index(n, i, j));
  }
  double t(std::size_t node, int a, int b, int i, int j) const {
    const int n = grid().dim();
    return at(node, (a * n + b) * sym_count(n) + sym_index(n, i, j));
  }
};

// Christoffel symbols Gamma^k_{ij}, symmetric in (i,j): component (k, (i,j)).
struct ChristoffelField : Field {
  ChristoffelField() = default;
  explicit ChristoffelField(GridPtr g, double init = 0.0)
      : Field(g, g->dim() * sym_count(g->dim()), init) {}
  double& g(std::size_t node, int k, int i, int j) {
    return at(node, k * sym_count(grid().dim()) + sym_index(grid().dim(), i, j));
  }
  double g(std::size_t node, int k, int i, int j) const {
    return at(node, k * sym_count(grid().dim()) + sym_index(grid().dim(), i, j));
  }
};

// Per-node data on one boundary face, indexed by the face enumeration of ChartGrid.
struct FaceField {
  FaceField() = default;
  FaceField(std::size_t count, int ncomp, double init = 0.0)
      : count_(count), ncomp_(ncomp), data_(count * ncomp, init) {}

  std::size_t count() const { return count_; }
  int ncomp() const { return ncomp_; }
  bool empty() const { return data_.empty(); }
  double& at(std::size_t k, int c) { return data_[k * ncomp_ + c]; }
  double at(std::size_t k, int c) const { return data_[k * ncomp_ + c]; }
  std::span<double> node_values(std::size_t k) {
    return {data_.data() + k * ncomp_, static_cast<std::size_t>(ncomp_)};
  }
  std::span<const double> node_values(std::size_t k) const {
    return {data_.data() + k * ncomp_, static_cast<std::size_t>(ncomp_)};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

private:
  std::size_t count_ = 0;
  int ncomp_ = 0;
  std::vector<double> data_;
};

}  // namespace gflow
