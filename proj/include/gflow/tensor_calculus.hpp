#pragma once

#include <memory>
#include <span>

#include "gflow/fd.hpp"
#include "gflow/fields.hpp"

namespace gflow {

// Node-wise inverse of a symmetric positive-definite 2-tensor field.
// Throws NotPositiveDefinite(node) if an SPD factorization fails anywhere.
Sym2Field metric_inverse(const Sym2Field& g);

// Symmetric positive-definite metric with a lazily computed, cached inverse.
class MetricField {
public:
  MetricField() = default;
  explicit MetricField(Sym2Field g) : g_(std::move(g)) {}

  const Sym2Field& components() const { return g_; }
  const ChartGrid& grid() const { return g_.grid(); }
  const GridPtr& grid_ptr() const { return g_.grid_ptr(); }

  const Sym2Field& inverse() const {
    if (!inv_) inv_ = std::make_shared<const Sym2Field>(metric_inverse(g_));
    return *inv_;
  }

private:
  Sym2Field g_;
  mutable std::shared_ptr<const Sym2Field> inv_;
};

// Gamma^k_{ij} = 1/2 g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij}).
ChristoffelField christoffel(const MetricField& g);

// Ric_{jk} = d_i Gamma^i_{jk} - d_j Gamma^i_{ik} + Gamma^i_{ip} Gamma^p_{jk}
//          - Gamma^i_{jp} Gamma^p_{ik}, symmetrized.
Sym2Field ricci(const MetricField& g);

// (DT)_{a,ij} = d_a T_{ij} - Gamma^p_{ai} T_{pj} - Gamma^p_{aj} T_{ip}.
Tensor3Field covariant_derivative_sym2(const Sym2Field& T, const ChristoffelField& gamma);

// Second covariant derivative, computed as the connection applied to DT.
Tensor4Field second_covariant_sym2(const Sym2Field& T, const ChristoffelField& gamma);

// Contraction ginv^{ab} (DDT)_{ab,ij}.
Sym2Field laplacian_like(const Sym2Field& ginv, const Tensor4Field& ddT);

double sup_norm(const Field& f);
double sup_norm_diff(const Field& a, const Field& b);

// Space quadrature (sum |.|^q dV)^{1/q} with trapezoid weights on the transverse axis.
double lq_norm(const Field& f, double q);
// Space-time version over a stored trace, trapezoid in time.
double discrete_lq_norm(std::span<const Field> steps, double dt, double q);

// Node-wise smallest eigenvalue of the component matrix.
ScalarField spd_margin(const Sym2Field& g);
double min_spd_margin(const Sym2Field& g);

// Smallest eigenvalue of one symmetric fiber value given as packed components.
double sym_min_eigenvalue(int n, std::span<const double> sym);

// Dense helpers on packed symmetric components at a single node.
void sym_invert(int n, std::span<const double> sym, std::span<double> out, std::size_t node_for_error);

}  // namespace gflow
