#pragma once

#include "gflow/fields.hpp"
#include "gflow/tensor_calculus.hpp"

namespace gflow {

// Outward unit normal vector of g on a face: upsilon^i = s g^{in} / sqrt(g^{nn}).
FaceField outward_unit_normal(const MetricField& g, Face face);

// Outward unit conormal covector: nu_i = s delta_i^n / sqrt(g^{nn}).
FaceField outward_unit_conormal(const MetricField& g, Face face);

// II_{ab} = g_{ac} (d_b upsilon^c + Gamma^c_{bk} upsilon^k) on the tangential
// indices of a face, symmetrized; one-sided transverse stencils enter through
// the Christoffel field.
FaceField second_fundamental_form(const MetricField& g, const ChristoffelField& gamma, Face face);
FaceField second_fundamental_form(const MetricField& g, Face face);

// H = (n-1)^{-1} g^{ab} II_{ab} over the tangential block of the full inverse.
FaceField mean_curvature(const MetricField& g, const ChristoffelField& gamma, Face face);
FaceField mean_curvature(const MetricField& g, Face face);

// Smallest eigenvalue of the tangential component matrix of II over a face.
double min_II_eigenvalue(const FaceField& II, int n);

// Bundled per-face boundary data.
struct BoundaryGeometry {
  FaceField unit_normal;
  FaceField unit_conormal;
  FaceField second_fundamental;
  FaceField mean_curv;
};

BoundaryGeometry boundary_geometry(const MetricField& g, const ChristoffelField& gamma, Face face);

}  // namespace gflow
