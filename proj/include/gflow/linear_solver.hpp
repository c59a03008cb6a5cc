#pragma once

#include <Eigen/Sparse>
#include <memory>

#include "gflow/problem.hpp"

namespace gflow {

using SpMat = Eigen::SparseMatrix<double>;

struct SolveStats {
  bool factorized = false;
  int refine_iters = 0;
  double rel_residual = 0.0;
};

// Backward-Euler system (I - dt L) v = v_prev + dt G with Dirichlet rows
// Pr_W v = 0 and one-sided conormal Neumann rows at the faces.
void assemble_step_system(const LinearProblem& lp, const SectionField& v_prev, double dt, SpMat& A,
                          Eigen::VectorXd& b);

// Sparse direct factorization, reused across slowly drifting matrices by
// LU-preconditioned iterative refinement; refactorizes when refinement stalls.
class LinearSolver {
public:
  Eigen::VectorXd solve(const SpMat& A, const Eigen::VectorXd& b, double tol, SolveStats& stats);
  void reset() { have_lu_ = false; }

private:
  void factorize(const SpMat& A);

  Eigen::SparseLU<SpMat> lu_;
  bool have_lu_ = false;
};

// Uniform ellipticity constant of the frozen coefficients; throws NotParabolic
// if it is not positive.
double check_ellipticity(const Sym2Field& K);

// One implicit step of the frozen-coefficient linear problem.
SectionField solve_linear_step(const LinearProblem& lp, const SectionField& v_prev, double dt,
                               double lin_tol, LinearSolver* solver = nullptr,
                               SolveStats* stats = nullptr);

// sup |v| / (sup |G + v_prev/dt| + sup |p| + eps) of the assembled system;
// zero data returns 0 by convention. Logged, never asserted against theory.
double stability_ratio(const LinearProblem& lp, const SectionField& v_prev, double dt,
                       const SectionField& v);

}  // namespace gflow
