#include "gflow/linear_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <vector>

#include "gflow/operator_kernel.hpp"

namespace gflow {

void assemble_step_system(const LinearProblem& lp, const SectionField& v_prev, double dt, SpMat& A,
                          Eigen::VectorXd& b) {
  const ChartGrid& g = *lp.grid;
  const int d = lp.d;
  const std::size_t nrows = g.num_nodes() * static_cast<std::size_t>(d);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nrows * (2 * g.dim() * g.dim() + 8));
  b.setZero(static_cast<Eigen::Index>(nrows));

  std::vector<double> scratch;
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    const auto row0 = static_cast<Eigen::Index>(node) * d;
    if (g.on_boundary(node)) {
      const Face face = g.on_face(node, Face::lower) ? Face::lower : Face::upper;
      const std::size_t k = g.face_ordinal(node);
      for (int m = 0; m < d; ++m) {
        if (lp.split->is_dirichlet(face, m)) {
          trip.emplace_back(row0 + m, row0 + m, 1.0);
          b[row0 + m] = 0.0;
        } else {
          b[row0 + m] = lp.p[static_cast<int>(face)].at(k, m);
        }
      }
      conormal_entries(
          g, node, face, d, lp.K.node_values(node), *lp.geometry,
          [&](std::size_t col, double wt) {
            for (int m = 0; m < d; ++m)
              if (!lp.split->is_dirichlet(face, m))
                trip.emplace_back(row0 + m, static_cast<Eigen::Index>(col) * d + m, wt);
          },
          [&](std::size_t col, const double* B, double scale) {
            for (int m = 0; m < d; ++m) {
              if (lp.split->is_dirichlet(face, m)) continue;
              for (int p = 0; p < d; ++p) {
                const double wt = scale * B[m * d + p];
                if (wt != 0.0) trip.emplace_back(row0 + m, static_cast<Eigen::Index>(col) * d + p, wt);
              }
            }
          });
    } else {
      for (int m = 0; m < d; ++m) {
        trip.emplace_back(row0 + m, row0 + m, 1.0);
        b[row0 + m] = v_prev.at(node, m) + dt * lp.G.at(node, m);
      }
      op_entries(
          g, node, d, lp.K.node_values(node), *lp.geometry, scratch,
          [&](std::size_t col, double wt) {
            for (int m = 0; m < d; ++m)
              trip.emplace_back(row0 + m, static_cast<Eigen::Index>(col) * d + m, -dt * wt);
          },
          [&](std::size_t col, const double* B, double scale) {
            for (int m = 0; m < d; ++m)
              for (int p = 0; p < d; ++p) {
                const double wt = B[m * d + p];
                if (wt != 0.0)
                  trip.emplace_back(row0 + m, static_cast<Eigen::Index>(col) * d + p, -dt * scale * wt);
              }
          });
    }
  }

  A.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(nrows));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
}

void LinearSolver::factorize(const SpMat& A) {
  lu_.compute(A);
  if (lu_.info() != Eigen::Success) {
    have_lu_ = false;
    throw LinearSolveFailure("sparse LU factorization failed");
  }
  have_lu_ = true;
}

Eigen::VectorXd LinearSolver::solve(const SpMat& A, const Eigen::VectorXd& b, double tol,
                                    SolveStats& stats) {
  stats = SolveStats{};
  const double bnorm = b.lpNorm<Eigen::Infinity>();
  if (bnorm == 0.0) {
    stats.rel_residual = 0.0;
    return Eigen::VectorXd::Zero(b.size());
  }

  // Row-sup norm of A for the backward-error residual test.
  double anorm = 0.0;
  {
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(A.rows());
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) rowsum[it.row()] += std::abs(it.value());
    anorm = rowsum.maxCoeff();
  }
  auto rel_res = [&](const Eigen::VectorXd& x) {
    return (b - A * x).lpNorm<Eigen::Infinity>() /
           (anorm * x.lpNorm<Eigen::Infinity>() + bnorm);
  };

  for (int attempt = 0; attempt < 2; ++attempt) {
    if (!have_lu_) {
      factorize(A);
      stats.factorized = true;
    }
    Eigen::VectorXd x = lu_.solve(b);
    double res = rel_res(x);
    // Iterative refinement; also absorbs drift when the factorization is stale.
    double prev = res;
    for (int it = 0; it < 30 && res > tol; ++it) {
      Eigen::VectorXd r = b - A * x;
      x += lu_.solve(r);
      res = rel_res(x);
      ++stats.refine_iters;
      if (res > 0.9 * prev) break;  // stalled
      prev = res;
    }
    if (res <= tol) {
      stats.rel_residual = res;
      return x;
    }
    if (attempt == 0) {
      have_lu_ = false;  // stale factorization; rebuild from the current matrix
      continue;
    }
    // Krylov fallback.
    Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> krylov;
    krylov.setTolerance(tol * 1e-2);
    krylov.setMaxIterations(2000);
    krylov.compute(A);
    Eigen::VectorXd xk = krylov.solveWithGuess(b, x);
    const double resk = rel_res(xk);
    if (resk <= tol) {
      stats.rel_residual = resk;
      return xk;
    }
    throw LinearSolveFailure("linear solve residual " + std::to_string(std::min(res, resk)) +
                             " above tolerance " + std::to_string(tol));
  }
  throw LinearSolveFailure("unreachable");
}

double check_ellipticity(const Sym2Field& K) {
  const int n = K.grid().dim();
  double c2 = std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t node = 0; node < K.num_nodes(); ++node) {
    const double ev = sym_min_eigenvalue(n, K.node_values(node));
    if (ev < c2) {
      c2 = ev;
      worst = node;
    }
  }
  if (!(c2 > 0.0)) throw NotParabolic(worst, 0.0, c2);
  return c2;
}

SectionField solve_linear_step(const LinearProblem& lp, const SectionField& v_prev, double dt,
                               double lin_tol, LinearSolver* solver, SolveStats* stats) {
  check_ellipticity(lp.K);
  SpMat A;
  Eigen::VectorXd b;
  assemble_step_system(lp, v_prev, dt, A, b);

  LinearSolver local;
  LinearSolver& ls = solver ? *solver : local;
  SolveStats st;
  Eigen::VectorXd x = ls.solve(A, b, lin_tol, st);
  if (stats) *stats = st;

  SectionField v(lp.grid, lp.d);
  std::copy(x.data(), x.data() + x.size(), v.data().begin());
  return v;
}

double stability_ratio(const LinearProblem& lp, const SectionField& v_prev, double dt,
                       const SectionField& v) {
  double data = 0.0;
  for (std::size_t node = 0; node < lp.grid->num_nodes(); ++node)
    for (int m = 0; m < lp.d; ++m)
      data = std::max(data, std::abs(lp.G.at(node, m) + v_prev.at(node, m) / dt));
  double pnorm = 0.0;
  for (const auto& pf : lp.p)
    for (double x : pf.data()) pnorm = std::max(pnorm, std::abs(x));
  if (data + pnorm == 0.0) return 0.0;
  return sup_norm(v) / (data + pnorm + 1e-300);
}

}  // namespace gflow
