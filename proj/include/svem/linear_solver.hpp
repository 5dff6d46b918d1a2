#pragma once

#include <memory>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "svem/assembly.hpp"

namespace svem {

enum class LinearSolveMode { Direct, Iterative };

/// Incomplete Cholesky with magnitude drop tolerance, for preconditioning
/// the CG mode. Factorizes A + shift*I with automatic shift escalation on
/// breakdown.
class IncompleteCholesky {
  public:
    IncompleteCholesky(const SparseMatrix& A, double drop_tol);
    Eigen::VectorXd apply(const Eigen::VectorXd& r) const;  // (L L^T)^{-1} r

  private:
    SparseMatrix L_;
};

/// Factorization (or preconditioner) of one SPD step matrix, reused across
/// every time step at fixed tau.
class LinearStepOperator {
  public:
    LinearStepOperator(const SparseMatrix& lhs, LinearSolveMode mode,
                       double tol, double ic_drop_tol = 1e-5);

    /// Solve lhs x = rhs; throws Error(SolverFailure) with the residual when
    /// CG fails to reach the tolerance.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  private:
    SparseMatrix lhs_;
    LinearSolveMode mode_;
    double tol_;
    std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> direct_;
    std::unique_ptr<IncompleteCholesky> precond_;
};

}  // namespace svem
