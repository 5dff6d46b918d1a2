#pragma once

#include <memory>

#include "svem/linear_solver.hpp"
#include "svem/problem.hpp"
#include "svem/timestep.hpp"

namespace svem {

/// Comparison baseline: the same spatial operators with an enhanced-VEM
/// moment layout (boundary DoFs plus r_{k-2} moments on every cell) and the
/// quadrature nonlinearity <F_h(U), V> = (f(Pi0 u_h), Pi0 v_h). The reaction
/// substep keeps the mass matrix and is solved by the semilinear fixed-point
/// iteration, one mass solve per sweep.
class EnhancedBaseline {
  public:
    EnhancedBaseline(const PolygonalMesh& mesh, int k, double eps,
                     int threads = 1);

    int total_dofs() const { return total_; }
    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness() const { return stiffness_; }
    const ElementOperators& element(int c) const { return elements_[c]; }

    /// Local DoF gather and Pi0 coefficients on one cell.
    Eigen::VectorXd gather(const Eigen::VectorXd& U, int c) const;
    Eigen::VectorXd cell_projection(const Eigen::VectorXd& U, int c) const;

    StateVector interpolate(const SpaceTimeFunction& g, double t = 0.0) const;
    double l2_error(const Eigen::VectorXd& U, const SpaceTimeFunction& u_exact,
                    double t) const;

    /// F_h(U): per-cell quadrature of f(Pi0 u_h) against Pi0 of the basis.
    Eigen::VectorXd nonlinear_rhs(const Eigen::VectorXd& U,
                                  const ScalarFunction& f) const;

    /// Fixed-point reaction substep (no damping, capped iterations).
    Eigen::VectorXd reaction_substep(const Eigen::VectorXd& U, double s,
                                     double t0, const ProblemSpec& problem,
                                     double tol = 1e-10, int max_iter = 100);

    Eigen::VectorXd diffusion_substep(const Eigen::VectorXd& U, double s,
                                      const SplittingConfig& config);

    StateVector step(const StateVector& state, const ProblemSpec& problem,
                     const SplittingConfig& config);
    StateVector run(const StateVector& u0, const ProblemSpec& problem,
                    const SplittingConfig& config);

    const PhaseTimings& timings() const { return timings_; }

  private:
    const LinearStepOperator& operator_for(double s, const SplittingConfig&);

    const PolygonalMesh* mesh_;
    int k_;
    double eps_;
    int threads_;
    int total_ = 0;
    int n_boundary_ = 0;
    std::vector<ElementOperators> elements_;
    std::vector<std::vector<int>> gather_;
    std::vector<Point> boundary_points_;
    std::vector<int> moment_offset_;
    SparseMatrix mass_, stiffness_;
    std::unique_ptr<LinearStepOperator> mass_solver_;
    std::map<double, std::unique_ptr<LinearStepOperator>> step_operators_;
    PhaseTimings timings_;
};

}  // namespace svem
