#pragma once

#include <functional>
#include <memory>

#include <Eigen/Sparse>

#include "svem/dofmap.hpp"
#include "svem/element.hpp"
#include "svem/mesh.hpp"

namespace svem {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct StateVector {
    Eigen::VectorXd coeffs;
    double time = 0.0;
};

using ScalarFunction = std::function<double(double)>;
using SpaceTimeFunction = std::function<double(Point, double)>;
using SpatialFunction = std::function<double(Point)>;

/// The assembled serendipity space on a mesh: per-element operators, global
/// DoF map, sparse mass and stiffness. Immutable after construction; all
/// queries are safe to run concurrently.
class SerendipitySpace {
  public:
    SerendipitySpace(const PolygonalMesh& mesh, int k, double eps,
                     int threads = 1);

    const PolygonalMesh& mesh() const { return *mesh_; }
    int k() const { return k_; }
    double eps() const { return eps_; }
    const DofMap& dofs() const { return *dofs_; }
    const ElementOperators& element(int c) const { return elements_[c]; }

    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness() const { return stiffness_; }

    /// Interpolation operator: boundary DoFs are point evaluations, moment
    /// DoFs are quadratures of g against the scaled monomials.
    StateVector interpolate(const SpaceTimeFunction& g, double t = 0.0) const;
    StateVector interpolate(const SpatialFunction& g) const;

    /// Interpolatory / quasi-interpolatory nonlinear DoF vector: entry i is
    /// f(U_i) on boundary DoFs; moment entries are moments of f(Pi0 u_h).
    Eigen::VectorXd nonlinear_dof_vector(const Eigen::VectorXd& U,
                                         const ScalarFunction& f) const;

    /// sqrt( sum_E int_E (u_exact(.,t) - Pi0 u_h)^2 ).
    double l2_error(const Eigen::VectorXd& U, const SpaceTimeFunction& u_exact,
                    double t) const;

    /// Pi0 coefficients of the local solution on cell c.
    Eigen::VectorXd cell_projection(const Eigen::VectorXd& U, int c) const;

    /// Gather the local DoF vector of cell c.
    Eigen::VectorXd gather(const Eigen::VectorXd& U, int c) const;

    int threads() const { return threads_; }

  private:
    const PolygonalMesh* mesh_;
    int k_;
    double eps_;
    int threads_;
    std::vector<ElementOperators> elements_;
    std::unique_ptr<DofMap> dofs_;
    SparseMatrix mass_, stiffness_;
};

/// Scatter-add local matrices into global sparse matrices; exposed for the
/// assembly-order tests and the enhanced baseline.
SparseMatrix assemble_sparse(int total, const std::vector<std::vector<int>>& gather,
                             const std::function<const Eigen::MatrixXd&(int)>& local,
                             const std::vector<int>& cell_order);

/// Simple index-chunked parallel loop (deterministic result for disjoint
/// writes regardless of thread count).
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace svem
