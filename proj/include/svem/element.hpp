#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "svem/geometry.hpp"
#include "svem/monomials.hpp"
#include "svem/quadrature.hpp"

namespace svem {

/// Local DoF layout of the serendipity space on one cell: the kN boundary
/// DoFs (N vertex values, then per edge the k-1 interior Gauss-Lobatto
/// values, counter-clockwise from vertex 0), followed by the moment DoFs
/// (1/|E|) int_E v m_alpha for alpha < r_{k-eta_E} when k >= eta_E.
struct LocalDofLayout {
    int k = 1;
    int n_edges = 0;
    int eta = 3;
    int n_boundary = 0;  // k*N
    int n_moments = 0;   // r_{k-eta} if deficient, else 0
    int total = 0;       // d^S_{k,E}
    bool deficient = false;
};

LocalDofLayout make_dof_layout(int k, int n_edges, int eta);

/// Local DoF index of node `node` (0..k, Gauss-Lobatto order from the edge
/// start) on edge `edge`.
int edge_node_dof(const LocalDofLayout& layout, int edge, int node);

/// All computable per-element operators of the serendipity VEM space.
/// Matrices map the local DoF vector (length total) to polynomial
/// coefficients in the scaled monomial basis (length r_k), except the
/// stiffness/mass which are total x total.
struct ElementOperators {
    LocalDofLayout layout;
    CellGeometry geo;
    ScaledMonomialBasis basis;           // degree k
    std::vector<Point> boundary_nodes;   // kN coordinates xi_i
    PolygonRule rule;                    // exactness 2k+2
    Eigen::MatrixXd mono_at_rule;        // n_q x r_k
    Eigen::MatrixXd mass_monomials;      // H, r x r
    Eigen::MatrixXd grad_gram;           // int grad m_a . grad m_b, r x r
    Eigen::MatrixXd dof_of_monomials;    // D, total x r
    Eigen::MatrixXd pi_boundary;         // Pi_d (ideal) or Pi_S (deficient)
    Eigen::MatrixXd lift;                // (kN + r) x total, enlarged DoFs
    Eigen::MatrixXd pi_nabla;            // r x total
    Eigen::MatrixXd pi_zero;             // r x total
    Eigen::MatrixXd stiffness;           // A_E = eps * (consistency + dofi-dofi)
    Eigen::MatrixXd mass;                // M_E

    /// DoF vector of a continuous function: boundary evaluations plus moment
    /// quadratures.
    Eigen::VectorXd dof_vector(const std::function<double(Point)>& g) const;

    /// Coefficients of Pi0 applied to a local DoF vector, evaluated at the
    /// cell quadrature points (used by the nonlinear machinery).
    Eigen::VectorXd pi_zero_at_rule(const Eigen::VectorXd& local_dofs) const;
};

/// Build everything for one cell. Throws Error(UnsupportedConfiguration) for
/// non-convex deficient cells and Error(Conditioning) when a Gram factor has
/// condition estimate above 1e12.
ElementOperators build_element_operators(std::span<const Point> points,
                                         const CellGeometry& geo, int k,
                                         double eps);

/// Standalone projector builds (the same factors the full build uses).
Eigen::MatrixXd boundary_projector(std::span<const Point> points,
                                   const CellGeometry& geo, int k);
Eigen::MatrixXd serendipity_projector(std::span<const Point> points,
                                      const CellGeometry& geo, int k);

/// Element operators for the enhanced-VEM reference layout: kN boundary DoFs
/// plus r_{k-2} moments on every cell, missing moments slaved to Pi_nabla.
/// Used by the coupled comparison baseline and the DoF reports.
ElementOperators build_enhanced_element_operators(std::span<const Point> points,
                                                  const CellGeometry& geo, int k,
                                                  double eps);

/// Boundary node coordinates for the layout (kN points).
std::vector<Point> boundary_node_coords(std::span<const Point> points, int k);

}  // namespace svem
