#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "svem/geometry.hpp"

namespace svem {

struct Rule1d {
    Eigen::VectorXd nodes;    // ascending on [-1, 1]
    Eigen::VectorXd weights;  // sum to 2
};

/// p-point Gauss-Lobatto rule on [-1,1] (endpoints included); exact for
/// polynomials of degree <= 2p-3. Interior nodes are the roots of P'_{p-1},
/// found by Newton iteration from Chebyshev-Lobatto guesses (tol 1e-15).
Rule1d gauss_lobatto(int p);

/// p-point Gauss-Legendre rule on [-1,1]; exact for degree <= 2p-1.
Rule1d gauss_legendre(int p);

/// Edge rules for degree-k traces: the (k+1)-point Gauss-Lobatto node set
/// carrying the edge DoFs and the (k+1)-point Gauss-Legendre rule used to
/// integrate degree <= 2k+1 products along the edge.
struct EdgeRule {
    Rule1d lobatto;   // k+1 points
    Rule1d legendre;  // k+1 points
};
EdgeRule make_edge_rule(int k);

/// Legendre polynomial value and derivative at x (for tests/oracles).
double legendre_p(int n, double x);
double legendre_p_derivative(int n, double x);

struct PolygonRule {
    std::vector<Point> points;
    Eigen::VectorXd weights;  // sum to |E|
    int exactness = 0;
};

/// Quadrature on a simple CCW polygon with exactness >= degree, built from a
/// centroid-fan sub-triangulation with collapsed Gauss rules; falls back to
/// ear clipping when the fan degenerates (non-star-shaped cells).
PolygonRule polygon_quadrature(std::span<const Point> cell, int degree);

/// Fan/ear-clip triangulation as vertex triples into `cell` (exposed for the
/// refinement oracles in the tests).
std::vector<std::array<int, 3>> triangulate_polygon(std::span<const Point> cell);

}  // namespace svem
