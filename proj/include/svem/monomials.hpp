#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "svem/quadrature.hpp"

namespace svem {

/// Scaled monomials m_a(x) = ((x - x_E)/h_E)^a on a cell, ordered graded-lex:
/// (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ... The ordering is fixed
/// globally so moment DoF layouts are deterministic.
class ScaledMonomialBasis {
  public:
    ScaledMonomialBasis() : ScaledMonomialBasis({0.0, 0.0}, 1.0, 0) {}
    ScaledMonomialBasis(Point center, double h, int degree);

    static int dimension(int degree);  // r_k = (k+1)(k+2)/2, 0 for degree < 0

    int degree() const { return degree_; }
    int size() const { return static_cast<int>(exponents_.size()); }
    Point center() const { return center_; }
    double h() const { return h_; }
    std::pair<int, int> exponent(int alpha) const { return exponents_[alpha]; }

    double eval(int alpha, Point p) const;
    Point eval_gradient(int alpha, Point p) const;

    /// n_points x size matrix of all monomial values.
    Eigen::MatrixXd eval_all(std::span<const Point> points) const;

    /// Laplacian of m_alpha in this same basis: sparse list of (index, coeff).
    std::vector<std::pair<int, double>> laplacian(int alpha) const;

    /// index of the monomial with the given exponents (must satisfy
    /// ax+ay <= degree)
    int index_of(int ax, int ay) const;

  private:
    Point center_;
    double h_;
    int degree_;
    std::vector<std::pair<int, int>> exponents_;
};

/// H_{ab} = int_E m_a m_b dx for all |a|,|b| <= k, via a rule of exactness
/// >= 2k. Symmetric positive definite; H(0,0) = |E|.
Eigen::MatrixXd monomial_mass(const ScaledMonomialBasis& basis,
                              const PolygonRule& rule, int k);

/// Raw moments table T(p, q) = int_E ((x-c)/h)^p ((y-c)/h)^q dx for
/// p + q <= max_degree; the building block for mass and gradient Grams.
Eigen::MatrixXd scaled_power_integrals(const ScaledMonomialBasis& basis,
                                       const PolygonRule& rule, int max_degree);

}  // namespace svem
