#include "svem/monomials.hpp"

#include <cmath>

#include "svem/errors.hpp"

namespace svem {

ScaledMonomialBasis::ScaledMonomialBasis(Point center, double h, int degree)
    : center_(center), h_(h), degree_(degree) {
    if (h <= 0.0) throw Error(ErrorCode::InvalidArgument, "h must be positive");
    if (degree < 0) return;
    exponents_.reserve(dimension(degree));
    for (int d = 0; d <= degree; ++d)
        for (int ay = 0; ay <= d; ++ay) exponents_.emplace_back(d - ay, ay);
}

int ScaledMonomialBasis::dimension(int degree) {
    return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2;
}

int ScaledMonomialBasis::index_of(int ax, int ay) const {
    const int d = ax + ay;
    return d * (d + 1) / 2 + ay;
}

double ScaledMonomialBasis::eval(int alpha, Point p) const {
    const auto [ax, ay] = exponents_[alpha];
    const double sx = (p.x - center_.x) / h_;
    const double sy = (p.y - center_.y) / h_;
    return std::pow(sx, ax) * std::pow(sy, ay);
}

Point ScaledMonomialBasis::eval_gradient(int alpha, Point p) const {
    const auto [ax, ay] = exponents_[alpha];
    const double sx = (p.x - center_.x) / h_;
    const double sy = (p.y - center_.y) / h_;
    Point g;
    g.x = ax == 0 ? 0.0 : ax / h_ * std::pow(sx, ax - 1) * std::pow(sy, ay);
    g.y = ay == 0 ? 0.0 : ay / h_ * std::pow(sx, ax) * std::pow(sy, ay - 1);
    return g;
}

Eigen::MatrixXd ScaledMonomialBasis::eval_all(std::span<const Point> points) const {
    const int np = static_cast<int>(points.size());
    const int r = size();
    // power tables keep this O(np * r) instead of O(np * r * k)
    Eigen::MatrixXd px(np, degree_ + 1), py(np, degree_ + 1);
    for (int i = 0; i < np; ++i) {
        const double sx = (points[i].x - center_.x) / h_;
        const double sy = (points[i].y - center_.y) / h_;
        px(i, 0) = py(i, 0) = 1.0;
        for (int d = 1; d <= degree_; ++d) {
            px(i, d) = px(i, d - 1) * sx;
            py(i, d) = py(i, d - 1) * sy;
        }
    }
    Eigen::MatrixXd out(np, r);
    for (int a = 0; a < r; ++a) {
        const auto [ax, ay] = exponents_[a];
        out.col(a) = px.col(ax).cwiseProduct(py.col(ay));
    }
    return out;
}

std::vector<std::pair<int, double>> ScaledMonomialBasis::laplacian(int alpha) const {
    const auto [ax, ay] = exponents_[alpha];
    std::vector<std::pair<int, double>> terms;
    const double s = 1.0 / (h_ * h_);
    if (ax >= 2) terms.emplace_back(index_of(ax - 2, ay), s * ax * (ax - 1));
    if (ay >= 2) terms.emplace_back(index_of(ax, ay - 2), s * ay * (ay - 1));
    return terms;
}

Eigen::MatrixXd scaled_power_integrals(const ScaledMonomialBasis& basis,
                                       const PolygonRule& rule, int max_degree) {
    const int np = static_cast<int>(rule.points.size());
    Eigen::MatrixXd px(np, max_degree + 1), py(np, max_degree + 1);
    for (int i = 0; i < np; ++i) {
        const double sx = (rule.points[i].x - basis.center().x) / basis.h();
        const double sy = (rule.points[i].y - basis.center().y) / basis.h();
        px(i, 0) = py(i, 0) = 1.0;
        for (int d = 1; d <= max_degree; ++d) {
            px(i, d) = px(i, d - 1) * sx;
            py(i, d) = py(i, d - 1) * sy;
        }
    }
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(max_degree + 1, max_degree + 1);
    for (int p = 0; p <= max_degree; ++p)
        for (int q = 0; p + q <= max_degree; ++q)
            table(p, q) =
                (px.col(p).cwiseProduct(py.col(q)).cwiseProduct(rule.weights)).sum();
    return table;
}

Eigen::MatrixXd monomial_mass(const ScaledMonomialBasis& basis,
                              const PolygonRule& rule, int k) {
    if (rule.exactness < 2 * k)
        throw Error(ErrorCode::InvalidArgument,
                    "monomial_mass needs a rule of exactness >= 2k");
    const int r = ScaledMonomialBasis::dimension(k);
    const Eigen::MatrixXd table = scaled_power_integrals(basis, rule, 2 * k);
    Eigen::MatrixXd H(r, r);
    for (int a = 0; a < r; ++a) {
        const auto [ax, ay] = basis.exponent(a);
        for (int b = a; b < r; ++b) {
            const auto [bx, by] = basis.exponent(b);
            H(a, b) = H(b, a) = table(ax + bx, ay + by);
        }
    }
    // SPD sanity: a failure here indicates a degenerate cell
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::Conditioning,
                    "monomial mass matrix is not SPD (degenerate cell?)");
    return H;
}

}  // namespace svem
