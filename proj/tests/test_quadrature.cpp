#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "svem/errors.hpp"
#include "svem/mesh.hpp"
#include "svem/monomials.hpp"
#include "svem/quadrature.hpp"

using namespace svem;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SVEM_FIXTURE_DIR;

// bisection oracle for the roots of P'_{n}
std::vector<double> lobatto_interior_by_bisection(int n) {
    auto f = [n](double x) { return legendre_p_derivative(n, x); };
    std::vector<double> roots;
    const int scan = 20000;
    double prev_x = -1.0 + 1e-9, prev_f = f(prev_x);
    for (int i = 1; i <= scan; ++i) {
        const double x = -1.0 + 2.0 * i / scan - 1e-9;
        const double fx = f(x);
        if (prev_f == 0.0) roots.push_back(prev_x);
        if (prev_f * fx < 0.0) {
            double lo = prev_x, hi = x;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (f(lo) * f(mid) <= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_f = fx;
    }
    return roots;
}

// exact integral of x^p over [-1,1]
double segment_monomial_integral(int p) {
    return (p % 2 == 1) ? 0.0 : 2.0 / (p + 1);
}

// refinement oracle for polygon integrals: ear-clip triangulation, each
// triangle split 4-fold `splits` times, high-order collapsed Gauss per piece
double refined_polygon_integral(const std::vector<Point>& poly,
                                const std::function<double(Point)>& f,
                                int degree, int splits = 2) {
    const auto tris = triangulate_polygon(poly);
    std::vector<std::array<Point, 3>> queue;
    for (const auto& t : tris)
        queue.push_back({poly[t[0]], poly[t[1]], poly[t[2]]});
    for (int s = 0; s < splits; ++s) {
        std::vector<std::array<Point, 3>> next;
        for (const auto& t : queue) {
            const Point ab = 0.5 * (t[0] + t[1]);
            const Point bc = 0.5 * (t[1] + t[2]);
            const Point ca = 0.5 * (t[2] + t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({ab, t[1], bc});
            next.push_back({ca, bc, t[2]});
            next.push_back({ab, bc, ca});
        }
        queue = next;
    }
    const int p = degree / 2 + 4;
    const Rule1d g = gauss_legendre(p);
    double total = 0.0;
    for (const auto& t : queue) {
        const double jac =
            (t[1].x - t[0].x) * (t[2].y - t[0].y) -
            (t[1].y - t[0].y) * (t[2].x - t[0].x);
        for (int i = 0; i < p; ++i) {
            const double u = 0.5 * (g.nodes[i] + 1.0);
            for (int j = 0; j < p; ++j) {
                const double v = 0.5 * (g.nodes[j] + 1.0) * (1.0 - u);
                const Point x = t[0] + u * (t[1] - t[0]) + v * (t[2] - t[0]);
                total += 0.25 * g.weights[i] * g.weights[j] * (1.0 - u) * jac * f(x);
            }
        }
    }
    return total;
}

}  // namespace

TEST_CASE("gauss-lobatto closed forms") {
    CHECK_THROWS_AS(gauss_lobatto(1), Error);

    const Rule1d p2 = gauss_lobatto(2);
    CHECK(p2.nodes[0] == -1.0);
    CHECK(p2.nodes[1] == 1.0);
    CHECK(p2.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

    const Rule1d p3 = gauss_lobatto(3);
    CHECK(p3.nodes[1] == 0.0);
    CHECK(p3.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(p3.weights[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

    const Rule1d p4 = gauss_lobatto(4);
    CHECK(p4.nodes[1] == doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(p4.nodes[2] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(p4.weights[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(p4.weights[1] == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("gauss-lobatto interior nodes match the bisection oracle") {
    for (int p = 3; p <= 8; ++p) {
        CAPTURE(p);
        const Rule1d rule = gauss_lobatto(p);
        const auto roots = lobatto_interior_by_bisection(p - 1);
        REQUIRE(static_cast<int>(roots.size()) == p - 2);
        for (int i = 1; i < p - 1; ++i)
            CHECK(rule.nodes[i] == doctest::Approx(roots[i - 1]).epsilon(1e-14));
        CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
        // exactness up to 2p-3
        for (int d = 0; d <= 2 * p - 3; ++d) {
            double acc = 0.0;
            for (int i = 0; i < p; ++i)
                acc += rule.weights[i] * std::pow(rule.nodes[i], d);
            CHECK(acc == doctest::Approx(segment_monomial_integral(d))
                             .epsilon(1e-13));
        }
    }
}

TEST_CASE("gauss-legendre exactness") {
    for (int p = 1; p <= 8; ++p) {
        const Rule1d rule = gauss_legendre(p);
        CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
        for (int d = 0; d <= 2 * p - 1; ++d) {
            double acc = 0.0;
            for (int i = 0; i < p; ++i)
                acc += rule.weights[i] * std::pow(rule.nodes[i], d);
            CHECK(acc ==
                  doctest::Approx(segment_monomial_integral(d)).epsilon(1e-13));
        }
    }
}

TEST_CASE("polygon quadrature on the unit square") {
    const std::vector<Point> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const PolygonRule r0 = polygon_quadrature(sq, 0);
    CHECK(r0.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));

    const PolygonRule r2 = polygon_quadrature(sq, 2);
    double xy = 0.0;
    for (std::size_t q = 0; q < r2.points.size(); ++q)
        xy += r2.weights[static_cast<long>(q)] * r2.points[q].x * r2.points[q].y;
    CHECK(xy == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("regular hexagon second moment against the refinement oracle") {
    std::vector<Point> hex;
    for (int i = 0; i < 6; ++i)
        hex.push_back({std::cos(M_PI * i / 3.0), std::sin(M_PI * i / 3.0)});
    auto x2 = [](Point p) { return p.x * p.x; };
    const double oracle = refined_polygon_integral(hex, x2, 2, 3);
    const PolygonRule rule = polygon_quadrature(hex, 2);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q)
        acc += rule.weights[static_cast<long>(q)] * x2(rule.points[q]);
    CHECK(acc == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("quadrature exactness across mesh families") {
    std::vector<std::vector<Point>> cells;
    {
        const PolygonalMesh dist = generate_distorted_quads(4, 0.25, 11);
        cells.push_back(dist.cell_points(5));
        cells.push_back(dist.cell_points(10));
        const PolygonalMesh vor = import_mesh(kFixtures / "voronoi_0064.txt");
        cells.push_back(vor.cell_points(0));
        cells.push_back(vor.cell_points(33));
        const PolygonalMesh nc = import_mesh(kFixtures / "nonconvex_0032.txt");
        cells.push_back(nc.cell_points(0));  // exercises the ear-clip fallback
        cells.push_back(nc.cell_points(1));
    }
    for (int k = 1; k <= 4; ++k) {
        const int d = 2 * k + 2;
        for (const auto& poly : cells) {
            const PolygonRule rule = polygon_quadrature(poly, d);
            const CellGeometry geo = compute_geometry(poly);
            CHECK(rule.weights.sum() ==
                  doctest::Approx(geo.area).epsilon(1e-13));
            const ScaledMonomialBasis basis(geo.centroid, geo.diameter, d);
            for (int alpha = 0; alpha < basis.size(); ++alpha) {
                auto f = [&](Point p) { return basis.eval(alpha, p); };
                const double oracle = refined_polygon_integral(poly, f, d, 2);
                double acc = 0.0;
                for (std::size_t q = 0; q < rule.points.size(); ++q)
                    acc += rule.weights[static_cast<long>(q)] * f(rule.points[q]);
                CHECK(acc == doctest::Approx(oracle)
                                 .epsilon(1e-11)
                                 .scale(std::max(1.0, std::abs(oracle))));
            }
        }
    }
}

TEST_CASE("monomial mass matrix") {
    const std::vector<Point> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const CellGeometry geo = compute_geometry(sq);

    SUBCASE("k = 0 gives the area") {
        const ScaledMonomialBasis basis(geo.centroid, geo.diameter, 0);
        const Eigen::MatrixXd H =
            monomial_mass(basis, polygon_quadrature(sq, 0), 0);
        REQUIRE(H.rows() == 1);
        CHECK(H(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("k = 1 against closed forms on the reference square") {
        // centered/scaled: m1 = (x-1/2)/sqrt(2), m2 = (y-1/2)/sqrt(2)
        const ScaledMonomialBasis basis({0.5, 0.5}, std::sqrt(2.0), 1);
        const Eigen::MatrixXd H =
            monomial_mass(basis, polygon_quadrature(sq, 2), 1);
        CHECK(H(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(H(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(H(1, 1) == doctest::Approx(1.0 / 24.0).epsilon(1e-13));
        CHECK(H(2, 2) == doctest::Approx(1.0 / 24.0).epsilon(1e-13));
        CHECK(H(1, 2) == doctest::Approx(0.0).epsilon(1e-15));
    }

    SUBCASE("translation invariance") {
        std::vector<Point> moved = sq;
        for (Point& p : moved) p = p + Point{3.25, -7.5};
        const CellGeometry geo2 = compute_geometry(moved);
        const ScaledMonomialBasis b1(geo.centroid, geo.diameter, 3);
        const ScaledMonomialBasis b2(geo2.centroid, geo2.diameter, 3);
        const Eigen::MatrixXd H1 =
            monomial_mass(b1, polygon_quadrature(sq, 6), 3);
        const Eigen::MatrixXd H2 =
            monomial_mass(b2, polygon_quadrature(moved, 6), 3);
        CHECK((H1 - H2).cwiseAbs().maxCoeff() < 1e-13);
    }

    SUBCASE("SPD with finite condition on fixture cells") {
        const PolygonalMesh vor = import_mesh(kFixtures / "voronoi_0064.txt");
        double worst_log_cond = 0.0;
        for (int c = 0; c < vor.n_cells(); c += 7) {
            const auto poly = vor.cell_points(c);
            const CellGeometry g = vor.cell_geometry(c);
            const ScaledMonomialBasis basis(g.centroid, g.diameter, 4);
            const Eigen::MatrixXd H =
                monomial_mass(basis, polygon_quadrature(poly, 8), 4);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
            CHECK(eig.eigenvalues().minCoeff() > 0.0);
            worst_log_cond = std::max(
                worst_log_cond, std::log10(eig.eigenvalues().maxCoeff() /
                                           eig.eigenvalues().minCoeff()));
        }
        MESSAGE("worst log10 condition of H at k=4: ", worst_log_cond);
        CHECK(worst_log_cond < 12.0);
    }
}
