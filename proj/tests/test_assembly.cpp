#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "svem/assembly.hpp"
#include "svem/errors.hpp"

using namespace svem;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SVEM_FIXTURE_DIR;

// independent fine quadrature of f over the mesh (4-fold split triangles,
// dense Gauss), for the l2_error regression
double fine_integral(const std::vector<Point>& poly,
                     const std::function<double(Point)>& f) {
    const Rule1d g = gauss_legendre(12);
    std::vector<std::array<Point, 3>> tris;
    for (const auto& t : triangulate_polygon(poly))
        tris.push_back({poly[t[0]], poly[t[1]], poly[t[2]]});
    for (int s = 0; s < 2; ++s) {
        std::vector<std::array<Point, 3>> next;
        for (const auto& t : tris) {
            const Point ab = 0.5 * (t[0] + t[1]);
            const Point bc = 0.5 * (t[1] + t[2]);
            const Point ca = 0.5 * (t[2] + t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({ab, t[1], bc});
            next.push_back({ca, bc, t[2]});
            next.push_back({ab, bc, ca});
        }
        tris = next;
    }
    double total = 0.0;
    for (const auto& t : tris) {
        const double jac = (t[1].x - t[0].x) * (t[2].y - t[0].y) -
                           (t[1].y - t[0].y) * (t[2].x - t[0].x);
        for (int i = 0; i < g.nodes.size(); ++i) {
            const double u = 0.5 * (g.nodes[i] + 1.0);
            for (int j = 0; j < g.nodes.size(); ++j) {
                const double v = 0.5 * (g.nodes[j] + 1.0) * (1.0 - u);
                const Point x = t[0] + u * (t[1] - t[0]) + v * (t[2] - t[0]);
                total +=
                    0.25 * g.weights[i] * g.weights[j] * (1.0 - u) * jac * f(x);
            }
        }
    }
    return total;
}

}  // namespace

TEST_CASE("dof map counts and determinism") {
    const PolygonalMesh mesh = generate_structured_quads(2);
    REQUIRE(mesh.n_vertices() == 9);
    REQUIRE(mesh.n_edges() == 12);

    SUBCASE("k=2, eta=4 everywhere: boundary DoFs only") {
        const DofMap dofs(mesh, 2);
        CHECK(dofs.total() == 21);  // 9 + 12
        CHECK(dofs.n_moments() == 0);
        CHECK(svem_dof_count(mesh, 2) == 21);
        CHECK(enhanced_dof_count(mesh, 2) == 25);  // 21 + 4*r_0
    }

    SUBCASE("k=4: every square is deficient with one moment") {
        const DofMap dofs(mesh, 4);
        CHECK(dofs.total() == 49);  // 9 + 3*12 + 4
        CHECK(dofs.n_moments() == 4);
        CHECK(svem_dof_count(mesh, 4) == 49);
    }

    SUBCASE("numbering is vertices, then edges, then cell moments") {
        const DofMap dofs(mesh, 4);
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const auto& g = dofs.cell_dofs(c);
            const auto verts = mesh.cell(c);
            for (std::size_t i = 0; i < verts.size(); ++i)
                CHECK(g[i] == verts[i]);
            CHECK(dofs.moment_offset(c) == dofs.n_boundary() + c);
        }
    }

    SUBCASE("non-convex deficient cell is rejected") {
        const PolygonalMesh lshape(
            {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}},
            {{0, 1, 2, 3, 4, 5}});
        REQUIRE(lshape.cell_geometry(0).eta == 6);
        try {
            DofMap dofs(lshape, 6);
            FAIL("expected unsupported-configuration");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnsupportedConfiguration);
        }
    }
}

TEST_CASE("shared-edge DoFs are conforming") {
    const PolygonalMesh mesh = generate_distorted_quads(4, 0.25, 9);
    const int k = 3;
    const SerendipitySpace space(mesh, k, 1.0);
    const DofMap& dofs = space.dofs();

    for (int e = 0; e < mesh.n_edges(); ++e) {
        const MeshEdge& edge = mesh.edge(e);
        if (edge.boundary()) continue;
        // locate this edge in both incident cells and compare the node
        // coordinates their gather lists imply for each global slot
        for (int j = 0; j < k - 1; ++j) {
            Point from_left{-1, -1}, from_right{-2, -2};
            for (int side = 0; side < 2; ++side) {
                const int c = side == 0 ? edge.cell_left : edge.cell_right;
                const auto edges = mesh.cell_edges(c);
                const ElementOperators& ops = space.element(c);
                for (std::size_t i = 0; i < edges.size(); ++i) {
                    if (edges[i] != e) continue;
                    for (int node = 1; node < k; ++node) {
                        const int local =
                            edge_node_dof(ops.layout, static_cast<int>(i), node);
                        if (dofs.cell_dofs(c)[local] != dofs.edge_dof(e, j))
                            continue;
                        (side == 0 ? from_left : from_right) =
                            ops.boundary_nodes[local];
                    }
                }
            }
            const double h = mesh.cell_geometry(edge.cell_left).diameter;
            CHECK(distance(from_left, from_right) < 1e-12 * h);
        }
    }
}

TEST_CASE("global assembly") {
    const PolygonalMesh mesh = import_mesh(kFixtures / "voronoi_0064.txt");
    const SerendipitySpace space(mesh, 2, 1.0);

    SUBCASE("constants span the stiffness kernel (pure Neumann)") {
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.dofs().total());
        CHECK((space.stiffness() * ones).lpNorm<Eigen::Infinity>() < 1e-11);
        const SparseMatrix at = SparseMatrix(space.stiffness().transpose());
        CHECK((Eigen::MatrixXd(space.stiffness()) - Eigen::MatrixXd(at))
                  .cwiseAbs()
                  .maxCoeff() < 1e-13);
    }

    SUBCASE("mass is SPD") {
        Eigen::SimplicialLLT<SparseMatrix> llt(space.mass());
        CHECK(llt.info() == Eigen::Success);
    }

    SUBCASE("single-cell mesh: global equals local up to the gather map") {
        const PolygonalMesh one = generate_structured_quads(1);
        const SerendipitySpace s1(one, 2, 1.0);
        const Eigen::MatrixXd dense(s1.mass());
        const Eigen::MatrixXd& local = s1.element(0).mass;
        const auto& g = s1.dofs().cell_dofs(0);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = 0; j < g.size(); ++j)
                worst = std::max(worst,
                                 std::abs(dense(g[i], g[j]) -
                                          local(static_cast<long>(i),
                                                static_cast<long>(j))));
        CHECK(worst < 1e-15);
    }

    SUBCASE("assembly order independence") {
        const DofMap& dofs = space.dofs();
        std::vector<std::vector<int>> gather(mesh.n_cells());
        for (int c = 0; c < mesh.n_cells(); ++c) gather[c] = dofs.cell_dofs(c);
        std::vector<int> order(mesh.n_cells());
        std::iota(order.begin(), order.end(), 0);
        std::vector<int> shuffled = order;
        std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(5));
        auto local = [&space](int c) -> const Eigen::MatrixXd& {
            return space.element(c).mass;
        };
        const SparseMatrix a = assemble_sparse(dofs.total(), gather, local, order);
        const SparseMatrix b =
            assemble_sparse(dofs.total(), gather, local, shuffled);
        const double scale = Eigen::MatrixXd(a).cwiseAbs().maxCoeff();
        CHECK((Eigen::MatrixXd(a) - Eigen::MatrixXd(b)).cwiseAbs().maxCoeff() <
              1e-14 * scale);
    }
}

TEST_CASE("interpolation") {
    const PolygonalMesh mesh = generate_distorted_quads(4, 0.2, 21);
    const int k = 2;
    const SerendipitySpace space(mesh, k, 1.0);

    SUBCASE("global polynomials are reproduced cell-wise by Pi0") {
        auto p = [](Point q) { return 1.0 + 2.0 * q.x - q.y + 0.5 * q.x * q.y; };
        const StateVector u = space.interpolate(p);
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const ElementOperators& ops = space.element(c);
            const Eigen::VectorXd vals =
                ops.pi_zero_at_rule(space.gather(u.coeffs, c));
            for (std::size_t q = 0; q < ops.rule.points.size(); ++q)
                CHECK(vals[static_cast<long>(q)] ==
                      doctest::Approx(p(ops.rule.points[q])).epsilon(1e-10));
        }
    }

    SUBCASE("Allen-Cahn initial state") {
        auto u0 = [](Point p) {
            return std::cos(2 * M_PI * p.x * p.x) * std::cos(2 * M_PI * p.y * p.y);
        };
        const StateVector u = space.interpolate(u0);
        const auto& pts = space.dofs().boundary_dof_points();
        for (int i = 0; i < space.dofs().n_boundary(); ++i)
            CHECK(u.coeffs[i] == u0(pts[i]));
        CHECK(u.coeffs[0] == doctest::Approx(1.0));  // u0(0,0) = 1
    }

    SUBCASE("constants interpolate exactly") {
        const StateVector u = space.interpolate([](Point) { return 3.5; });
        for (int i = 0; i < space.dofs().n_boundary(); ++i)
            CHECK(u.coeffs[i] == 3.5);
        CHECK(space.l2_error(u.coeffs, [](Point, double) { return 3.5; }, 0.0) <
              1e-12);
    }
}

TEST_CASE("nonlinear dof vector") {
    const PolygonalMesh mesh = generate_structured_quads(3);
    const SerendipitySpace space(mesh, 4, 1.0);  // deficient cells, 1 moment each
    REQUIRE(space.dofs().n_moments() == 9);

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> val(-1.5, 1.5);
    Eigen::VectorXd U(space.dofs().total());
    for (long i = 0; i < U.size(); ++i) U[i] = val(rng);

    SUBCASE("zero nonlinearity") {
        const Eigen::VectorXd out =
            space.nonlinear_dof_vector(U, [](double) { return 0.0; });
        CHECK(out.lpNorm<Eigen::Infinity>() == 0.0);
    }

    SUBCASE("identity nonlinearity returns the state") {
        const Eigen::VectorXd out =
            space.nonlinear_dof_vector(U, [](double u) { return u; });
        for (int i = 0; i < space.dofs().n_boundary(); ++i)
            CHECK(out[i] == U[i]);  // boundary agrees bitwise
        CHECK((out - U).lpNorm<Eigen::Infinity>() < 1e-12);
    }

    SUBCASE("boundary entries are bitwise f(U_i)") {
        auto f = [](double u) { return u * u * u - u; };
        const Eigen::VectorXd out = space.nonlinear_dof_vector(U, f);
        for (int i = 0; i < space.dofs().n_boundary(); ++i)
            CHECK(out[i] == f(U[i]));
    }

    SUBCASE("moment entries match a brute-force quadrature oracle") {
        // smooth state: the cached quadrature resolves f(Pi0 u_h) well past
        // 1e-11 only when the projected field is mild
        const StateVector smooth = space.interpolate([](Point p) {
            return 0.7 * std::sin(2.0 * p.x) - 0.4 * std::cos(1.5 * p.y) + 0.3;
        });
        auto f = [](double u) { return 1.0 / (1.0 + u * u); };
        const Eigen::VectorXd out = space.nonlinear_dof_vector(smooth.coeffs, f);
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const ElementOperators& ops = space.element(c);
            const int off = space.dofs().moment_offset(c);
            const Eigen::VectorXd coeff = space.cell_projection(smooth.coeffs, c);
            auto pi0 = [&](Point x) {
                double acc = 0.0;
                for (int a = 0; a < ops.basis.size(); ++a)
                    acc += coeff[a] * ops.basis.eval(a, x);
                return acc;
            };
            for (int alpha = 0; alpha < ops.layout.n_moments; ++alpha) {
                const double oracle =
                    fine_integral(mesh.cell_points(c), [&](Point x) {
                        return f(pi0(x)) * ops.basis.eval(alpha, x);
                    }) /
                    ops.geo.area;
                CHECK(out[off + alpha] == doctest::Approx(oracle).epsilon(1e-11));
            }
        }
    }

    SUBCASE("constants through f(u)=u^2 on an ideal-case mesh") {
        const PolygonalMesh vor = import_mesh(kFixtures / "voronoi_0064.txt");
        const SerendipitySpace ideal(vor, 2, 1.0);
        REQUIRE(ideal.dofs().n_moments() == 0);
        const StateVector two = ideal.interpolate([](Point) { return 2.0; });
        const Eigen::VectorXd out = ideal.nonlinear_dof_vector(
            two.coeffs, [](double u) { return u * u; });
        for (long i = 0; i < out.size(); ++i) CHECK(out[i] == 4.0);
    }

    SUBCASE("non-finite f reports the DoF") {
        try {
            space.nonlinear_dof_vector(U, [](double) { return std::nan(""); });
            FAIL("expected non-finite error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonFiniteValue);
        }
    }
}

TEST_CASE("l2 error") {
    const PolygonalMesh mesh = generate_distorted_quads(4, 0.2, 42);
    const SerendipitySpace space(mesh, 2, 1.0);

    SUBCASE("interpolated polynomial has tiny error") {
        auto p = [](Point q, double) { return 2.0 - q.x + 3.0 * q.y * q.y; };
        const StateVector u = space.interpolate(p, 0.0);
        CHECK(space.l2_error(u.coeffs, p, 0.0) < 1e-10);
    }

    SUBCASE("unit constant against zero state") {
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(space.dofs().total());
        CHECK(space.l2_error(zero, [](Point, double) { return 1.0; }, 0.0) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("manufactured-solution interpolant against the fine oracle") {
        auto exact = [](Point p, double t) {
            return std::exp(-t) * std::cos(M_PI * p.x) * std::cos(M_PI * p.y);
        };
        const StateVector u = space.interpolate(exact, 1.0);
        const double err = space.l2_error(u.coeffs, exact, 1.0);
        double oracle_sq = 0.0;
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const Eigen::VectorXd coeff = space.cell_projection(u.coeffs, c);
            const ElementOperators& ops = space.element(c);
            oracle_sq += fine_integral(mesh.cell_points(c), [&](Point x) {
                double pi0 = 0.0;
                for (int a = 0; a < ops.basis.size(); ++a)
                    pi0 += coeff[a] * ops.basis.eval(a, x);
                const double d = exact(x, 1.0) - pi0;
                return d * d;
            });
        }
        // quadrature truncation of the trig integrand bounds the agreement
        CHECK(err == doctest::Approx(std::sqrt(oracle_sq)).epsilon(2e-6));
        // pinned regression value from the oracle (k=2, n=4, amplitude 0.2,
        // seed 42); refreshed only if the distortion law changes
        CHECK(err == doctest::Approx(2.6016110637e-03).epsilon(2e-6));
    }
}

TEST_CASE("dof reduction against the enhanced reference") {
    for (const char* name : {"voronoi_0064", "nonconvex_0032"}) {
        const PolygonalMesh mesh =
            import_mesh(kFixtures / (std::string(name) + ".txt"));
        for (int k = 2; k <= 5; ++k) {
            CAPTURE(name);
            CAPTURE(k);
            CHECK(svem_dof_count(mesh, k) < enhanced_dof_count(mesh, k));
        }
        CHECK(svem_dof_count(mesh, 1) == enhanced_dof_count(mesh, 1));
    }
    const PolygonalMesh dist = generate_distorted_quads(8, 0.2, 42);
    long prev_gap = 0;
    for (int k = 2; k <= 5; ++k) {
        const long gap = enhanced_dof_count(dist, k) - svem_dof_count(dist, k);
        CHECK(gap > prev_gap);  // reduction grows with k
        prev_gap = gap;
    }
}
