#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "svem/errors.hpp"
#include "svem/mesh.hpp"

using namespace svem;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SVEM_FIXTURE_DIR;

// independent shoelace oracle: triangulate from vertex 0
void fan_area_centroid(const std::vector<Point>& poly, double& area,
                       Point& centroid) {
    area = 0.0;
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        const Point a = poly[0], b = poly[i], c = poly[i + 1];
        const double t = 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
        area += t;
        cx += t * (a.x + b.x + c.x) / 3.0;
        cy += t * (a.y + b.y + c.y) / 3.0;
    }
    centroid = {cx / area, cy / area};
}

std::vector<Point> rigid_motion(const std::vector<Point>& poly, double angle,
                                Point shift, double scale) {
    std::vector<Point> out;
    for (const Point& p : poly)
        out.push_back({scale * (std::cos(angle) * p.x - std::sin(angle) * p.y) + shift.x,
                       scale * (std::sin(angle) * p.x + std::cos(angle) * p.y) + shift.y});
    return out;
}

double mesh_area(const PolygonalMesh& m) {
    double a = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) a += m.cell_geometry(c).area;
    return a;
}

}  // namespace

TEST_CASE("geometry of the unit square") {
    const std::vector<Point> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const CellGeometry g = compute_geometry(sq);
    CHECK(g.area == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.centroid.x == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.centroid.y == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.diameter == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(g.convex);
}

TEST_CASE("geometry of the L-shaped hexagon against the fan oracle") {
    const std::vector<Point> L = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    double area_oracle;
    Point centroid_oracle;
    fan_area_centroid(L, area_oracle, centroid_oracle);
    CHECK(area_oracle == doctest::Approx(3.0).epsilon(1e-15));

    const CellGeometry g = compute_geometry(L);
    CHECK(g.area == doctest::Approx(area_oracle).epsilon(1e-14));
    CHECK(g.centroid.x == doctest::Approx(centroid_oracle.x).epsilon(1e-14));
    CHECK(g.centroid.y == doctest::Approx(centroid_oracle.y).epsilon(1e-14));
    CHECK(g.centroid.x == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
    CHECK_FALSE(g.convex);
}

TEST_CASE("degenerate cells are rejected") {
    const std::vector<Point> degenerate = {{0, 0}, {1, 0}, {1, 0}};
    CHECK_THROWS_AS(compute_geometry(degenerate), Error);
    try {
        compute_geometry(degenerate);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidCell);
    }
}

TEST_CASE("eta strategies") {
    const std::vector<Point> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(compute_eta(square, EtaStrategy::stingy(1e-6)) == 4);
    CHECK(compute_eta(square, EtaStrategy::lazy()) == 3);

    // split bottom edge: two exactly collinear edges share one line
    const std::vector<Point> split = {{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(compute_eta(split, EtaStrategy::stingy(1e-6)) == 4);

    // strictly convex pentagon: eta = N
    std::vector<Point> pent;
    for (int i = 0; i < 5; ++i)
        pent.push_back({std::cos(2 * M_PI * i / 5), std::sin(2 * M_PI * i / 5)});
    CHECK(compute_eta(pent, EtaStrategy::stingy()) == 5);
    CHECK(compute_geometry(pent, EtaStrategy::adaptive_stingy()).eta == 5);
}

TEST_CASE("eta monotonicity and invariance") {
    // pentagon with one short edge and a nearly-flat corner
    const std::vector<Point> poly = {
        {0, 0}, {1, 0}, {1.02, 0.001}, {1.5, 0.9}, {0.2, 1.1}};
    const int n_edges = static_cast<int>(poly.size());
    const int eta_stingy = compute_eta(poly, EtaStrategy::stingy(0.1));
    const int eta_adaptive = compute_eta(poly, EtaStrategy::adaptive_stingy(0.1, 0.05));
    CHECK(compute_eta(poly, EtaStrategy::lazy()) == 3);
    CHECK(eta_adaptive <= eta_stingy);
    CHECK(eta_stingy <= n_edges);

    for (double angle : {0.3, 1.1, 2.7}) {
        const auto moved = rigid_motion(poly, angle, {3.0, -2.0}, 1.0);
        CHECK(compute_eta(moved, EtaStrategy::stingy(0.1)) == eta_stingy);
        CHECK(compute_eta(moved, EtaStrategy::adaptive_stingy(0.1, 0.05)) ==
              eta_adaptive);
    }
    for (double scale : {0.01, 7.0}) {
        const auto scaled = rigid_motion(poly, 0.0, {0.0, 0.0}, scale);
        CHECK(compute_eta(scaled, EtaStrategy::adaptive_stingy(0.1, 0.05)) ==
              eta_adaptive);
    }
}

TEST_CASE("structured quads") {
    const PolygonalMesh one = generate_structured_quads(1);
    CHECK(one.n_cells() == 1);
    CHECK(one.n_vertices() == 4);

    const PolygonalMesh m = generate_structured_quads(4);
    CHECK(m.n_vertices() == 25);
    CHECK(m.n_edges() == 40);
    CHECK(m.n_cells() == 16);
    CHECK(mesh_area(m) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("distorted quads: validity, determinism, rejection") {
    const PolygonalMesh m = generate_distorted_quads(4, 0.2, 42);
    CHECK(mesh_area(m) == doctest::Approx(1.0).epsilon(1e-12));
    for (int c = 0; c < m.n_cells(); ++c)
        CHECK(m.cell_geometry(c).area > 0.0);  // construction validated CCW+simple

    // boundary vertices unperturbed
    for (int v = 0; v < m.n_vertices(); ++v) {
        const Point p = m.vertex(v);
        const bool boundary = p.x < 1e-12 || p.x > 1 - 1e-9 || p.y < 1e-12 ||
                              p.y > 1 - 1e-9;
        if (boundary) {
            CHECK(std::abs(std::round(p.x * 4) / 4 - p.x) < 1e-15);
            CHECK(std::abs(std::round(p.y * 4) / 4 - p.y) < 1e-15);
        }
    }

    const PolygonalMesh m2 = generate_distorted_quads(4, 0.2, 42);
    for (int v = 0; v < m.n_vertices(); ++v) {
        CHECK(m.vertex(v).x == m2.vertex(v).x);  // bitwise determinism
        CHECK(m.vertex(v).y == m2.vertex(v).y);
    }
    const PolygonalMesh m3 = generate_distorted_quads(4, 0.2, 43);
    bool any_diff = false;
    for (int v = 0; v < m.n_vertices() && !any_diff; ++v)
        any_diff = m.vertex(v).x != m3.vertex(v).x;
    CHECK(any_diff);

    CHECK_THROWS_AS(generate_distorted_quads(4, 0.5, 42), Error);
    CHECK_THROWS_AS(generate_distorted_quads(4, 0.7, 42), Error);
}

TEST_CASE("mesh import/export round trip") {
    const fs::path dir = fs::temp_directory_path() / "svem_mesh_test";
    fs::create_directories(dir);

    SUBCASE("single square file") {
        const fs::path file = dir / "square.txt";
        std::ofstream(file) << "polymesh 1\n# a comment\n4 1\n0 0\n1 0\n1 1\n0 1\n"
                            << "4 0 1 2 3\n";
        const PolygonalMesh m = import_mesh(file);
        CHECK(m.n_cells() == 1);
        CHECK(m.cell_geometry(0).area == doctest::Approx(1.0));
    }

    SUBCASE("clockwise cell raises orientation error") {
        const fs::path file = dir / "cw.txt";
        std::ofstream(file) << "polymesh 1\n4 1\n0 0\n1 0\n1 1\n0 1\n4 0 3 2 1\n";
        try {
            import_mesh(file);
            FAIL("expected orientation error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Orientation);
        }
    }

    SUBCASE("malformed file") {
        const fs::path file = dir / "bad.txt";
        std::ofstream(file) << "polymesh 2\n4 1\n";
        try {
            import_mesh(file);
            FAIL("expected malformed-file error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MalformedFile);
        }
    }

    SUBCASE("non-simple cell") {
        const fs::path file = dir / "bowtie.txt";
        std::ofstream(file) << "polymesh 1\n4 1\n0 0\n1 1\n1 0\n0 1\n4 0 1 2 3\n";
        CHECK_THROWS_AS(import_mesh(file), Error);
    }

    SUBCASE("round trip is exact") {
        const PolygonalMesh m = generate_distorted_quads(5, 0.23, 7);
        const fs::path file = dir / "rt.txt";
        export_mesh(m, file);
        const PolygonalMesh back = import_mesh(file);
        REQUIRE(back.n_vertices() == m.n_vertices());
        REQUIRE(back.n_cells() == m.n_cells());
        for (int v = 0; v < m.n_vertices(); ++v) {
            CHECK(back.vertex(v).x == m.vertex(v).x);
            CHECK(back.vertex(v).y == m.vertex(v).y);
        }
        for (int c = 0; c < m.n_cells(); ++c) {
            const auto a = m.cell(c);
            const auto b = back.cell(c);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
        }
    }
}

TEST_CASE("shipped fixtures pass all invariants") {
    for (const char* name :
         {"voronoi_0064", "voronoi_0256", "voronoi_1024", "nonconvex_0032",
          "nonconvex_0128"}) {
        CAPTURE(name);
        const PolygonalMesh m = import_mesh(kFixtures / (std::string(name) + ".txt"));
        CHECK(mesh_area(m) == doctest::Approx(1.0).epsilon(1e-12));
        int boundary_edges = 0;
        for (const MeshEdge& e : m.edges()) {
            const int incident = (e.cell_left >= 0) + (e.cell_right >= 0);
            CHECK(incident >= 1);
            if (e.boundary()) ++boundary_edges;
        }
        CHECK(boundary_edges > 0);
    }

    // 64-cell Voronoi fixture, as shipped
    const PolygonalMesh vor = import_mesh(kFixtures / "voronoi_0064.txt");
    CHECK(vor.n_cells() == 64);
    for (int c = 0; c < vor.n_cells(); ++c) CHECK(vor.cell_geometry(c).convex);

    // the non-convex family is built so eta_E = 8 under the default strategy
    const PolygonalMesh nc = import_mesh(kFixtures / "nonconvex_0032.txt");
    for (int c = 0; c < nc.n_cells(); ++c) {
        CHECK(nc.cell_geometry(c).eta == 8);
        CHECK_FALSE(nc.cell_geometry(c).convex);
    }
}
