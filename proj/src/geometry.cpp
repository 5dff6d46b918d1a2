#include "svem/geometry.hpp"

#include <algorithm>
#include <string>

#include "svem/errors.hpp"

namespace svem {

double polygon_area(std::span<const Point> cell) {
    const std::size_t n = cell.size();
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = cell[i];
        const Point& q = cell[(i + 1) % n];
        a += cross(p, q);
    }
    return 0.5 * a;
}

namespace {

bool segments_intersect(Point a, Point b, Point c, Point d) {
    // proper intersection of open segments (shared endpoints excluded by caller)
    auto orient = [](Point p, Point q, Point r) { return cross(q - p, r - p); };
    const double d1 = orient(c, d, a);
    const double d2 = orient(c, d, b);
    const double d3 = orient(a, b, c);
    const double d4 = orient(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

bool polygon_is_simple(std::span<const Point> cell) {
    const std::size_t n = cell.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (they share a vertex)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(cell[i], cell[(i + 1) % n], cell[j],
                                   cell[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

bool polygon_is_convex(std::span<const Point> cell) {
    const std::size_t n = cell.size();
    double scale = 0.0;
    std::vector<double> turns(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point e0 = cell[(i + 1) % n] - cell[i];
        const Point e1 = cell[(i + 2) % n] - cell[(i + 1) % n];
        turns[i] = cross(e0, e1);
        scale = std::max(scale, std::abs(turns[i]));
    }
    if (scale == 0.0) return false;
    return std::all_of(turns.begin(), turns.end(),
                       [scale](double t) { return t > -1e-12 * scale; });
}

namespace {

// Edge directions of the cell, mod pi, plus lengths.
struct EdgeDirs {
    std::vector<double> angle;
    std::vector<double> length;
};

EdgeDirs edge_directions(std::span<const Point> cell) {
    EdgeDirs d;
    const std::size_t n = cell.size();
    d.angle.resize(n);
    d.length.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point e = cell[(i + 1) % n] - cell[i];
        d.angle[i] = std::atan2(e.y, e.x);
        d.length[i] = norm(e);
    }
    return d;
}

double line_angle_gap(double a, double b) {
    double g = std::fmod(std::abs(a - b), M_PI);
    return std::min(g, M_PI - g);
}

int count_direction_groups(const std::vector<double>& angles, double theta0) {
    const std::size_t n = angles.size();
    if (n == 0) return 0;
    int groups = 1;
    for (std::size_t i = 1; i < n; ++i)
        if (line_angle_gap(angles[i], angles[i - 1]) >= theta0) ++groups;
    // cyclic wrap: first and last edge may lie on one line
    if (n > 1 && groups > 1 &&
        line_angle_gap(angles.front(), angles.back()) < theta0)
        --groups;
    return groups;
}

}  // namespace

int compute_eta(std::span<const Point> cell, const EtaStrategy& strategy) {
    const int n_edges = static_cast<int>(cell.size());
    if (strategy.kind == EtaStrategy::Kind::Lazy) return 3;

    EdgeDirs dirs = edge_directions(cell);
    std::vector<double> kept = dirs.angle;
    if (strategy.kind == EtaStrategy::Kind::AdaptiveStingy) {
        double h = 0.0;
        for (std::size_t i = 0; i < cell.size(); ++i)
            for (std::size_t j = i + 1; j < cell.size(); ++j)
                h = std::max(h, distance(cell[i], cell[j]));
        kept.clear();
        for (std::size_t i = 0; i < dirs.angle.size(); ++i)
            if (dirs.length[i] >= strategy.rho0 * h) kept.push_back(dirs.angle[i]);
        if (kept.empty()) return 3;
    }
    const int groups = count_direction_groups(kept, strategy.theta0);
    return std::clamp(groups, 3, std::max(3, n_edges));
}

CellGeometry compute_geometry(std::span<const Point> cell,
                              const EtaStrategy& strategy) {
    const std::size_t n = cell.size();
    if (n < 3)
        throw Error(ErrorCode::InvalidCell,
                    "polygon needs >= 3 vertices, got " + std::to_string(n));

    CellGeometry g;
    double a2 = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = cell[i];
        const Point& q = cell[(i + 1) % n];
        const double w = cross(p, q);
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    g.area = 0.5 * a2;

    g.diameter = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            g.diameter = std::max(g.diameter, distance(cell[i], cell[j]));

    if (!(g.area > 1e-14 * g.diameter * g.diameter))
        throw Error(ErrorCode::InvalidCell, "zero or negative signed area");
    if (!polygon_is_simple(cell))
        throw Error(ErrorCode::NonSimpleCell, "self-intersecting polygon");

    g.centroid = {cx / (3.0 * a2), cy / (3.0 * a2)};
    g.edge_lengths.resize(n);
    double min_edge = g.diameter;
    for (std::size_t i = 0; i < n; ++i) {
        g.edge_lengths[i] = distance(cell[i], cell[(i + 1) % n]);
        min_edge = std::min(min_edge, g.edge_lengths[i]);
    }
    g.regularity = min_edge / g.diameter;
    g.convex = polygon_is_convex(cell);
    g.eta = compute_eta(cell, strategy);
    return g;
}

}  // namespace svem
