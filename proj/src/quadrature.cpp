#include "svem/quadrature.hpp"

#include <array>
#include <cmath>
#include <string>

#include "svem/errors.hpp"

namespace svem {

double legendre_p(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return p0;
    for (int m = 2; m <= n; ++m) {
        const double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double legendre_p_derivative(int n, double x) {
    if (n == 0) return 0.0;
    // (1-x^2) P_n' = n (P_{n-1} - x P_n)
    const double denom = 1.0 - x * x;
    if (std::abs(denom) < 1e-14) {
        // P_n'(+-1) = (+-1)^{n-1} n(n+1)/2
        const double sign = (x > 0 || n % 2 == 1) ? 1.0 : -1.0;
        return sign * 0.5 * n * (n + 1);
    }
    return n * (legendre_p(n - 1, x) - x * legendre_p(n, x)) / denom;
}

Rule1d gauss_legendre(int p) {
    if (p < 1) throw Error(ErrorCode::InvalidArgument, "gauss_legendre needs p >= 1");
    Rule1d rule;
    rule.nodes.resize(p);
    rule.weights.resize(p);
    for (int i = 0; i < p; ++i) {
        double x = std::cos(M_PI * (4.0 * i + 3.0) / (4.0 * p + 2.0));
        for (int it = 0; it < 100; ++it) {
            const double f = legendre_p(p, x);
            const double df = legendre_p_derivative(p, x);
            const double dx = f / df;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double dp = legendre_p_derivative(p, x);
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // symmetrize and sort ascending
    for (int i = 0; i < p / 2; ++i) {
        const double m = 0.5 * (rule.nodes[i] - rule.nodes[p - 1 - i]);
        rule.nodes[i] = m;
        rule.nodes[p - 1 - i] = -m;
        const double w = 0.5 * (rule.weights[i] + rule.weights[p - 1 - i]);
        rule.weights[i] = rule.weights[p - 1 - i] = w;
    }
    if (p % 2 == 1) rule.nodes[p / 2] = 0.0;
    return rule;
}

Rule1d gauss_lobatto(int p) {
    if (p < 2) throw Error(ErrorCode::InvalidArgument, "gauss_lobatto needs p >= 2");
    Rule1d rule;
    rule.nodes.resize(p);
    rule.weights.resize(p);
    const int n = p - 1;  // interior nodes are roots of P_n'
    rule.nodes[0] = -1.0;
    rule.nodes[p - 1] = 1.0;
    for (int i = 1; i < p - 1; ++i) {
        double x = -std::cos(M_PI * i / n);  // Chebyshev-Lobatto guess
        for (int it = 0; it < 100; ++it) {
            const double f = legendre_p_derivative(n, x);
            // P_n'' from the Legendre ODE, valid for |x| < 1
            const double ddf =
                (2.0 * x * f - n * (n + 1) * legendre_p(n, x)) / (1.0 - x * x);
            const double dx = f / ddf;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
    }
    for (int i = 1 + (p - 2) / 2; i < p - 1; ++i)
        rule.nodes[i] = -rule.nodes[p - 1 - i];  // enforce symmetry
    if (p % 2 == 1) rule.nodes[p / 2] = 0.0;
    for (int i = 0; i < p; ++i) {
        const double pn = legendre_p(n, rule.nodes[i]);
        rule.weights[i] = 2.0 / (p * n * pn * pn);
    }
    return rule;
}

EdgeRule make_edge_rule(int k) {
    return {gauss_lobatto(k + 1), gauss_legendre(k + 1)};
}

namespace {

double tri_signed_area(Point a, Point b, Point c) {
    return 0.5 * cross(b - a, c - a);
}

bool point_in_triangle(Point p, Point a, Point b, Point c) {
    const double d1 = cross(b - a, p - a);
    const double d2 = cross(c - b, p - b);
    const double d3 = cross(a - c, p - c);
    return d1 >= 0 && d2 >= 0 && d3 >= 0;
}

// O(n^2) ear clipping for simple CCW polygons.
std::vector<std::array<int, 3>> ear_clip(std::span<const Point> cell) {
    const int n = static_cast<int>(cell.size());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::vector<std::array<int, 3>> tris;
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        scale = std::max(scale, std::abs(tri_signed_area(
                                    cell[i], cell[(i + 1) % n], cell[(i + 2) % n])));

    int guard = 0;
    while (idx.size() > 3) {
        bool clipped = false;
        const int m = static_cast<int>(idx.size());
        for (int i = 0; i < m; ++i) {
            const int ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
            if (tri_signed_area(cell[ia], cell[ib], cell[ic]) <= 1e-14 * scale)
                continue;
            bool ear = true;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic) continue;
                if (point_in_triangle(cell[j], cell[ia], cell[ib], cell[ic])) {
                    ear = false;
                    break;
                }
            }
            if (ear) {
                tris.push_back({ia, ib, ic});
                idx.erase(idx.begin() + i);
                clipped = true;
                break;
            }
        }
        if (!clipped) {
            if (++guard > 2)
                throw Error(ErrorCode::InvalidCell,
                            "ear clipping failed: polygon not simple?");
            // tolerate collinear runs by clipping the flattest ear
            int best = -1;
            double best_area = -1.0;
            for (int i = 0; i < m; ++i) {
                const int ia = idx[(i + m - 1) % m], ib = idx[i],
                          ic = idx[(i + 1) % m];
                const double a = tri_signed_area(cell[ia], cell[ib], cell[ic]);
                if (a > best_area) {
                    best_area = a;
                    best = i;
                }
            }
            if (best < 0 || best_area <= 0)
                throw Error(ErrorCode::InvalidCell, "degenerate polygon");
            const int m2 = static_cast<int>(idx.size());
            tris.push_back({idx[(best + m2 - 1) % m2], idx[best],
                            idx[(best + 1) % m2]});
            idx.erase(idx.begin() + best);
        }
    }
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

}  // namespace

std::vector<std::array<int, 3>> triangulate_polygon(std::span<const Point> cell) {
    return ear_clip(cell);
}

PolygonRule polygon_quadrature(std::span<const Point> cell, int degree) {
    if (degree < 0) degree = 0;
    const std::size_t n = cell.size();
    if (n < 3) throw Error(ErrorCode::InvalidCell, "polygon needs >= 3 vertices");

    // triangles as point triples: centroid fan if star-shaped, else ear clip
    std::vector<std::array<Point, 3>> tris;
    Point centroid;
    {
        double a2 = 0.0, cx = 0.0, cy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = cross(cell[i], cell[(i + 1) % n]);
            a2 += w;
            cx += (cell[i].x + cell[(i + 1) % n].x) * w;
            cy += (cell[i].y + cell[(i + 1) % n].y) * w;
        }
        if (a2 <= 0.0)
            throw Error(ErrorCode::InvalidCell, "zero or negative area polygon");
        centroid = {cx / (3.0 * a2), cy / (3.0 * a2)};
    }
    bool fan_ok = true;
    for (std::size_t i = 0; i < n && fan_ok; ++i)
        if (tri_signed_area(centroid, cell[i], cell[(i + 1) % n]) <= 0.0)
            fan_ok = false;
    if (fan_ok) {
        for (std::size_t i = 0; i < n; ++i)
            tris.push_back({centroid, cell[i], cell[(i + 1) % n]});
    } else {
        for (const auto& t : ear_clip(cell))
            tris.push_back({cell[t[0]], cell[t[1]], cell[t[2]]});
    }

    // collapsed (Duffy) Gauss rule on each triangle: map the unit square
    // (u,v) -> (u, v(1-u)) onto the reference triangle; a degree-d integrand
    // becomes degree d+1 in u and d in v, so p points per direction with
    // 2p-1 >= d+1 are exact.
    const int p = std::max(1, (degree + 3) / 2);
    const Rule1d g = gauss_legendre(p);
    PolygonRule rule;
    rule.exactness = degree;
    rule.points.reserve(tris.size() * p * p);
    std::vector<double> w;
    w.reserve(tris.size() * p * p);
    for (const auto& t : tris) {
        const double jac = 2.0 * tri_signed_area(t[0], t[1], t[2]);
        for (int i = 0; i < p; ++i) {
            const double u = 0.5 * (g.nodes[i] + 1.0);
            for (int j = 0; j < p; ++j) {
                const double v = 0.5 * (g.nodes[j] + 1.0) * (1.0 - u);
                const Point x = t[0] + u * (t[1] - t[0]) + v * (t[2] - t[0]);
                rule.points.push_back(x);
                w.push_back(0.25 * g.weights[i] * g.weights[j] * (1.0 - u) * jac);
            }
        }
    }
    rule.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<long>(w.size()));
    return rule;
}

}  // namespace svem
