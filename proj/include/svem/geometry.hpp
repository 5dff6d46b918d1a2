#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace svem {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Strategy for computing eta_E, the number of distinct straight lines
/// containing at least one edge of a cell.
struct EtaStrategy {
    enum class Kind { Lazy, Stingy, AdaptiveStingy };

    Kind kind = Kind::AdaptiveStingy;
    double theta0 = 0.1;  // radians; directions closer than this share a line
    double rho0 = 0.05;   // edges shorter than rho0*h_E are ignored (adaptive)

    static EtaStrategy lazy() { return {Kind::Lazy, 0.1, 0.05}; }
    static EtaStrategy stingy(double theta = 0.1) {
        return {Kind::Stingy, theta, 0.05};
    }
    static EtaStrategy adaptive_stingy(double theta = 0.1, double rho = 0.05) {
        return {Kind::AdaptiveStingy, theta, rho};
    }
};

struct CellGeometry {
    double area = 0.0;
    Point centroid;
    double diameter = 0.0;           // max pairwise vertex distance
    std::vector<double> edge_lengths;
    int eta = 3;                     // distinct edge lines (per strategy)
    bool convex = false;             // weakly convex (collinear edges allowed)
    double regularity = 0.0;         // min_e |e| / h_E
};

/// Shoelace area/centroid, diameter, edge lengths, convexity and eta for a
/// CCW simple polygon. Throws Error(InvalidCell) on zero/negative area and
/// Error(NonSimpleCell) on self-intersection.
CellGeometry compute_geometry(std::span<const Point> cell,
                              const EtaStrategy& strategy = {});

/// eta_E alone; pre: valid cell. Clamped to [3, #edges].
int compute_eta(std::span<const Point> cell, const EtaStrategy& strategy);

double polygon_area(std::span<const Point> cell);  // signed
bool polygon_is_simple(std::span<const Point> cell);
bool polygon_is_convex(std::span<const Point> cell);  // weak, needs CCW

}  // namespace svem
