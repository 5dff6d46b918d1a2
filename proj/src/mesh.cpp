#include "svem/mesh.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "svem/errors.hpp"

namespace svem {

PolygonalMesh::PolygonalMesh(std::vector<Point> vertices,
                             std::vector<std::vector<int>> cells,
                             const EtaStrategy& strategy)
    : vertices_(std::move(vertices)), strategy_(strategy) {
    if (vertices_.empty() || cells.empty())
        throw Error(ErrorCode::InvalidCell, "empty mesh");

    const int nv = n_vertices();
    cell_offsets_.push_back(0);
    for (const auto& c : cells) {
        for (int v : c)
            if (v < 0 || v >= nv)
                throw Error(ErrorCode::MalformedFile,
                            "vertex index " + std::to_string(v) + " out of range");
        cell_vertices_.insert(cell_vertices_.end(), c.begin(), c.end());
        cell_offsets_.push_back(static_cast<int>(cell_vertices_.size()));
    }

    bbox_.lo = bbox_.hi = vertices_[0];
    for (const Point& p : vertices_) {
        bbox_.lo.x = std::min(bbox_.lo.x, p.x);
        bbox_.lo.y = std::min(bbox_.lo.y, p.y);
        bbox_.hi.x = std::max(bbox_.hi.x, p.x);
        bbox_.hi.y = std::max(bbox_.hi.y, p.y);
    }

    geometry_.reserve(n_cells());
    double total_area = 0.0;
    for (int c = 0; c < n_cells(); ++c) {
        const auto pts = cell_points(c);
        if (polygon_area(pts) < 0)
            throw Error(ErrorCode::Orientation,
                        "cell " + std::to_string(c) + " is clockwise");
        try {
            geometry_.push_back(compute_geometry(pts, strategy_));
        } catch (const Error& e) {
            throw Error(e.code(), "cell " + std::to_string(c) + ": " + e.what());
        }
        total_area += geometry_.back().area;
        h_ = std::max(h_, geometry_.back().diameter);
    }

    // edges, sorted by endpoint pair for deterministic numbering
    std::map<std::pair<int, int>, int> edge_ids;
    for (int c = 0; c < n_cells(); ++c) {
        const auto verts = cell(c);
        const int m = static_cast<int>(verts.size());
        for (int i = 0; i < m; ++i) {
            const int a = verts[i];
            const int b = verts[(i + 1) % m];
            if (a == b)
                throw Error(ErrorCode::InvalidCell,
                            "cell " + std::to_string(c) + " repeats vertex " +
                                std::to_string(a));
            edge_ids.emplace(std::minmax(a, b), -1);
        }
    }
    edges_.reserve(edge_ids.size());
    for (auto& [key, id] : edge_ids) {
        id = static_cast<int>(edges_.size());
        edges_.push_back({key.first, key.second, -1, -1});
    }
    cell_edge_ids_.resize(cell_vertices_.size());
    for (int c = 0; c < n_cells(); ++c) {
        const auto verts = cell(c);
        const int m = static_cast<int>(verts.size());
        for (int i = 0; i < m; ++i) {
            const int a = verts[i];
            const int b = verts[(i + 1) % m];
            const int e = edge_ids.at(std::minmax(a, b));
            cell_edge_ids_[cell_offsets_[c] + i] = e;
            int& slot = (a < b) ? edges_[e].cell_left : edges_[e].cell_right;
            if (slot != -1)
                throw Error(ErrorCode::NonSimpleCell,
                            "edge (" + std::to_string(a) + "," + std::to_string(b) +
                                ") traversed twice in the same direction");
            slot = c;
        }
    }
    for (const MeshEdge& e : edges_)
        if (e.cell_left < 0 && e.cell_right < 0)
            throw Error(ErrorCode::InvalidCell, "dangling edge");

    domain_area_ = (bbox_.hi.x - bbox_.lo.x) * (bbox_.hi.y - bbox_.lo.y);
    if (std::abs(total_area - domain_area_) > 1e-12 * domain_area_) {
        // non-rectangular domains: fall back to the cell-area sum as the
        // domain measure, but a mismatch on a rectangle is a tiling defect
        bool boundary_is_box = true;
        for (const MeshEdge& e : edges_) {
            if (!e.boundary()) continue;
            const Point& p = vertices_[e.v0];
            const Point& q = vertices_[e.v1];
            auto on_box = [&](const Point& r) {
                return r.x == bbox_.lo.x || r.x == bbox_.hi.x ||
                       r.y == bbox_.lo.y || r.y == bbox_.hi.y;
            };
            if (!on_box(p) || !on_box(q)) boundary_is_box = false;
        }
        if (boundary_is_box)
            throw Error(ErrorCode::InvalidCell,
                        "cells do not tile the bounding box: sum of areas " +
                            std::to_string(total_area) + " vs " +
                            std::to_string(domain_area_));
        domain_area_ = total_area;
    }

    for (int c = 0; c < n_cells(); ++c) {
        const CellGeometry& g = geometry_[c];
        if (g.regularity < 0.01)
            warnings_.push_back("cell " + std::to_string(c) +
                                ": edge ratio " + std::to_string(g.regularity) +
                                " below 0.01 (shape-regularity at risk)");
        const auto pts = cell_points(c);
        const int m = static_cast<int>(pts.size());
        for (int i = 0; i < m; ++i) {
            const double tri2 = cross(pts[i] - g.centroid, pts[(i + 1) % m] - g.centroid);
            if (tri2 <= 0.0) {
                warnings_.push_back("cell " + std::to_string(c) +
                                    " is not star-shaped w.r.t. its centroid");
                break;
            }
        }
    }
}

std::vector<Point> PolygonalMesh::cell_points(int c) const {
    const auto verts = cell(c);
    std::vector<Point> pts(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) pts[i] = vertices_[verts[i]];
    return pts;
}

PolygonalMesh generate_structured_quads(int n, const EtaStrategy& strategy) {
    return generate_distorted_quads(n, 0.0, 0, strategy);
}

namespace {

// uniform double in [0,1) from the raw 64-bit stream; avoids the
// implementation-defined std::uniform_real_distribution
double unit_uniform(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// xorshift-style SplitMix64: stable across platforms
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

}  // namespace

PolygonalMesh generate_distorted_quads(int n, double amplitude,
                                       std::uint64_t seed,
                                       const EtaStrategy& strategy) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    if (!(amplitude >= 0.0 && amplitude < 0.5))
        throw Error(ErrorCode::InvalidArgument,
                    "amplitude must lie in [0, 0.5), got " +
                        std::to_string(amplitude));

    const double dx = 1.0 / n;
    std::vector<Point> verts((n + 1) * (n + 1));
    SplitMix64 rng{seed};
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            Point p{i * dx, j * dx};
            const bool interior = i > 0 && i < n && j > 0 && j < n;
            if (interior && amplitude > 0.0) {
                p.x += amplitude * dx * (2.0 * unit_uniform(rng.next()) - 1.0);
                p.y += amplitude * dx * (2.0 * unit_uniform(rng.next()) - 1.0);
            } else if (amplitude > 0.0) {
                rng.next();  // keep the stream aligned with interior layout
                rng.next();
            }
            verts[j * (n + 1) + i] = p;
        }
    }
    std::vector<std::vector<int>> cells;
    cells.reserve(n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int v = j * (n + 1) + i;
            cells.push_back({v, v + 1, v + n + 2, v + n + 1});
        }
    return PolygonalMesh(std::move(verts), std::move(cells), strategy);
}

PolygonalMesh import_mesh(const std::filesystem::path& file,
                          const EtaStrategy& strategy) {
    std::ifstream in(file);
    if (!in)
        throw Error(ErrorCode::MalformedFile, "cannot open " + file.string());

    auto next_line = [&in, &file](std::string& line) {
        while (std::getline(in, line)) {
            const auto pos = line.find('#');
            if (pos != std::string::npos) line.erase(pos);
            if (line.find_first_not_of(" \t\r\n") != std::string::npos) return;
        }
        throw Error(ErrorCode::MalformedFile,
                    "unexpected end of file in " + file.string());
    };

    std::string line;
    next_line(line);
    {
        std::istringstream ss(line);
        std::string magic;
        int version = 0;
        ss >> magic >> version;
        if (magic != "polymesh" || version != 1)
            throw Error(ErrorCode::MalformedFile,
                        "expected 'polymesh 1' header in " + file.string());
    }
    next_line(line);
    int nv = 0, nc = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> nv >> nc) || nv < 3 || nc < 1)
            throw Error(ErrorCode::MalformedFile, "bad counts line: " + line);
    }
    std::vector<Point> verts(nv);
    for (int i = 0; i < nv; ++i) {
        next_line(line);
        std::istringstream ss(line);
        if (!(ss >> verts[i].x >> verts[i].y))
            throw Error(ErrorCode::MalformedFile, "bad vertex line: " + line);
    }
    std::vector<std::vector<int>> cells(nc);
    for (int c = 0; c < nc; ++c) {
        next_line(line);
        std::istringstream ss(line);
        int m = 0;
        if (!(ss >> m) || m < 3)
            throw Error(ErrorCode::MalformedFile, "bad cell line: " + line);
        cells[c].resize(m);
        for (int i = 0; i < m; ++i)
            if (!(ss >> cells[c][i]))
                throw Error(ErrorCode::MalformedFile, "bad cell line: " + line);
    }
    return PolygonalMesh(std::move(verts), std::move(cells), strategy);
}

void export_mesh(const PolygonalMesh& mesh, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out)
        throw Error(ErrorCode::MalformedFile, "cannot write " + file.string());
    out << "polymesh 1\n" << mesh.n_vertices() << ' ' << mesh.n_cells() << '\n';
    char buf[64];
    for (const Point& p : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        out << buf;
    }
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto verts = mesh.cell(c);
        out << verts.size();
        for (int v : verts) out << ' ' << v;
        out << '\n';
    }
}

}  // namespace svem
