#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "svem/geometry.hpp"

namespace svem {

struct MeshEdge {
    int v0 = -1;  // v0 < v1 (global vertex ids)
    int v1 = -1;
    int cell_left = -1;   // cell traversing v0 -> v1
    int cell_right = -1;  // cell traversing v1 -> v0 (-1 on the boundary)

    bool boundary() const { return cell_left < 0 || cell_right < 0; }
};

struct BoundingBox {
    Point lo, hi;
};

/// Immutable conforming polygonal mesh of a 2D domain. Cells are CCW simple
/// polygons; interior edges have exactly two incident cells. Construction
/// validates all invariants (orientation, simplicity, tiling).
class PolygonalMesh {
  public:
    PolygonalMesh(std::vector<Point> vertices,
                  std::vector<std::vector<int>> cells,
                  const EtaStrategy& strategy = {});

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_cells() const { return static_cast<int>(cell_offsets_.size()) - 1; }
    int n_edges() const { return static_cast<int>(edges_.size()); }

    const Point& vertex(int v) const { return vertices_[v]; }
    const std::vector<Point>& vertices() const { return vertices_; }

    std::span<const int> cell(int c) const {
        return {cell_vertices_.data() + cell_offsets_[c],
                cell_vertices_.data() + cell_offsets_[c + 1]};
    }
    std::vector<Point> cell_points(int c) const;
    const CellGeometry& cell_geometry(int c) const { return geometry_[c]; }

    /// Edge ids in cell-boundary order: entry i is the edge from local vertex
    /// i to local vertex i+1.
    std::span<const int> cell_edges(int c) const {
        return {cell_edge_ids_.data() + cell_offsets_[c],
                cell_edge_ids_.data() + cell_offsets_[c + 1]};
    }
    const MeshEdge& edge(int e) const { return edges_[e]; }
    const std::vector<MeshEdge>& edges() const { return edges_; }

    const BoundingBox& bounding_box() const { return bbox_; }
    double domain_area() const { return domain_area_; }
    double max_diameter() const { return h_; }
    const EtaStrategy& eta_strategy() const { return strategy_; }

    /// Assumption-style diagnostics (star-shapedness w.r.t. centroid, edge
    /// ratio); never fatal.
    const std::vector<std::string>& quality_warnings() const { return warnings_; }

  private:
    std::vector<Point> vertices_;
    std::vector<int> cell_offsets_;
    std::vector<int> cell_vertices_;
    std::vector<int> cell_edge_ids_;
    std::vector<MeshEdge> edges_;
    std::vector<CellGeometry> geometry_;
    BoundingBox bbox_;
    double domain_area_ = 0.0;
    double h_ = 0.0;
    EtaStrategy strategy_;
    std::vector<std::string> warnings_;
};

/// n x n uniform quads on [0,1]^2.
PolygonalMesh generate_structured_quads(int n, const EtaStrategy& strategy = {});

/// Structured quads with interior vertices perturbed by amplitude/n in each
/// coordinate, drawn from a seeded deterministic generator. Boundary vertices
/// stay put. amplitude must lie in [0, 0.5).
PolygonalMesh generate_distorted_quads(int n, double amplitude, std::uint64_t seed,
                                       const EtaStrategy& strategy = {});

/// Text format "polymesh 1" (see README). Import validates everything;
/// export writes full-precision coordinates so that import(export(m))
/// round-trips indices exactly and coordinates bit-for-bit.
PolygonalMesh import_mesh(const std::filesystem::path& file,
                          const EtaStrategy& strategy = {});
void export_mesh(const PolygonalMesh& mesh, const std::filesystem::path& file);

}  // namespace svem
