#pragma once

#include <vector>

#include "svem/element.hpp"
#include "svem/mesh.hpp"

namespace svem {

/// Global DoF numbering: vertices first, then k-1 DoFs per edge (edges in
/// sorted-endpoint order, nodes oriented from the lower global vertex id),
/// then the moment DoFs of deficient cells in cell order. Edge orientation by
/// global vertex id makes shared-edge DoFs agree from both incident cells.
class DofMap {
  public:
    DofMap(const PolygonalMesh& mesh, int k);

    int k() const { return k_; }
    int total() const { return total_; }
    int n_boundary() const { return n_boundary_; }
    int n_moments() const { return total_ - n_boundary_; }

    /// local -> global gather list, permutation-consistent with
    /// LocalDofLayout ordering.
    const std::vector<int>& cell_dofs(int c) const { return gather_[c]; }
    const LocalDofLayout& cell_layout(int c) const { return layouts_[c]; }

    /// Coordinates of boundary DoFs (vertex and edge Gauss-Lobatto nodes);
    /// indexed by global DoF id < n_boundary().
    const std::vector<Point>& boundary_dof_points() const { return points_; }

    int vertex_dof(int v) const { return v; }
    int edge_dof(int e, int slot) const;
    /// First moment DoF of cell c, or -1 when the cell carries none.
    int moment_offset(int c) const { return moment_offset_[c]; }

  private:
    int k_;
    int total_ = 0;
    int n_boundary_ = 0;
    int n_vertices_ = 0;
    std::vector<std::vector<int>> gather_;
    std::vector<LocalDofLayout> layouts_;
    std::vector<Point> points_;
    std::vector<int> moment_offset_;
};

/// Closed-form S-VEM global count for a mesh/k (matches DofMap::total).
long svem_dof_count(const PolygonalMesh& mesh, int k);

/// Reference count for the enhanced VEM on the same mesh: boundary DoFs plus
/// r_{k-2} moments on every cell.
long enhanced_dof_count(const PolygonalMesh& mesh, int k);

}  // namespace svem
