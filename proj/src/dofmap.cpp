#include "svem/dofmap.hpp"

#include <string>

#include "svem/errors.hpp"

namespace svem {

int DofMap::edge_dof(int e, int slot) const {
    return n_vertices_ + e * (k_ - 1) + slot;
}

DofMap::DofMap(const PolygonalMesh& mesh, int k) : k_(k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    n_vertices_ = mesh.n_vertices();
    n_boundary_ = mesh.n_vertices() + (k - 1) * mesh.n_edges();

    const Rule1d gl = gauss_lobatto(k + 1);

    points_.resize(n_boundary_);
    for (int v = 0; v < mesh.n_vertices(); ++v) points_[v] = mesh.vertex(v);
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const Point a = mesh.vertex(mesh.edge(e).v0);  // lower vertex id
        const Point b = mesh.vertex(mesh.edge(e).v1);
        const Point mid = 0.5 * (a + b);
        const Point half = 0.5 * (b - a);
        for (int j = 1; j < k; ++j)
            points_[edge_dof(e, j - 1)] = mid + gl.nodes[j] * half;
    }

    moment_offset_.assign(mesh.n_cells(), -1);
    layouts_.reserve(mesh.n_cells());
    int next_moment = n_boundary_;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellGeometry& geo = mesh.cell_geometry(c);
        layouts_.push_back(
            make_dof_layout(k, static_cast<int>(mesh.cell(c).size()), geo.eta));
        if (layouts_.back().deficient) {
            if (!geo.convex)
                throw Error(ErrorCode::UnsupportedConfiguration,
                            "cell " + std::to_string(c) +
                                " is non-convex with k >= eta_E");
            moment_offset_[c] = next_moment;
            next_moment += layouts_.back().n_moments;
        }
    }
    total_ = next_moment;

    gather_.resize(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto verts = mesh.cell(c);
        const auto edges = mesh.cell_edges(c);
        const int m = static_cast<int>(verts.size());
        const LocalDofLayout& layout = layouts_[c];
        std::vector<int>& g = gather_[c];
        g.resize(layout.total);
        for (int i = 0; i < m; ++i) g[i] = verts[i];
        for (int i = 0; i < m && k > 1; ++i) {
            const int e = edges[i];
            const bool forward = mesh.edge(e).v0 == verts[i];
            for (int j = 1; j < k; ++j) {
                const int slot = forward ? j - 1 : (k - 1) - j;
                g[edge_node_dof(layout, i, j)] = edge_dof(e, slot);
            }
        }
        for (int alpha = 0; alpha < layout.n_moments; ++alpha)
            g[layout.n_boundary + alpha] = moment_offset_[c] + alpha;
    }
}

long svem_dof_count(const PolygonalMesh& mesh, int k) {
    long total = mesh.n_vertices() + static_cast<long>(k - 1) * mesh.n_edges();
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int eta = mesh.cell_geometry(c).eta;
        if (k >= eta) total += ScaledMonomialBasis::dimension(k - eta);
    }
    return total;
}

long enhanced_dof_count(const PolygonalMesh& mesh, int k) {
    return mesh.n_vertices() + static_cast<long>(k - 1) * mesh.n_edges() +
           static_cast<long>(mesh.n_cells()) *
               ScaledMonomialBasis::dimension(k - 2);
}

}  // namespace svem
