#include "svem/assembly.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "svem/errors.hpp"

namespace svem {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n < 2 * threads) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (int i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

SparseMatrix assemble_sparse(int total,
                             const std::vector<std::vector<int>>& gather,
                             const std::function<const Eigen::MatrixXd&(int)>& local,
                             const std::vector<int>& cell_order) {
    std::vector<Eigen::Triplet<double>> triplets;
    std::size_t nnz = 0;
    for (const auto& g : gather) nnz += g.size() * g.size();
    triplets.reserve(nnz);
    for (int c : cell_order) {
        const auto& g = gather[c];
        const Eigen::MatrixXd& m = local(c);
        if (m.rows() != static_cast<long>(g.size()))
            throw Error(ErrorCode::InvalidArgument,
                        "local matrix size does not match gather list");
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = 0; j < g.size(); ++j)
                triplets.emplace_back(g[i], g[j],
                                      m(static_cast<long>(i), static_cast<long>(j)));
    }
    SparseMatrix out(total, total);
    out.setFromTriplets(triplets.begin(), triplets.end());
    out.makeCompressed();
    return out;
}

SerendipitySpace::SerendipitySpace(const PolygonalMesh& mesh, int k, double eps,
                                   int threads)
    : mesh_(&mesh), k_(k), eps_(eps), threads_(threads) {
    dofs_ = std::make_unique<DofMap>(mesh, k);
    elements_.resize(mesh.n_cells());
    std::vector<std::string> errors(mesh.n_cells());
    parallel_for(mesh.n_cells(), threads_, [&](int c) {
        try {
            const auto pts = mesh.cell_points(c);
            elements_[c] =
                build_element_operators(pts, mesh.cell_geometry(c), k_, eps_);
        } catch (const Error& e) {
            errors[c] = e.what();
        }
    });
    for (int c = 0; c < mesh.n_cells(); ++c)
        if (!errors[c].empty())
            throw Error(ErrorCode::UnsupportedConfiguration,
                        "cell " + std::to_string(c) + ": " + errors[c]);

    std::vector<std::vector<int>> gather(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) gather[c] = dofs_->cell_dofs(c);
    std::vector<int> order(mesh.n_cells());
    std::iota(order.begin(), order.end(), 0);
    mass_ = assemble_sparse(
        dofs_->total(), gather,
        [this](int c) -> const Eigen::MatrixXd& { return elements_[c].mass; },
        order);
    stiffness_ = assemble_sparse(
        dofs_->total(), gather,
        [this](int c) -> const Eigen::MatrixXd& { return elements_[c].stiffness; },
        order);
}

StateVector SerendipitySpace::interpolate(const SpaceTimeFunction& g,
                                          double t) const {
    StateVector out;
    out.time = t;
    out.coeffs.resize(dofs_->total());
    const auto& pts = dofs_->boundary_dof_points();
    for (int i = 0; i < dofs_->n_boundary(); ++i)
        out.coeffs[i] = g(pts[i], t);
    for (int c = 0; c < mesh_->n_cells(); ++c) {
        const ElementOperators& ops = elements_[c];
        if (ops.layout.n_moments == 0) continue;
        const int off = dofs_->moment_offset(c);
        Eigen::VectorXd gq(ops.rule.points.size());
        for (std::size_t q = 0; q < ops.rule.points.size(); ++q)
            gq[static_cast<long>(q)] = g(ops.rule.points[q], t);
        for (int alpha = 0; alpha < ops.layout.n_moments; ++alpha)
            out.coeffs[off + alpha] = (ops.rule.weights.cwiseProduct(gq)
                                           .cwiseProduct(ops.mono_at_rule.col(alpha)))
                                          .sum() /
                                      ops.geo.area;
    }
    return out;
}

StateVector SerendipitySpace::interpolate(const SpatialFunction& g) const {
    return interpolate([&g](Point p, double) { return g(p); }, 0.0);
}

Eigen::VectorXd SerendipitySpace::gather(const Eigen::VectorXd& U, int c) const {
    const auto& g = dofs_->cell_dofs(c);
    Eigen::VectorXd chi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) chi[static_cast<long>(i)] = U[g[i]];
    return chi;
}

Eigen::VectorXd SerendipitySpace::cell_projection(const Eigen::VectorXd& U,
                                                  int c) const {
    return elements_[c].pi_zero * gather(U, c);
}

Eigen::VectorXd SerendipitySpace::nonlinear_dof_vector(
    const Eigen::VectorXd& U, const ScalarFunction& f) const {
    if (U.size() != dofs_->total())
        throw Error(ErrorCode::InvalidArgument, "state size mismatch");
    Eigen::VectorXd out(U.size());
    const int nb = dofs_->n_boundary();
    std::atomic<int> bad_dof{-1};  // first offending DoF, reported after join
    parallel_for(nb, threads_, [&](int i) {
        const double v = f(U[i]);
        if (!std::isfinite(v)) {
            int expected = -1;
            bad_dof.compare_exchange_strong(expected, i);
        }
        out[i] = v;
    });
    if (bad_dof >= 0)
        throw Error(ErrorCode::NonFiniteValue,
                    "f returned a non-finite value at DoF " +
                        std::to_string(bad_dof.load()));
    parallel_for(mesh_->n_cells(), threads_, [&](int c) {
        const ElementOperators& ops = elements_[c];
        if (ops.layout.n_moments == 0) return;
        const int off = dofs_->moment_offset(c);
        const Eigen::VectorXd vals = ops.pi_zero_at_rule(gather(U, c));
        Eigen::VectorXd fv(vals.size());
        for (long q = 0; q < vals.size(); ++q) {
            fv[q] = f(vals[q]);
            if (!std::isfinite(fv[q])) {
                int expected = -1;
                bad_dof.compare_exchange_strong(expected, off);
            }
        }
        for (int alpha = 0; alpha < ops.layout.n_moments; ++alpha)
            out[off + alpha] = (ops.rule.weights.cwiseProduct(fv).cwiseProduct(
                                    ops.mono_at_rule.col(alpha)))
                                   .sum() /
                               ops.geo.area;
    });
    if (bad_dof >= 0)
        throw Error(ErrorCode::NonFiniteValue,
                    "f returned a non-finite value at moment DoF " +
                        std::to_string(bad_dof.load()));
    return out;
}

double SerendipitySpace::l2_error(const Eigen::VectorXd& U,
                                  const SpaceTimeFunction& u_exact,
                                  double t) const {
    std::vector<double> cell_err(mesh_->n_cells(), 0.0);
    parallel_for(mesh_->n_cells(), threads_, [&](int c) {
        const ElementOperators& ops = elements_[c];
        const Eigen::VectorXd vals = ops.pi_zero_at_rule(gather(U, c));
        double acc = 0.0;
        for (std::size_t q = 0; q < ops.rule.points.size(); ++q) {
            const double d =
                u_exact(ops.rule.points[q], t) - vals[static_cast<long>(q)];
            acc += ops.rule.weights[static_cast<long>(q)] * d * d;
        }
        cell_err[c] = acc;
    });
    double total = 0.0;
    for (double e : cell_err) total += e;
    return std::sqrt(total);
}

}  // namespace svem
