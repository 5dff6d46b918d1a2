#include "svem/baseline.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "svem/errors.hpp"

namespace svem {

namespace {
using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace

EnhancedBaseline::EnhancedBaseline(const PolygonalMesh& mesh, int k, double eps,
                                   int threads)
    : mesh_(&mesh), k_(k), eps_(eps), threads_(threads) {
    // global numbering mirrors the serendipity map: vertices, edges by sorted
    // endpoints, then r_{k-2} moments per cell
    n_boundary_ = mesh.n_vertices() + (k - 1) * mesh.n_edges();
    const int nm = ScaledMonomialBasis::dimension(k - 2);
    total_ = n_boundary_ + nm * mesh.n_cells();

    const Rule1d gl = gauss_lobatto(k + 1);
    boundary_points_.resize(n_boundary_);
    for (int v = 0; v < mesh.n_vertices(); ++v)
        boundary_points_[v] = mesh.vertex(v);
    auto edge_dof = [&](int e, int slot) {
        return mesh.n_vertices() + e * (k - 1) + slot;
    };
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const Point a = mesh.vertex(mesh.edge(e).v0);
        const Point b = mesh.vertex(mesh.edge(e).v1);
        const Point mid = 0.5 * (a + b);
        const Point half = 0.5 * (b - a);
        for (int j = 1; j < k; ++j)
            boundary_points_[edge_dof(e, j - 1)] = mid + gl.nodes[j] * half;
    }

    elements_.resize(mesh.n_cells());
    parallel_for(mesh.n_cells(), threads_, [&](int c) {
        elements_[c] = build_enhanced_element_operators(
            mesh.cell_points(c), mesh.cell_geometry(c), k_, eps_);
    });

    moment_offset_.resize(mesh.n_cells());
    gather_.resize(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        moment_offset_[c] = n_boundary_ + c * nm;
        const auto verts = mesh.cell(c);
        const auto edges = mesh.cell_edges(c);
        const int m = static_cast<int>(verts.size());
        const LocalDofLayout& layout = elements_[c].layout;
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
        for (int alpha = 0; alpha < nm; ++alpha)
            g[layout.n_boundary + alpha] = moment_offset_[c] + alpha;
    }

    std::vector<int> order(mesh.n_cells());
    std::iota(order.begin(), order.end(), 0);
    mass_ = assemble_sparse(
        total_, gather_,
        [this](int c) -> const Eigen::MatrixXd& { return elements_[c].mass; },
        order);
    stiffness_ = assemble_sparse(
        total_, gather_,
        [this](int c) -> const Eigen::MatrixXd& { return elements_[c].stiffness; },
        order);
}

StateVector EnhancedBaseline::interpolate(const SpaceTimeFunction& g,
                                          double t) const {
    StateVector out;
    out.time = t;
    out.coeffs.resize(total_);
    for (int i = 0; i < n_boundary_; ++i)
        out.coeffs[i] = g(boundary_points_[i], t);
    for (int c = 0; c < mesh_->n_cells(); ++c) {
        const ElementOperators& ops = elements_[c];
        for (int alpha = 0; alpha < ops.layout.n_moments; ++alpha) {
            double acc = 0.0;
            for (std::size_t q = 0; q < ops.rule.points.size(); ++q)
                acc += ops.rule.weights[static_cast<long>(q)] *
                       g(ops.rule.points[q], t) *
                       ops.mono_at_rule(static_cast<long>(q), alpha);
            out.coeffs[moment_offset_[c] + alpha] = acc / ops.geo.area;
        }
    }
    return out;
}

Eigen::VectorXd EnhancedBaseline::gather(const Eigen::VectorXd& U, int c) const {
    const auto& g = gather_[c];
    Eigen::VectorXd chi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) chi[static_cast<long>(i)] = U[g[i]];
    return chi;
}

Eigen::VectorXd EnhancedBaseline::cell_projection(const Eigen::VectorXd& U,
                                                  int c) const {
    return elements_[c].pi_zero * gather(U, c);
}

double EnhancedBaseline::l2_error(const Eigen::VectorXd& U,
                                  const SpaceTimeFunction& u_exact,
                                  double t) const {
    double total = 0.0;
    for (int c = 0; c < mesh_->n_cells(); ++c) {
        const ElementOperators& ops = elements_[c];
        const auto& g = gather_[c];
        Eigen::VectorXd chi(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            chi[static_cast<long>(i)] = U[g[i]];
        const Eigen::VectorXd vals = ops.pi_zero_at_rule(chi);
        for (std::size_t q = 0; q < ops.rule.points.size(); ++q) {
            const double d =
                u_exact(ops.rule.points[q], t) - vals[static_cast<long>(q)];
            total += ops.rule.weights[static_cast<long>(q)] * d * d;
        }
    }
    return std::sqrt(total);
}

Eigen::VectorXd EnhancedBaseline::nonlinear_rhs(const Eigen::VectorXd& U,
                                                const ScalarFunction& f) const {
    std::vector<Eigen::VectorXd> local(mesh_->n_cells());
    parallel_for(mesh_->n_cells(), threads_, [&](int c) {
        const ElementOperators& ops = elements_[c];
        const auto& g = gather_[c];
        Eigen::VectorXd chi(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            chi[static_cast<long>(i)] = U[g[i]];
        const Eigen::VectorXd vals = ops.pi_zero_at_rule(chi);
        Eigen::VectorXd fw(vals.size());
        for (long q = 0; q < vals.size(); ++q)
            fw[q] = ops.rule.weights[q] * f(vals[q]);
        // <F_E, chi_i> = int_E f(Pi0 u) Pi0 phi_i
        local[c] = ops.pi_zero.transpose() * (ops.mono_at_rule.transpose() * fw);
    });
    Eigen::VectorXd out = Eigen::VectorXd::Zero(total_);
    for (int c = 0; c < mesh_->n_cells(); ++c) {
        const auto& g = gather_[c];
        for (std::size_t i = 0; i < g.size(); ++i)
            out[g[i]] += local[c][static_cast<long>(i)];
    }
    return out;
}

const LinearStepOperator& EnhancedBaseline::operator_for(
    double s, const SplittingConfig& config) {
    auto it = step_operators_.find(s);
    if (it == step_operators_.end()) {
        const auto t0 = Clock::now();
        SparseMatrix lhs = mass_ + 0.5 * s * stiffness_;
        auto op = std::make_unique<LinearStepOperator>(lhs, config.linear_mode,
                                                       config.linear_tol);
        timings_.setup_s += seconds_since(t0);
        it = step_operators_.emplace(s, std::move(op)).first;
    }
    return *it->second;
}

Eigen::VectorXd EnhancedBaseline::diffusion_substep(
    const Eigen::VectorXd& U, double s, const SplittingConfig& config) {
    const LinearStepOperator& op = operator_for(s, config);
    const auto t0 = Clock::now();
    const Eigen::VectorXd rhs = mass_ * U - 0.5 * s * (stiffness_ * U);
    Eigen::VectorXd out = op.solve(rhs);
    timings_.linear_s += seconds_since(t0);
    return out;
}

Eigen::VectorXd EnhancedBaseline::reaction_substep(const Eigen::VectorXd& U,
                                                   double s, double t0_time,
                                                   const ProblemSpec& problem,
                                                   double tol, int max_iter) {
    const auto clock0 = Clock::now();
    if (!mass_solver_) {
        mass_solver_ = std::make_unique<LinearStepOperator>(
            mass_, LinearSolveMode::Direct, tol);
    }
    Eigen::VectorXd source = Eigen::VectorXd::Zero(total_);
    if (problem.has_source()) {
        // <G(t), V> = (g(.,t), Pi0 v_h), averaged over the CN endpoints
        for (const double t : {t0_time, t0_time + s}) {
            for (int c = 0; c < mesh_->n_cells(); ++c) {
                const ElementOperators& ops = elements_[c];
                Eigen::VectorXd gw(ops.rule.points.size());
                for (long q = 0; q < gw.size(); ++q)
                    gw[q] = ops.rule.weights[q] *
                            problem.source(ops.rule.points[static_cast<std::size_t>(q)], t);
                const Eigen::VectorXd local =
                    ops.pi_zero.transpose() * (ops.mono_at_rule.transpose() * gw);
                const auto& g = gather_[c];
                for (std::size_t i = 0; i < g.size(); ++i)
                    source[g[i]] += 0.5 * local[static_cast<long>(i)];
            }
        }
    }

    const Eigen::VectorXd F1 = nonlinear_rhs(U, problem.f);
    const Eigen::VectorXd base = mass_ * U - 0.5 * s * F1 + s * source;
    Eigen::VectorXd X = U;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd FX = nonlinear_rhs(X, problem.f);
        const Eigen::VectorXd X_new = mass_solver_->solve(base - 0.5 * s * FX);
        const double delta = (X_new - X).lpNorm<Eigen::Infinity>();
        X = X_new;
        if (delta <= tol * (1.0 + X.lpNorm<Eigen::Infinity>())) {
            timings_.nonlinear_s += seconds_since(clock0);
            return X;
        }
    }
    throw Error(ErrorCode::SolverFailure,
                "baseline semilinear iteration did not converge in " +
                    std::to_string(max_iter) + " sweeps");
}

StateVector EnhancedBaseline::step(const StateVector& state,
                                   const ProblemSpec& problem,
                                   const SplittingConfig& config) {
    const auto t0 = Clock::now();
    const double tau = config.tau;
    StateVector out;
    out.time = state.time + tau;
    if (config.variant == SplittingVariant::DRD) {
        Eigen::VectorXd u = diffusion_substep(state.coeffs, 0.5 * tau, config);
        u = reaction_substep(u, tau, state.time, problem, config.newton_tol);
        out.coeffs = diffusion_substep(u, 0.5 * tau, config);
    } else {
        Eigen::VectorXd u =
            reaction_substep(state.coeffs, 0.5 * tau, state.time, problem,
                             config.newton_tol);
        u = diffusion_substep(u, tau, config);
        out.coeffs = reaction_substep(u, 0.5 * tau, state.time + 0.5 * tau,
                                      problem, config.newton_tol);
    }
    timings_.total_s += seconds_since(t0);
    return out;
}

StateVector EnhancedBaseline::run(const StateVector& u0,
                                  const ProblemSpec& problem,
                                  const SplittingConfig& config) {
    const double T = config.t_end - u0.time;
    const long n_steps = std::lround(T / config.tau);
    if (n_steps < 1 ||
        std::abs(n_steps * config.tau - T) > 1e-12 * std::max(1.0, T))
        throw Error(ErrorCode::InvalidArgument,
                    "t_end - t0 must be an integer multiple of tau");
    StateVector state = u0;
    for (long i = 0; i < n_steps; ++i) {
        state = step(state, problem, config);
        state.time = u0.time + (i + 1) * config.tau;
    }
    return state;
}

}  // namespace svem
