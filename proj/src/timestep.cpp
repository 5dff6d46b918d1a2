#include "svem/timestep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>

#include "svem/errors.hpp"

namespace svem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::optional<std::string> stability_warning(const SplittingConfig& config,
                                             const ProblemSpec& problem) {
    if (config.tau <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "tau must be positive");
    if (problem.lipschitz > 0.0 && config.tau >= 2.0 / problem.lipschitz)
        return "tau = " + std::to_string(config.tau) +
               " >= 2/L_f = " + std::to_string(2.0 / problem.lipschitz) +
               ": the nonlinear substep contraction bound does not apply";
    return std::nullopt;
}

ScalarSolveResult reaction_scalar_solve(double u1, double s,
                                        const ScalarFunction& f,
                                        const ScalarFunction& f_prime,
                                        double g0, double g1, double tol,
                                        int max_iter) {
    const double source = 0.5 * s * (g0 + g1);
    const double a = u1 - 0.5 * s * f(u1) + source;  // r(x) = x - a + s/2 f(x)
    auto residual = [&](double x) { return x - a + 0.5 * s * f(x); };
    const double scale = tol * (1.0 + std::abs(u1));

    ScalarSolveResult res;
    double x = u1;
    double lo = 0.0, hi = 0.0;
    bool has_lo = false, has_hi = false;
    for (int it = 1; it <= max_iter; ++it) {
        const double r = residual(x);
        res.iterations = it;
        res.residual = r;
        if (std::abs(r) <= scale) {
            res.value = x;
            res.converged = true;
            return res;
        }
        if (r < 0.0 && (!has_lo || x > lo)) { lo = x; has_lo = true; }
        if (r > 0.0 && (!has_hi || x < hi)) { hi = x; has_hi = true; }

        const double denom = 1.0 + 0.5 * s * f_prime(x);
        double next = x - r / denom;
        const bool newton_ok = std::isfinite(next) && std::abs(denom) > 1e-14;
        if (has_lo && has_hi) {
            if (!newton_ok || next <= std::min(lo, hi) || next >= std::max(lo, hi))
                next = 0.5 * (lo + hi);  // bisection safeguard
        } else if (!newton_ok) {
            next = x + (r > 0 ? -1.0 : 1.0) * (1.0 + std::abs(x));
        }
        x = next;
    }

    // damped fixed-point fallback
    for (int it = 0; it < 4 * max_iter; ++it) {
        const double r = residual(x);
        res.residual = r;
        if (std::abs(r) <= scale) {
            res.value = x;
            res.converged = true;
            res.iterations = max_iter + it;
            return res;
        }
        x -= 0.5 * r;
    }
    res.value = x;
    res.converged = false;
    return res;
}

StrangStepper::StrangStepper(const SerendipitySpace& space,
                             const ProblemSpec& problem,
                             const SplittingConfig& config)
    : space_(&space), problem_(&problem), config_(config) {
    // Pi0 moment-DoF columns evaluated at the cell rule, for the stage-2
    // Jacobians
    moment_columns_.resize(space.mesh().n_cells());
    for (int c = 0; c < space.mesh().n_cells(); ++c) {
        const ElementOperators& ops = space.element(c);
        if (ops.layout.n_moments == 0) continue;
        moment_columns_[c] =
            ops.mono_at_rule *
            ops.pi_zero.rightCols(ops.layout.n_moments);
    }
}

const LinearStepOperator& StrangStepper::operator_for(double s) {
    auto it = step_operators_.find(s);
    if (it == step_operators_.end()) {
        const auto t0 = Clock::now();
        SparseMatrix lhs = space_->mass() + 0.5 * s * space_->stiffness();
        auto op = std::make_unique<LinearStepOperator>(
            lhs, config_.linear_mode, config_.linear_tol);
        timings_.setup_s += seconds_since(t0);
        it = step_operators_.emplace(s, std::move(op)).first;
    }
    return *it->second;
}

Eigen::VectorXd StrangStepper::diffusion_substep(const Eigen::VectorXd& U,
                                                 double s) {
    const LinearStepOperator& op = operator_for(s);
    const auto t0 = Clock::now();
    const Eigen::VectorXd rhs =
        space_->mass() * U - 0.5 * s * (space_->stiffness() * U);
    Eigen::VectorXd out = op.solve(rhs);
    timings_.linear_s += seconds_since(t0);
    return out;
}

Eigen::VectorXd StrangStepper::reaction_substep(const Eigen::VectorXd& U,
                                                double s, double t0_time) {
    const auto clock0 = Clock::now();
    const double t1_time = t0_time + s;
    Eigen::VectorXd out(U.size());
    const DofMap& dofs = space_->dofs();
    const auto& points = dofs.boundary_dof_points();
    const bool with_source = problem_->has_source();

    // stage 1: decoupled scalar Crank-Nicolson solves on boundary DoFs
    std::atomic<int> failed{-1};
    parallel_for(dofs.n_boundary(), config_.threads, [&](int i) {
        const double g0 = with_source ? problem_->source(points[i], t0_time) : 0.0;
        const double g1 = with_source ? problem_->source(points[i], t1_time) : 0.0;
        const ScalarSolveResult r = reaction_scalar_solve(
            U[i], s, problem_->f, problem_->f_prime, g0, g1, config_.newton_tol,
            config_.newton_max_iter);
        if (!r.converged) {
            int expected = -1;
            failed.compare_exchange_strong(expected, i);
        }
        out[i] = r.value;
    });
    if (failed >= 0)
        throw Error(ErrorCode::SolverFailure,
                    "reaction Newton failed at boundary DoF " +
                        std::to_string(failed.load()));

    // stage 2: cell-local moment systems on deficient cells, boundary values
    // held at their stage-1 results
    parallel_for(space_->mesh().n_cells(), config_.threads, [&](int c) {
        const ElementOperators& ops = space_->element(c);
        const int nm = ops.layout.n_moments;
        if (nm == 0) return;
        const int off = dofs.moment_offset(c);
        const double area = ops.geo.area;
        const long nq = static_cast<long>(ops.rule.points.size());

        // moments of f(Pi0 u) for the input state
        const Eigen::VectorXd vals1 = ops.pi_zero_at_rule(space_->gather(U, c));
        Eigen::VectorXd f1(nq);
        for (long q = 0; q < nq; ++q) f1[q] = problem_->f(vals1[q]);
        Eigen::VectorXd F1(nm);
        for (int alpha = 0; alpha < nm; ++alpha)
            F1[alpha] = (ops.rule.weights.cwiseProduct(f1).cwiseProduct(
                             ops.mono_at_rule.col(alpha)))
                            .sum() /
                        area;

        Eigen::VectorXd src = Eigen::VectorXd::Zero(nm);
        if (with_source) {
            Eigen::VectorXd gq(nq);
            for (long q = 0; q < nq; ++q)
                gq[q] = problem_->source(ops.rule.points[q], t0_time) +
                        problem_->source(ops.rule.points[q], t1_time);
            for (int alpha = 0; alpha < nm; ++alpha)
                src[alpha] = 0.5 * s *
                             (ops.rule.weights.cwiseProduct(gq).cwiseProduct(
                                  ops.mono_at_rule.col(alpha)))
                                 .sum() /
                             area;
        }

        // local DoFs with stage-1 boundary values, moment entries unknown
        Eigen::VectorXd chi2 = Eigen::VectorXd::Zero(ops.layout.total);
        const auto& g = dofs.cell_dofs(c);
        for (int i = 0; i < ops.layout.n_boundary; ++i) chi2[i] = out[g[i]];
        Eigen::VectorXd m = space_->gather(U, c).tail(nm);  // start from input
        const Eigen::VectorXd m1 = m;
        const Eigen::MatrixXd& Q = moment_columns_[c];  // nq x nm

        bool converged = false;
        for (int it = 0; it < config_.newton_max_iter; ++it) {
            chi2.tail(nm) = m;
            const Eigen::VectorXd vals2 = ops.pi_zero_at_rule(chi2);
            Eigen::VectorXd f2(nq), fp2(nq);
            for (long q = 0; q < nq; ++q) {
                f2[q] = problem_->f(vals2[q]);
                fp2[q] = problem_->f_prime(vals2[q]);
            }
            Eigen::VectorXd F2(nm);
            for (int alpha = 0; alpha < nm; ++alpha)
                F2[alpha] = (ops.rule.weights.cwiseProduct(f2).cwiseProduct(
                                 ops.mono_at_rule.col(alpha)))
                                .sum() /
                            area;
            const Eigen::VectorXd resid = m - m1 + 0.5 * s * (F1 + F2) - src;
            if (resid.lpNorm<Eigen::Infinity>() <=
                config_.newton_tol * (1.0 + m1.lpNorm<Eigen::Infinity>())) {
                converged = true;
                break;
            }
            // chain-rule Jacobian: J = I + s/2 * (1/|E|) int f'(Pi0 u) m_a q_b
            Eigen::MatrixXd J = Eigen::MatrixXd::Identity(nm, nm);
            const Eigen::VectorXd wfp = ops.rule.weights.cwiseProduct(fp2);
            for (int alpha = 0; alpha < nm; ++alpha)
                for (int beta = 0; beta < nm; ++beta)
                    J(alpha, beta) += 0.5 * s / area *
                                      (wfp.cwiseProduct(ops.mono_at_rule.col(alpha))
                                           .cwiseProduct(Q.col(beta)))
                                          .sum();
            m -= J.partialPivLu().solve(resid);
        }
        if (!converged) {
            int expected = -1;
            failed.compare_exchange_strong(expected, c);
            return;
        }
        for (int alpha = 0; alpha < nm; ++alpha) out[off + alpha] = m[alpha];
    });
    if (failed >= 0)
        throw Error(ErrorCode::SolverFailure,
                    "stage-2 moment Newton failed on cell " +
                        std::to_string(failed.load()));

    timings_.nonlinear_s += seconds_since(clock0);
    return out;
}

StateVector StrangStepper::step(const StateVector& state) {
    const auto t0 = Clock::now();
    const double tau = config_.tau;
    StateVector out;
    out.time = state.time + tau;
    if (config_.variant == SplittingVariant::DRD) {
        Eigen::VectorXd u = diffusion_substep(state.coeffs, 0.5 * tau);
        u = reaction_substep(u, tau, state.time);
        out.coeffs = diffusion_substep(u, 0.5 * tau);
    } else {
        Eigen::VectorXd u = reaction_substep(state.coeffs, 0.5 * tau, state.time);
        u = diffusion_substep(u, tau);
        out.coeffs = reaction_substep(u, 0.5 * tau, state.time + 0.5 * tau);
    }
    timings_.total_s += seconds_since(t0);
    return out;
}

StateVector StrangStepper::run(
    const StateVector& u0, std::span<const double> snapshot_times,
    const std::function<void(const StateVector&)>& observer) {
    const double tau = config_.tau;
    const double T = config_.t_end - u0.time;
    const double steps_exact = T / tau;
    const long n_steps = std::lround(steps_exact);
    if (n_steps < 1 || std::abs(n_steps * tau - T) > 1e-12 * std::max(1.0, T))
        throw Error(ErrorCode::InvalidArgument,
                    "t_end - t0 must be an integer multiple of tau");

    auto matches = [&](double time) {
        for (double t : snapshot_times)
            if (std::abs(t - time) <= 1e-12 * std::max(1.0, std::abs(t)))
                return true;
        return false;
    };

    StateVector state = u0;
    if (observer && matches(state.time)) observer(state);
    for (long i = 0; i < n_steps; ++i) {
        try {
            state = step(state);
        } catch (const Error& e) {
            throw Error(e.code(), "step " + std::to_string(i + 1) + " (t=" +
                                      std::to_string(state.time) + "): " +
                                      e.what());
        }
        state.time = u0.time + (i + 1) * tau;  // avoid accumulation drift
        if (observer && matches(state.time)) observer(state);
    }
    return state;
}

}  // namespace svem
