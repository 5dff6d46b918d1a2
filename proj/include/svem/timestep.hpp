#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "svem/linear_solver.hpp"
#include "svem/problem.hpp"

namespace svem {

enum class SplittingVariant { DRD, RDR };

struct SplittingConfig {
    SplittingVariant variant = SplittingVariant::DRD;
    double tau = 1e-2;
    double t_end = 1.0;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    LinearSolveMode linear_mode = LinearSolveMode::Direct;
    double linear_tol = 1e-10;
    int threads = 1;
};

/// tau >= 2/L_f voids the contraction argument behind the nonlinear substep;
/// worth a warning but not an error (the bound is sufficient, not necessary).
std::optional<std::string> stability_warning(const SplittingConfig& config,
                                             const ProblemSpec& problem);

struct PhaseTimings {
    double setup_s = 0.0;      // factorizations
    double linear_s = 0.0;     // diffusion substeps
    double nonlinear_s = 0.0;  // reaction substeps
    double total_s = 0.0;
};

struct ScalarSolveResult {
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Crank-Nicolson solve of the scalar reaction ODE u' = -f(u) + g over a
/// substep of length s: u2 = u1 - s/2 (f(u1)+f(u2)) + s/2 (g0+g1).
/// Newton with update delta = r / (1 + s/2 f'(u)), safeguarded by a bracket;
/// falls back to a damped fixed-point sweep before giving up.
ScalarSolveResult reaction_scalar_solve(double u1, double s,
                                        const ScalarFunction& f,
                                        const ScalarFunction& f_prime,
                                        double g0 = 0.0, double g1 = 0.0,
                                        double tol = 1e-10, int max_iter = 50);

/// Symmetric Strang splitting (DRD or RDR) with Crank-Nicolson substeps.
/// Diffusion solves reuse one cached factorization per substep length; the
/// reaction substep is entry-wise on boundary DoFs (stage 1) followed by
/// cell-local moment Newton systems on deficient cells (stage 2).
class StrangStepper {
  public:
    StrangStepper(const SerendipitySpace& space, const ProblemSpec& problem,
                  const SplittingConfig& config);

    StateVector step(const StateVector& state);

    /// March from u0 to t_end = n*tau (validated to 1e-12), invoking the
    /// observer at every snapshot time (and at t=0 if listed).
    StateVector run(const StateVector& u0, std::span<const double> snapshot_times,
                    const std::function<void(const StateVector&)>& observer = {});

    Eigen::VectorXd diffusion_substep(const Eigen::VectorXd& U, double s);
    Eigen::VectorXd reaction_substep(const Eigen::VectorXd& U, double s,
                                     double t0);

    const PhaseTimings& timings() const { return timings_; }
    const SplittingConfig& config() const { return config_; }

  private:
    const LinearStepOperator& operator_for(double s);

    const SerendipitySpace* space_;
    const ProblemSpec* problem_;
    SplittingConfig config_;
    std::map<double, std::unique_ptr<LinearStepOperator>> step_operators_;
    std::vector<Eigen::MatrixXd> moment_columns_;  // per cell: Pi0 moment cols at rule
    PhaseTimings timings_;
};

}  // namespace svem
