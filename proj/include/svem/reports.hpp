#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "svem/baseline.hpp"
#include "svem/scenario.hpp"

namespace svem {

struct ConvergenceRow {
    int level = 0;
    double h = 0.0;
    double tau = 0.0;
    long dofs = 0;
    double l2_error = 0.0;
    double eoc = std::numeric_limits<double>::quiet_NaN();
    double t_linear_s = 0.0;
    double t_nonlinear_s = 0.0;
    double t_total_s = 0.0;
};

struct ConvergenceReport {
    std::string scenario;
    std::string mesh_family;
    int k = 1;
    bool time_mode = false;
    double tau_coupling_c = 0.5;
    std::vector<ConvergenceRow> rows;

    /// Least-squares slope of log(error) against log(h) (space mode) or
    /// log(tau) (time mode).
    double lsq_eoc() const;
};

/// log(e0/e1) / log(h0/h1)
double eoc(double e_coarse, double e_fine, double h_coarse, double h_fine);
double lsq_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Space mode: runs `levels` refinements of the scenario's family with
/// tau = c h^{(k+1)/2}. Time mode: fixes the scenario's mesh and halves tau
/// starting from scenario.splitting.tau, for `levels` runs. Per-row solver
/// failures are recorded (error = NaN), not fatal.
ConvergenceReport run_convergence(const Scenario& scenario, int levels,
                                  bool time_mode,
                                  const std::filesystem::path& fixture_dir);

struct DofReportRow {
    std::string mesh;
    int k = 0;
    long svem = 0;
    long enhanced = 0;
    double ratio = 0.0;  // svem / enhanced
    bool deficient = false;  // some cell needs the extended (moment) version
};

std::vector<DofReportRow> dof_report(const std::vector<MeshSource>& meshes,
                                     int k_min, int k_max,
                                     const std::filesystem::path& fixture_dir);

enum class BenchMode { Interpolatory, CoupledBaseline };

struct BenchmarkResult {
    PhaseTimings interpolatory;
    PhaseTimings coupled;
    double final_discrepancy = 0.0;  // L2 distance between the mode solutions
    long svem_dofs = 0;
    long coupled_dofs = 0;
    long steps = 0;
    int repeats = 0;
};

/// Runs the scenario under both nonlinear treatments with identical initial
/// data and tau, best-of-`repeats` phase times, single-threaded unless the
/// scenario says otherwise.
BenchmarkResult benchmark(const Scenario& scenario, double t_end,
                          const std::filesystem::path& fixture_dir,
                          int repeats = 3);

/// L2 distance between the piecewise projections of a serendipity state and
/// a baseline state on the same mesh.
double cross_mode_discrepancy(const SerendipitySpace& space,
                              const Eigen::VectorXd& U_svem,
                              const EnhancedBaseline& baseline,
                              const Eigen::VectorXd& U_enh);

}  // namespace svem
