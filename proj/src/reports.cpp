#include "svem/reports.hpp"

#include <cmath>
#include <iostream>

#include "svem/errors.hpp"

namespace svem {

double eoc(double e_coarse, double e_fine, double h_coarse, double h_fine) {
    return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw Error(ErrorCode::InvalidArgument, "lsq_slope needs >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double ConvergenceReport::lsq_eoc() const {
    std::vector<double> x, y;
    for (const ConvergenceRow& row : rows) {
        if (!std::isfinite(row.l2_error) || row.l2_error <= 0.0) continue;
        x.push_back(time_mode ? row.tau : row.h);
        y.push_back(row.l2_error);
    }
    return lsq_slope(x, y);
}

ConvergenceReport run_convergence(const Scenario& scenario, int levels,
                                  bool time_mode,
                                  const std::filesystem::path& fixture_dir) {
    ConvergenceReport report;
    report.scenario = scenario.name;
    report.mesh_family = scenario.mesh.name();
    report.k = scenario.k;
    report.time_mode = time_mode;
    report.tau_coupling_c = scenario.tau_coupling_c;
    if (levels < (time_mode ? 2 : 3))
        throw Error(ErrorCode::InvalidArgument,
                    "convergence study needs >= 3 refinements (2 in time mode)");

    for (int level = 0; level < levels; ++level) {
        ConvergenceRow row;
        row.level = level;
        try {
            MeshSource src = scenario.mesh;
            if (!time_mode)
                src = ladder_level(scenario.mesh.family, level, scenario.mesh.seed);
            const PolygonalMesh mesh = load_mesh(src, fixture_dir);
            row.h = mesh.max_diameter();

            SplittingConfig config = scenario.splitting;
            const double span = config.t_end;
            if (time_mode) {
                config.tau = scenario.splitting.tau / std::pow(2.0, level);
            } else {
                const double raw =
                    scenario.tau_coupling_c *
                    std::pow(row.h, 0.5 * (scenario.k + 1));
                config.tau = snap_tau(raw, span);
            }
            row.tau = config.tau;

            SerendipitySpace space(mesh, scenario.k, scenario.problem.eps,
                                   config.threads);
            row.dofs = space.dofs().total();
            StrangStepper stepper(space, scenario.problem, config);
            const StateVector u0 = space.interpolate(scenario.problem.u0);
            const StateVector uT = stepper.run(u0, {});
            if (!scenario.problem.has_exact())
                throw Error(ErrorCode::InvalidArgument,
                            "convergence study needs a manufactured solution");
            row.l2_error =
                space.l2_error(uT.coeffs, scenario.problem.exact, uT.time);
            row.t_linear_s = stepper.timings().linear_s;
            row.t_nonlinear_s = stepper.timings().nonlinear_s;
            row.t_total_s = stepper.timings().total_s;
        } catch (const Error& e) {
            std::cerr << "[convergence] level " << level << " failed: "
                      << e.what() << "\n";
            row.l2_error = std::numeric_limits<double>::quiet_NaN();
        }
        if (!report.rows.empty()) {
            const ConvergenceRow& prev = report.rows.back();
            const double x_prev = time_mode ? prev.tau : prev.h;
            const double x_cur = time_mode ? row.tau : row.h;
            if (std::isfinite(prev.l2_error) && std::isfinite(row.l2_error))
                row.eoc = eoc(prev.l2_error, row.l2_error, x_prev, x_cur);
        }
        report.rows.push_back(row);
    }
    return report;
}

std::vector<DofReportRow> dof_report(const std::vector<MeshSource>& meshes,
                                     int k_min, int k_max,
                                     const std::filesystem::path& fixture_dir) {
    if (k_min < 1 || k_max < k_min)
        throw Error(ErrorCode::InvalidArgument, "bad k range");
    std::vector<DofReportRow> rows;
    for (const MeshSource& src : meshes) {
        const PolygonalMesh mesh = load_mesh(src, fixture_dir);
        for (int k = k_min; k <= k_max; ++k) {
            DofReportRow row;
            row.mesh = src.name();
            row.k = k;
            row.svem = svem_dof_count(mesh, k);
            row.enhanced = enhanced_dof_count(mesh, k);
            row.ratio = static_cast<double>(row.svem) /
                        static_cast<double>(row.enhanced);
            for (int c = 0; c < mesh.n_cells() && !row.deficient; ++c)
                row.deficient = k >= mesh.cell_geometry(c).eta;
            rows.push_back(row);
        }
    }
    return rows;
}

double cross_mode_discrepancy(const SerendipitySpace& space,
                              const Eigen::VectorXd& U_svem,
                              const EnhancedBaseline& baseline,
                              const Eigen::VectorXd& U_enh) {
    // both builds use the same cell rule, so the Pi0 fields are compared
    // pointwise at shared quadrature points
    double total = 0.0;
    const PolygonalMesh& mesh = space.mesh();
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const ElementOperators& ops = space.element(c);
        const Eigen::VectorXd vals_svem =
            ops.pi_zero_at_rule(space.gather(U_svem, c));
        const Eigen::VectorXd vals_enh =
            baseline.element(c).pi_zero_at_rule(baseline.gather(U_enh, c));
        const Eigen::VectorXd d = vals_svem - vals_enh;
        total += ops.rule.weights.cwiseProduct(d.cwiseProduct(d)).sum();
    }
    return std::sqrt(total);
}

BenchmarkResult benchmark(const Scenario& scenario, double t_end,
                          const std::filesystem::path& fixture_dir,
                          int repeats) {
    BenchmarkResult out;
    out.repeats = repeats;
    const PolygonalMesh mesh = load_mesh(scenario.mesh, fixture_dir);
    SplittingConfig config = scenario.splitting;
    config.t_end = t_end;
    config.tau = snap_tau(config.tau, t_end);
    out.steps = std::lround(t_end / config.tau);

    SerendipitySpace space(mesh, scenario.k, scenario.problem.eps,
                           config.threads);
    EnhancedBaseline baseline(mesh, scenario.k, scenario.problem.eps,
                              config.threads);
    out.svem_dofs = space.dofs().total();
    out.coupled_dofs = baseline.total_dofs();

    const StateVector u0_svem = space.interpolate(scenario.problem.u0);
    const StateVector u0_enh = baseline.interpolate(
        [&](Point p, double) { return scenario.problem.u0(p); }, 0.0);

    StateVector final_svem, final_enh;
    auto better = [](PhaseTimings& best, const PhaseTimings& cur) {
        if (best.total_s == 0.0 || cur.total_s < best.total_s) best = cur;
    };
    for (int rep = 0; rep < repeats; ++rep) {
        StrangStepper stepper(space, scenario.problem, config);
        final_svem = stepper.run(u0_svem, {});
        better(out.interpolatory, stepper.timings());
    }
    for (int rep = 0; rep < repeats; ++rep) {
        EnhancedBaseline fresh(mesh, scenario.k, scenario.problem.eps,
                               config.threads);
        final_enh = fresh.run(u0_enh, scenario.problem, config);
        better(out.coupled, fresh.timings());
    }
    out.final_discrepancy = cross_mode_discrepancy(space, final_svem.coeffs,
                                                   baseline, final_enh.coeffs);
    return out;
}

}  // namespace svem
