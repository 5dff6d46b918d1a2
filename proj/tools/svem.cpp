#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "svem/errors.hpp"
#include "svem/output.hpp"
#include "svem/reports.hpp"
#include "svem/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

svem::MeshSource::Family parse_family(const std::string& name) {
    using Family = svem::MeshSource::Family;
    if (name == "structured") return Family::Structured;
    if (name == "distorted") return Family::Distorted;
    if (name == "voronoi") return Family::Voronoi;
    if (name == "nonconvex") return Family::NonConvex;
    throw svem::Error(svem::ErrorCode::InvalidArgument,
                      "unknown mesh family '" + name + "'");
}

svem::Scenario scenario_from_json(const json& cfg) {
    const std::string name = cfg.at("scenario").get<std::string>();
    const int k = cfg.value("k", 2);

    svem::MeshSource mesh;
    if (cfg.contains("mesh")) {
        const json& m = cfg.at("mesh");
        if (m.contains("file")) {
            mesh.family = svem::MeshSource::Family::File;
            mesh.file = m.at("file").get<std::string>();
        } else {
            mesh.family = parse_family(m.value("family", "voronoi"));
            mesh.level = m.value("level", 1);
            mesh.amplitude = m.value("amplitude", 0.2);
            mesh.seed = m.value("seed", 42u);
        }
    }

    svem::Scenario s;
    if (name == "accuracy") {
        s = svem::scenario_accuracy(
            k,
            cfg.contains("mesh") ? mesh.family
                                 : svem::MeshSource::Family::Distorted,
            mesh.level);
        if (cfg.contains("mesh")) s.mesh = mesh;
    } else if (name == "allen_cahn") {
        s = svem::scenario_allen_cahn(k);
        if (cfg.contains("mesh")) s.mesh = mesh;
    } else {
        throw svem::Error(svem::ErrorCode::InvalidArgument,
                          "unknown scenario '" + name + "'");
    }
    s.k = k;
    if (cfg.contains("variant"))
        s.splitting.variant = cfg.at("variant").get<std::string>() == "RDR"
                                  ? svem::SplittingVariant::RDR
                                  : svem::SplittingVariant::DRD;
    if (cfg.contains("tau")) s.splitting.tau = cfg.at("tau").get<double>();
    if (cfg.contains("t_end")) s.splitting.t_end = cfg.at("t_end").get<double>();
    if (cfg.contains("threads"))
        s.splitting.threads = cfg.at("threads").get<int>();
    if (cfg.contains("linear_mode"))
        s.splitting.linear_mode =
            cfg.at("linear_mode").get<std::string>() == "iterative"
                ? svem::LinearSolveMode::Iterative
                : svem::LinearSolveMode::Direct;
    if (cfg.contains("snapshots"))
        s.snapshot_times = cfg.at("snapshots").get<std::vector<double>>();
    return s;
}

int cmd_run(const fs::path& config_path, const fs::path& fixtures,
            const fs::path& out_dir, int threads) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "cannot open config " << config_path << "\n";
        return 1;
    }
    json cfg = json::parse(in);
    svem::Scenario s = scenario_from_json(cfg);
    if (threads > 0) s.splitting.threads = threads;
    fs::create_directories(out_dir);

    const svem::PolygonalMesh mesh = svem::load_mesh(s.mesh, fixtures);
    if (s.splitting.tau <= 0.0)
        s.splitting.tau = svem::snap_tau(
            s.tau_coupling_c * std::pow(mesh.max_diameter(), 0.5 * (s.k + 1)),
            s.splitting.t_end);
    if (auto warn = svem::stability_warning(s.splitting, s.problem))
        std::cerr << "warning: " << *warn << "\n";

    svem::SerendipitySpace space(mesh, s.k, s.problem.eps, s.splitting.threads);
    svem::StrangStepper stepper(space, s.problem, s.splitting);
    const svem::StateVector u0 = space.interpolate(s.problem.u0);

    int snapshot_id = 0;
    auto observer = [&](const svem::StateVector& state) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s_t%05.2f.vtk", s.name.c_str(),
                      state.time);
        svem::export_vtk(space, state.coeffs, out_dir / buf);
        ++snapshot_id;
    };
    const svem::StateVector uT = stepper.run(u0, s.snapshot_times, observer);

    std::cout << "scenario " << s.name << " on " << s.mesh.name() << ", k=" << s.k
              << ", dofs=" << space.dofs().total() << "\n"
              << "steps=" << std::lround(s.splitting.t_end / s.splitting.tau)
              << " tau=" << s.splitting.tau << " snapshots=" << snapshot_id
              << "\n";
    if (s.problem.has_exact())
        std::cout << "l2_error(T) = "
                  << space.l2_error(uT.coeffs, s.problem.exact, uT.time) << "\n";
    std::cout << "timings: linear=" << stepper.timings().linear_s
              << "s nonlinear=" << stepper.timings().nonlinear_s
              << "s total=" << stepper.timings().total_s << "s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interpolatory serendipity VEM solver for semilinear "
                 "parabolic problems"};
    app.require_subcommand(1);

    fs::path fixtures = "fixtures";
    fs::path out_dir = "out";
    int threads = 0;
    std::uint64_t seed = 42;
    app.add_option("--fixtures", fixtures, "fixture mesh directory");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = scenario default)");
    app.add_option("--seed", seed, "seed for generated meshes");

    auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
    fs::path config_path;
    run->add_option("--config", config_path, "JSON scenario config")->required();

    auto* conv = app.add_subcommand("convergence", "EOC study");
    std::string conv_scenario = "accuracy";
    std::string conv_mesh = "distorted";
    int conv_k = 2, conv_levels = 4;
    bool time_mode = false;
    conv->add_option("--scenario", conv_scenario, "scenario name");
    conv->add_option("--mesh", conv_mesh, "distorted|voronoi|nonconvex|structured");
    conv->add_option("--k", conv_k, "polynomial degree")->required();
    conv->add_option("--levels", conv_levels, "number of refinements");
    conv->add_flag("--time-mode", time_mode, "fix the mesh, halve tau");

    auto* dofs = app.add_subcommand("dofs", "S-VEM vs enhanced DoF counts");
    int k_min = 1, k_max = 5;
    std::string dofs_mesh = "voronoi";
    dofs->add_option("--k-min", k_min);
    dofs->add_option("--k-max", k_max);
    dofs->add_option("--mesh", dofs_mesh, "mesh family");

    auto* bench = app.add_subcommand("bench", "nonlinear-substep benchmark");
    std::string bench_mode = "both";
    std::string bench_mesh = "voronoi";
    int bench_k = 2;
    double bench_t = 0.25;
    bench->add_option("--mode", bench_mode, "interp|coupled|both");
    bench->add_option("--mesh", bench_mesh, "mesh family");
    bench->add_option("--k", bench_k);
    bench->add_option("--t-end", bench_t, "benchmark horizon");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, fixtures, out_dir, threads);

        if (conv->parsed()) {
            if (conv_scenario != "accuracy") {
                std::cerr << "only the accuracy scenario has a manufactured "
                             "solution\n";
                return 1;
            }
            svem::Scenario s =
                svem::scenario_accuracy(conv_k, parse_family(conv_mesh),
                                        time_mode ? conv_levels - 1 : 0);
            if (threads > 0) s.splitting.threads = threads;
            s.mesh.seed = seed;
            if (time_mode) s.splitting.tau = 1.25e-1;
            const svem::ConvergenceReport report =
                svem::run_convergence(s, conv_levels, time_mode, fixtures);
            fs::create_directories(out_dir);
            const fs::path csv =
                out_dir / ("convergence_" + conv_mesh + "_k" +
                           std::to_string(conv_k) +
                           (time_mode ? "_time" : "") + ".csv");
            svem::export_csv(report, csv);
            std::printf("%-6s %-12s %-12s %-8s %-14s %-8s\n", "level", "h",
                        "tau", "dofs", "l2_error", "eoc");
            for (const auto& row : report.rows)
                std::printf("%-6d %-12.4e %-12.4e %-8ld %-14.6e %-8.3f\n",
                            row.level, row.h, row.tau, row.dofs, row.l2_error,
                            row.eoc);
            std::printf("least-squares EOC: %.3f (tau = %.2f h^%.1f)\n",
                        report.lsq_eoc(), report.tau_coupling_c,
                        0.5 * (conv_k + 1));
            std::cout << "wrote " << csv << "\n";
            return 0;
        }

        if (dofs->parsed()) {
            std::vector<svem::MeshSource> meshes;
            const auto family = parse_family(dofs_mesh);
            for (int level = 0; level < svem::ladder_size(family); ++level)
                meshes.push_back(svem::ladder_level(family, level, seed));
            const auto rows = svem::dof_report(meshes, k_min, k_max, fixtures);
            std::printf("%-18s %-4s %-10s %-10s %-8s %s\n", "mesh", "k",
                        "svem", "enhanced", "ratio", "needs-moments");
            for (const auto& r : rows)
                std::printf("%-18s %-4d %-10ld %-10ld %-8.3f %s\n",
                            r.mesh.c_str(), r.k, r.svem, r.enhanced, r.ratio,
                            r.deficient ? "yes" : "no");
            fs::create_directories(out_dir);
            svem::export_dof_csv(rows, out_dir / "dof_report.csv");
            return 0;
        }

        if (bench->parsed()) {
            svem::Scenario s = svem::scenario_allen_cahn(bench_k);
            s.mesh = svem::ladder_level(parse_family(bench_mesh),
                                        svem::ladder_size(parse_family(bench_mesh)) - 1,
                                        seed);
            if (threads > 0) s.splitting.threads = threads;
            const svem::BenchmarkResult r =
                svem::benchmark(s, bench_t, fixtures, 3);
            auto print = [](const char* name, const svem::PhaseTimings& t) {
                std::printf("%-14s linear=%.3fs nonlinear=%.3fs total=%.3fs\n",
                            name, t.linear_s, t.nonlinear_s, t.total_s);
            };
            if (bench_mode != "coupled") print("interpolatory", r.interpolatory);
            if (bench_mode != "interp") print("coupled", r.coupled);
            if (bench_mode == "both") {
                std::printf("nonlinear-substep ratio: %.1f\n",
                            r.coupled.nonlinear_s / r.interpolatory.nonlinear_s);
                std::printf("final-state discrepancy: %.3e (svem dofs %ld, "
                            "coupled dofs %ld, %ld steps)\n",
                            r.final_discrepancy, r.svem_dofs, r.coupled_dofs,
                            r.steps);
            }
            return 0;
        }
    } catch (const svem::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
