#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "svem/mesh.hpp"
#include "svem/problem.hpp"
#include "svem/timestep.hpp"

namespace svem {

/// Where a scenario's mesh comes from: a generator family with a refinement
/// level, or an explicit file.
struct MeshSource {
    enum class Family { Structured, Distorted, Voronoi, NonConvex, File };

    Family family = Family::Distorted;
    int level = 0;  // index into the family's refinement ladder
    std::filesystem::path file;
    double amplitude = 0.2;
    std::uint64_t seed = 42;

    std::string name() const;
};

/// Refinement ladders at desk scale: distorted/structured n in {4,8,16,32};
/// Voronoi fixtures with {64,256,1024,4096} cells; non-convex fixtures with
/// {32,128,512,2048} cells.
int ladder_size(MeshSource::Family family);
MeshSource ladder_level(MeshSource::Family family, int level,
                        std::uint64_t seed = 42);

PolygonalMesh load_mesh(const MeshSource& source,
                        const std::filesystem::path& fixture_dir);

struct Scenario {
    std::string name;
    MeshSource mesh;
    ProblemSpec problem;
    int k = 1;
    SplittingConfig splitting;
    std::vector<double> snapshot_times;
    double tau_coupling_c = 0.5;  // tau = c h^{(k+1)/2} when tau is derived
};

/// Manufactured accuracy test: f(u) = 1/(1+u^2), exact
/// u = e^{-t} cos(pi x) cos(pi y) on [0,1]^2, T = 1, source
/// g = (2 pi^2 - 1) u + 1/(1+u^2).
Scenario scenario_accuracy(int k, MeshSource::Family family, int level);

/// Allen-Cahn: f(u) = u^3 - u, eps = 0.01, u0 = cos(2 pi x^2) cos(2 pi y^2),
/// T = 22.5, tau = 5e-3, RDR splitting; snapshots at t in {0.1, 5, 10, 22.5}.
Scenario scenario_allen_cahn(int k = 2, int voronoi_level = 1);

/// Round tau so that (t_end - t0)/tau is an integer >= 1, never increasing it.
double snap_tau(double tau, double t_span);

}  // namespace svem
