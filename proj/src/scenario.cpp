#include "svem/scenario.hpp"

#include <cmath>

#include "svem/errors.hpp"

namespace svem {

namespace {

const int kQuadLadder[] = {4, 8, 16, 32};
const int kVoronoiLadder[] = {64, 256, 1024, 4096};
const int kNonConvexLadder[] = {32, 128, 512, 2048};

std::string zero_pad(int v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d", v);
    return buf;
}

}  // namespace

std::string MeshSource::name() const {
    switch (family) {
        case Family::Structured:
            return "structured_n" + std::to_string(kQuadLadder[level]);
        case Family::Distorted:
            return "distorted_n" + std::to_string(kQuadLadder[level]);
        case Family::Voronoi:
            return "voronoi_" + zero_pad(kVoronoiLadder[level]);
        case Family::NonConvex:
            return "nonconvex_" + zero_pad(kNonConvexLadder[level]);
        case Family::File:
            return file.stem().string();
    }
    return "mesh";
}

int ladder_size(MeshSource::Family family) {
    switch (family) {
        case MeshSource::Family::Structured:
        case MeshSource::Family::Distorted:
        case MeshSource::Family::Voronoi:
        case MeshSource::Family::NonConvex:
            return 4;
        case MeshSource::Family::File:
            return 1;
    }
    return 1;
}

MeshSource ladder_level(MeshSource::Family family, int level,
                        std::uint64_t seed) {
    if (level < 0 || level >= ladder_size(family))
        throw Error(ErrorCode::InvalidArgument,
                    "refinement level " + std::to_string(level) +
                        " outside the ladder");
    MeshSource src;
    src.family = family;
    src.level = level;
    src.seed = seed;
    return src;
}

PolygonalMesh load_mesh(const MeshSource& source,
                        const std::filesystem::path& fixture_dir) {
    switch (source.family) {
        case MeshSource::Family::Structured:
            return generate_structured_quads(kQuadLadder[source.level]);
        case MeshSource::Family::Distorted:
            return generate_distorted_quads(kQuadLadder[source.level],
                                            source.amplitude, source.seed);
        case MeshSource::Family::Voronoi:
            return import_mesh(fixture_dir /
                               ("voronoi_" +
                                zero_pad(kVoronoiLadder[source.level]) + ".txt"));
        case MeshSource::Family::NonConvex:
            return import_mesh(
                fixture_dir /
                ("nonconvex_" + zero_pad(kNonConvexLadder[source.level]) +
                 ".txt"));
        case MeshSource::Family::File:
            return import_mesh(source.file);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown mesh family");
}

double snap_tau(double tau, double t_span) {
    if (tau <= 0.0 || t_span <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "tau and t_span must be positive");
    const long n = std::max(1L, static_cast<long>(std::ceil(t_span / tau - 1e-9)));
    return t_span / static_cast<double>(n);
}

Scenario scenario_accuracy(int k, MeshSource::Family family, int level) {
    if (k < 1 || k > 6)
        throw Error(ErrorCode::InvalidArgument, "accuracy scenario needs k in 1..6");
    Scenario s;
    s.name = "accuracy";
    s.mesh = ladder_level(family, level);
    s.k = k;

    auto exact = [](Point p, double t) {
        return std::exp(-t) * std::cos(M_PI * p.x) * std::cos(M_PI * p.y);
    };
    s.problem.f = [](double u) { return 1.0 / (1.0 + u * u); };
    s.problem.f_prime = [](double u) {
        const double d = 1.0 + u * u;
        return -2.0 * u / (d * d);
    };
    // max |f'| = 3 sqrt(3) / 8 at u = 1/sqrt(3)
    s.problem.lipschitz = 3.0 * std::sqrt(3.0) / 8.0;
    s.problem.eps = 1.0;
    s.problem.exact = exact;
    s.problem.u0 = [exact](Point p) { return exact(p, 0.0); };
    // u_t = -u and Lap u = -2 pi^2 u, so g = u_t - Lap u + f(u)
    s.problem.source = [exact](Point p, double t) {
        const double u = exact(p, t);
        return (2.0 * M_PI * M_PI - 1.0) * u + 1.0 / (1.0 + u * u);
    };

    s.splitting.variant = SplittingVariant::DRD;
    s.splitting.t_end = 1.0;
    s.splitting.tau = 0.0;  // derived from h via tau_coupling_c by the harness
    s.tau_coupling_c = 0.5;
    return s;
}

Scenario scenario_allen_cahn(int k, int voronoi_level) {
    Scenario s;
    s.name = "allen_cahn";
    s.mesh = ladder_level(MeshSource::Family::Voronoi, voronoi_level);
    s.k = k;
    s.problem.f = [](double u) { return u * u * u - u; };
    s.problem.f_prime = [](double u) { return 3.0 * u * u - 1.0; };
    // local bound on [-1.1, 1.1]: max |3u^2 - 1| = 2.63
    s.problem.lipschitz = 2.63;
    s.problem.eps = 0.01;
    s.problem.u0 = [](Point p) {
        return std::cos(2.0 * M_PI * p.x * p.x) * std::cos(2.0 * M_PI * p.y * p.y);
    };
    s.splitting.variant = SplittingVariant::RDR;
    s.splitting.tau = 5e-3;
    s.splitting.t_end = 22.5;
    s.snapshot_times = {0.1, 5.0, 10.0, 22.5};
    return s;
}

}  // namespace svem
