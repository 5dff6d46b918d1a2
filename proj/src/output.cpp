#include "svem/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "svem/errors.hpp"

namespace svem {

namespace {

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void export_csv(const ConvergenceReport& report,
                const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::MalformedFile, "cannot write " + path.string());
    out << "level,h,tau,dofs,l2_error,eoc,t_linear_s,t_nonlinear_s,t_total_s\n";
    for (const ConvergenceRow& r : report.rows) {
        out << r.level << ',' << full(r.h) << ',' << full(r.tau) << ','
            << r.dofs << ',' << full(r.l2_error) << ',' << full(r.eoc) << ','
            << full(r.t_linear_s) << ',' << full(r.t_nonlinear_s) << ','
            << full(r.t_total_s) << '\n';
    }
}

ConvergenceReport import_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::MalformedFile, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line != "level,h,tau,dofs,l2_error,eoc,t_linear_s,t_nonlinear_s,t_total_s")
        throw Error(ErrorCode::MalformedFile, "unexpected CSV header");
    ConvergenceReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        ConvergenceRow r;
        char comma;
        ss >> r.level >> comma >> r.h >> comma >> r.tau >> comma >> r.dofs >>
            comma >> r.l2_error >> comma >> r.eoc >> comma >> r.t_linear_s >>
            comma >> r.t_nonlinear_s >> comma >> r.t_total_s;
        if (ss.fail())
            throw Error(ErrorCode::MalformedFile, "bad CSV row: " + line);
        report.rows.push_back(r);
    }
    return report;
}

void export_dof_csv(const std::vector<DofReportRow>& rows,
                    const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::MalformedFile, "cannot write " + path.string());
    out << "mesh,k,svem_dofs,enhanced_dofs,ratio,deficient\n";
    for (const DofReportRow& r : rows)
        out << r.mesh << ',' << r.k << ',' << r.svem << ',' << r.enhanced << ','
            << full(r.ratio) << ',' << (r.deficient ? 1 : 0) << '\n';
}

void export_vtk(const SerendipitySpace& space, const Eigen::VectorXd& U,
                const std::filesystem::path& path,
                const std::string& field_name) {
    const PolygonalMesh& mesh = space.mesh();
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::MalformedFile, "cannot write " + path.string());

    int n_points = 0;
    int cell_entries = 0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int m = static_cast<int>(mesh.cell(c).size());
        n_points += m;
        cell_entries += m + 1;
    }

    out << "# vtk DataFile Version 3.0\n"
        << "svem solution snapshot\n"
        << "ASCII\n"
        << "DATASET UNSTRUCTURED_GRID\n"
        << "POINTS " << n_points << " double\n";
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (const Point& p : mesh.cell_points(c))
            out << full(p.x) << ' ' << full(p.y) << " 0\n";

    out << "CELLS " << mesh.n_cells() << ' ' << cell_entries << '\n';
    int next = 0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int m = static_cast<int>(mesh.cell(c).size());
        out << m;
        for (int i = 0; i < m; ++i) out << ' ' << next++;
        out << '\n';
    }
    out << "CELL_TYPES " << mesh.n_cells() << '\n';
    for (int c = 0; c < mesh.n_cells(); ++c) out << "7\n";  // VTK_POLYGON

    out << "POINT_DATA " << n_points << '\n'
        << "SCALARS " << field_name << " double 1\n"
        << "LOOKUP_TABLE default\n";
    std::vector<double> means(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const ElementOperators& ops = space.element(c);
        const Eigen::VectorXd coeff = space.cell_projection(U, c);
        const auto pts = mesh.cell_points(c);
        const Eigen::MatrixXd vals = ops.basis.eval_all(pts);
        for (long i = 0; i < vals.rows(); ++i)
            out << full((vals.row(i) * coeff).value()) << '\n';
        means[c] = ops.mass_monomials.row(0).dot(coeff) / ops.geo.area;
    }
    out << "CELL_DATA " << mesh.n_cells() << '\n'
        << "SCALARS " << field_name << "_mean double 1\n"
        << "LOOKUP_TABLE default\n";
    for (double m : means) out << full(m) << '\n';
}

}  // namespace svem
