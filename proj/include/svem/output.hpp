#pragma once

#include <filesystem>

#include "svem/assembly.hpp"
#include "svem/reports.hpp"

namespace svem {

/// Convergence CSV: header row
/// level,h,tau,dofs,l2_error,eoc,t_linear_s,t_nonlinear_s,t_total_s
/// with full-precision decimals ("%.17g"); missing EOC prints as nan.
void export_csv(const ConvergenceReport& report,
                const std::filesystem::path& path);
ConvergenceReport import_csv(const std::filesystem::path& path);

void export_dof_csv(const std::vector<DofReportRow>& rows,
                    const std::filesystem::path& path);

/// Legacy ASCII VTK unstructured grid with polygon cells. Vertices are
/// duplicated per cell so the discontinuous Pi0 field can be attached as
/// point data; the cell average goes out as cell data.
void export_vtk(const SerendipitySpace& space, const Eigen::VectorXd& U,
                const std::filesystem::path& path,
                const std::string& field_name = "u");

}  // namespace svem
