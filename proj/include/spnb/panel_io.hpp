#pragma once

#include <filesystem>
#include <iosfwd>

#include <Eigen/Dense>

#include "spnb/objective.hpp"
#include "spnb/residuals.hpp"

namespace spnb {

/// Long-format panel: header `unit,time,y,expected,x1..xp`, one row per
/// (unit, time) cell, 0-based indices, any row order. Every cell must
/// appear exactly once.
CountPanel read_panel_csv(std::istream& in);
CountPanel read_panel_csv(const std::filesystem::path& path);
void write_panel_csv(std::ostream& out, const CountPanel& panel);
void write_panel_csv(const std::filesystem::path& path, const CountPanel& panel);

/// Header `unit,phi_tilde`, one row per unit in index order.
ResidualSurface read_surface_csv(std::istream& in);
ResidualSurface read_surface_csv(const std::filesystem::path& path);
void write_surface_csv(std::ostream& out, const ResidualSurface& surface);
void write_surface_csv(const std::filesystem::path& path, const ResidualSurface& surface);

/// K x N matrix in long form with header `unit,time,<value_name>`.
void write_unit_time_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                         const char* value_name);

}  // namespace spnb
