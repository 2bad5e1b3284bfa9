#include "spnb/panel_io.hpp"

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "csv.hpp"

namespace spnb {

namespace {

struct PanelRow {
  long long unit;
  long long time;
  double y;
  double expected;
  std::vector<double> x;
};

}  // namespace

CountPanel read_panel_csv(std::istream& in) {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw IoError("empty panel file");
  const auto header = csv::split(line);
  if (header.size() < 4 || header[0] != "unit" || header[1] != "time" || header[2] != "y" ||
      header[3] != "expected") {
    csv::fail(reader.line_no(), "panel header must start with 'unit,time,y,expected'");
  }
  const std::size_t p = header.size() - 4;
  for (std::size_t j = 0; j < p; ++j) {
    if (header[4 + j] != "x" + std::to_string(j + 1)) {
      csv::fail(reader.line_no(), "covariate columns must be named x1..xp");
    }
  }

  std::vector<PanelRow> rows;
  long long max_unit = -1;
  long long max_time = -1;
  while (reader.next(line)) {
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      csv::fail(reader.line_no(), "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size()));
    }
    PanelRow row;
    row.unit = csv::parse_int(fields[0], reader.line_no());
    row.time = csv::parse_int(fields[1], reader.line_no());
    row.y = csv::parse_double(fields[2], reader.line_no());
    row.expected = csv::parse_double(fields[3], reader.line_no());
    if (row.unit < 0 || row.time < 0) csv::fail(reader.line_no(), "negative unit or time index");
    for (std::size_t j = 0; j < p; ++j) row.x.push_back(csv::parse_double(fields[4 + j], reader.line_no()));
    max_unit = std::max(max_unit, row.unit);
    max_time = std::max(max_time, row.time);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("panel file has no data rows");

  const Eigen::Index k = max_unit + 1;
  const Eigen::Index n = max_time + 1;
  if (static_cast<std::size_t>(k * n) != rows.size()) {
    throw IoError("panel has " + std::to_string(rows.size()) + " rows but " + std::to_string(k) +
                  " units x " + std::to_string(n) + " periods");
  }
  Eigen::MatrixXd y(k, n);
  Eigen::MatrixXd e(k, n);
  std::vector<Eigen::MatrixXd> x(p, Eigen::MatrixXd(k, n));
  std::vector<char> seen(static_cast<std::size_t>(k * n), 0);
  for (const auto& row : rows) {
    char& flag = seen[static_cast<std::size_t>(row.unit * n + row.time)];
    if (flag) {
      throw IoError("duplicate panel cell (unit " + std::to_string(row.unit) + ", time " +
                    std::to_string(row.time) + ")");
    }
    flag = 1;
    y(row.unit, row.time) = row.y;
    e(row.unit, row.time) = row.expected;
    for (std::size_t j = 0; j < p; ++j) x[j](row.unit, row.time) = row.x[j];
  }
  try {
    return CountPanel(std::move(y), std::move(e), std::move(x));
  } catch (const ValidationError& err) {
    throw IoError(std::string("invalid panel: ") + err.what());
  }
}

CountPanel read_panel_csv(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  try {
    return read_panel_csv(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_panel_csv(std::ostream& out, const CountPanel& panel) {
  out << "unit,time,y,expected";
  for (int j = 0; j < panel.covariate_count(); ++j) out << ",x" << j + 1;
  out << '\n';
  for (int k = 0; k < panel.units(); ++k) {
    for (int t = 0; t < panel.periods(); ++t) {
      out << k << ',' << t << ',' << static_cast<long long>(panel.counts()(k, t)) << ','
          << csv::format_double(panel.expected()(k, t));
      for (const auto& x : panel.covariates()) out << ',' << csv::format_double(x(k, t));
      out << '\n';
    }
  }
}

void write_panel_csv(const std::filesystem::path& path, const CountPanel& panel) {
  auto out = csv::open_output(path);
  write_panel_csv(out, panel);
}

ResidualSurface read_surface_csv(std::istream& in) {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw IoError("empty residual-surface file");
  const auto header = csv::split(line);
  if (header.size() != 2 || header[0] != "unit" || header[1] != "phi_tilde") {
    csv::fail(reader.line_no(), "residual-surface header must be 'unit,phi_tilde'");
  }
  std::vector<double> values;
  while (reader.next(line)) {
    const auto fields = csv::split(line);
    if (fields.size() != 2) csv::fail(reader.line_no(), "expected 2 fields");
    const auto unit = csv::parse_int(fields[0], reader.line_no());
    if (unit != static_cast<long long>(values.size())) {
      csv::fail(reader.line_no(), "units must be listed in order 0..K-1, got " + std::to_string(unit));
    }
    values.push_back(csv::parse_double(fields[1], reader.line_no()));
  }
  if (values.empty()) throw IoError("residual-surface file has no data rows");
  return ResidualSurface(std::move(values));
}

ResidualSurface read_surface_csv(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  try {
    return read_surface_csv(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_surface_csv(std::ostream& out, const ResidualSurface& surface) {
  out << "unit,phi_tilde\n";
  for (std::size_t k = 0; k < surface.size(); ++k) out << k << ',' << csv::format_double(surface.values()[k]) << '\n';
}

void write_surface_csv(const std::filesystem::path& path, const ResidualSurface& surface) {
  auto out = csv::open_output(path);
  write_surface_csv(out, surface);
}

void write_unit_time_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                         const char* value_name) {
  auto out = csv::open_output(path);
  out << "unit,time," << value_name << '\n';
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    for (Eigen::Index t = 0; t < values.cols(); ++t) out << k << ',' << t << ',' << csv::format_double(values(k, t)) << '\n';
  }
}

}  // namespace spnb
