#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace spnb::cli {

namespace fs = std::filesystem;

struct CommonOptions {
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

struct SimulateOptions : CommonOptions {};

struct ResidualsOptions : CommonOptions {
  fs::path input;  ///< panel.csv or a directory searched for panel.csv files
};

struct EstimateOptions : CommonOptions {
  fs::path graph;                      ///< graph file, or directory holding <replicate>/edges.csv
  fs::path residuals;                  ///< phi_tilde.csv or directory searched for them
  std::optional<fs::path> centroids;   ///< units.csv file or directory, for deleted-edge midpoints
};

struct EvaluateOptions : CommonOptions {
  fs::path truth;                      ///< simulate output (single replicate or batch root)
  std::optional<fs::path> border;      ///< defaults to the edges.csv next to each truth
  fs::path estimated;                  ///< kept-edge file, or estimate-w output directory
};

struct OracleOptions : CommonOptions {
  std::optional<int> trials;
  std::optional<int> edge_cap;
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& log);
int cmd_residuals(const ResidualsOptions& opts, std::ostream& log);
int cmd_estimate_w(const EstimateOptions& opts, std::ostream& log);
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& log);
int cmd_oracle_check(const OracleOptions& opts, std::ostream& log);

}  // namespace spnb::cli
