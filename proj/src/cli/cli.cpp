#include "spnb/cli.hpp"

#include <algorithm>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/commands.hpp"
#include "cli/manifest.hpp"
#include "spnb/errors.hpp"

namespace spnb::cli {

namespace {

void add_common(CLI::App& cmd, CommonOptions& opts) {
  cmd.add_option("--config", opts.config, "JSON configuration file");
  cmd.add_option("--out", opts.out, "output directory")->required();
  cmd.add_option("--seed", opts.seed, "random seed (overrides the config)");
  cmd.add_option("--jobs", opts.jobs, "replicates processed in parallel")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neighbourhood-matrix estimation for spatio-temporal disease mapping", "spnb"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "generate synthetic count panels with known truth");
  add_common(*simulate, sim);

  ResidualsOptions res;
  auto* residuals = app.add_subcommand("residuals", "fit the Poisson GLM and write residual surfaces");
  add_common(*residuals, res);
  residuals->add_option("--input", res.input, "panel.csv or a simulate output directory")->required();

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate-w", "estimate the neighbourhood graph by local search");
  add_common(*estimate, est);
  estimate->add_option("--graph", est.graph, "border graph file, or directory of <replicate>/edges.csv")
      ->required();
  estimate->add_option("--residuals", est.residuals, "phi_tilde.csv or a residuals output directory")
      ->required();
  estimate->add_option("--centroids", est.centroids, "units.csv file or directory for deleted-edge midpoints");

  EvaluateOptions eva;
  auto* evaluate = app.add_subcommand("evaluate", "compare CAR smoothing under the border and estimated graphs");
  add_common(*evaluate, eva);
  evaluate->add_option("--truth", eva.truth, "simulate output directory")->required();
  evaluate->add_option("--border", eva.border, "border graph file or directory (default: edges.csv beside truth)");
  evaluate->add_option("--estimated", eva.estimated, "kept-edge file or estimate-w output directory")->required();

  OracleOptions ora;
  auto* oracle = app.add_subcommand("oracle-check", "compare local search with brute force on small graphs");
  add_common(*oracle, ora);
  oracle->add_option("--trials", ora.trials, "number of random instances");
  oracle->add_option("--edge-cap", ora.edge_cap, "maximum edges per random instance (at most 20)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (residuals->parsed()) return cmd_residuals(res, out);
    if (estimate->parsed()) return cmd_estimate_w(est, out);
    if (evaluate->parsed()) return cmd_evaluate(eva, out);
    return cmd_oracle_check(ora, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace spnb::cli
