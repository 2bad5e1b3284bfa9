#include "cli/commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cli/manifest.hpp"
#include "csv.hpp"
#include "spnb/car_eval.hpp"
#include "spnb/datagen.hpp"
#include "spnb/errors.hpp"
#include "spnb/graph_io.hpp"
#include "spnb/optimizer.hpp"
#include "spnb/panel_io.hpp"
#include "spnb/residuals.hpp"

namespace spnb::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Batch plumbing

template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Job {
  fs::path rel;    ///< replicate directory relative to the batch root ("" for a single file)
  fs::path input;  ///< the marker file for this replicate
};

/// A single file is one job; a directory yields one job per `marker` file found beneath it.
std::vector<Job> discover(const fs::path& input, const char* marker) {
  if (!fs::exists(input)) throw IoError("input '" + input.string() + "' does not exist");
  if (fs::is_regular_file(input)) return {Job{fs::path(), input}};
  std::vector<Job> jobs;
  for (const auto& entry : fs::recursive_directory_iterator(input)) {
    if (entry.is_regular_file() && entry.path().filename() == marker) {
      jobs.push_back(Job{fs::relative(entry.path().parent_path(), input), entry.path()});
    }
  }
  if (jobs.empty()) {
    throw ValidationError("no " + std::string(marker) + " files found under '" + input.string() + "'");
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.rel < b.rel; });
  return jobs;
}

/// A file option applies to every replicate; a directory option is indexed by replicate.
fs::path resolve(const fs::path& option, const fs::path& rel, const char* name) {
  return fs::is_directory(option) ? option / rel / name : option;
}

fs::path prepare_dir(const fs::path& root, const fs::path& rel) {
  const fs::path dir = rel.empty() ? root : root / rel;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  return dir;
}

json load_config(const CommonOptions& opts) {
  if (!opts.config) return json::object();
  json j = read_json(*opts.config);
  if (!j.is_object()) throw ValidationError("config '" + opts.config->string() + "' must be a JSON object");
  return j;
}

std::string label(const fs::path& rel) { return rel.empty() ? std::string(".") : rel.generic_string(); }

std::string fmt(double x) { return csv::format_double(x); }

std::ofstream open_text(const fs::path& path) { return csv::open_output(path); }

// ---------------------------------------------------------------------------
// Configuration parsing

SimulationConfig apply_simulation_settings(SimulationConfig cfg, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "rows") {
      cfg.rows = value.get<int>();
    } else if (key == "cols") {
      cfg.cols = value.get<int>();
    } else if (key == "periods") {
      cfg.periods = value.get<int>();
    } else if (key == "beta") {
      cfg.beta = value.get<std::vector<double>>();
    } else if (key == "e_range") {
      const auto r = value.get<std::vector<double>>();
      if (r.size() != 2) throw ValidationError("e_range must have two entries");
      cfg.e_range = {r[0], r[1]};
    } else if (key == "lambda") {
      cfg.lambda = value.get<double>();
    } else if (key == "alpha") {
      cfg.alpha = value.get<double>();
    } else if (key == "cov_target_corr") {
      cfg.cov_target_corr = value.get<double>();
    } else if (key == "phi_target_corr") {
      cfg.phi_target_corr = value.get<double>();
    } else if (key == "cov_sd") {
      cfg.cov_sd = value.get<double>();
    } else if (key == "phi_sd") {
      cfg.phi_sd = value.get<double>();
    } else if (key == "phi_star_sd") {
      cfg.phi_star_sd = value.get<double>();
    } else if (key == "delta_sd") {
      cfg.delta_sd = value.get<double>();
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else {
      throw ValidationError("unknown simulation setting '" + key + "'");
    }
  }
  return cfg;
}

json to_json(const SimulationConfig& cfg) {
  return {{"rows", cfg.rows},
          {"cols", cfg.cols},
          {"periods", cfg.periods},
          {"beta", cfg.beta},
          {"e_range", {cfg.e_range[0], cfg.e_range[1]}},
          {"lambda", cfg.lambda},
          {"alpha", cfg.alpha},
          {"cov_target_corr", cfg.cov_target_corr},
          {"phi_target_corr", cfg.phi_target_corr},
          {"cov_sd", cfg.cov_sd},
          {"phi_sd", cfg.phi_sd},
          {"phi_star_sd", cfg.phi_star_sd},
          {"delta_sd", cfg.delta_sd},
          {"seed", cfg.seed}};
}

std::string name_part(const json& v) {
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "-" : "") + name_part(v[i]);
    return s;
  }
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

struct Scenario {
  std::string name;
  SimulationConfig cfg;
};

struct SimulationPlan {
  std::vector<Scenario> scenarios;
  int replicates = 1;
};

SimulationPlan plan_simulation(const json& config, std::optional<std::uint64_t> seed) {
  SimulationPlan plan;
  json base = json::object();
  std::string base_name = "scenario";
  for (const auto& [key, value] : config.items()) {
    if (key == "replicates") {
      plan.replicates = value.get<int>();
    } else if (key == "name") {
      base_name = value.get<std::string>();
    } else if (key != "grid" && key != "scenarios") {
      base[key] = value;
    }
  }
  if (plan.replicates < 1) throw ValidationError("replicates must be at least 1");
  SimulationConfig base_cfg = apply_simulation_settings(SimulationConfig{}, base);
  if (seed) base_cfg.seed = *seed;

  if (config.contains("grid") && config.contains("scenarios")) {
    throw ValidationError("config may contain 'grid' or 'scenarios', not both");
  }
  if (config.contains("grid")) {
    const json& grid = config.at("grid");
    if (!grid.is_object() || grid.empty()) throw ValidationError("'grid' must be a nonempty object of lists");
    std::vector<std::pair<std::string, json>> axes;
    std::size_t total = 1;
    for (const auto& [key, values] : grid.items()) {
      if (!values.is_array() || values.empty()) throw ValidationError("grid axis '" + key + "' must be a nonempty list");
      axes.emplace_back(key, values);
      total *= values.size();
    }
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      json overrides = json::object();
      std::vector<std::string> parts(axes.size());
      for (std::size_t a = axes.size(); a-- > 0;) {
        const auto& [key, values] = axes[a];
        const json& v = values[rem % values.size()];
        rem /= values.size();
        overrides[key] = v;
        parts[a] = key + name_part(v);
      }
      std::string name;
      for (std::size_t a = 0; a < parts.size(); ++a) name += (a ? "_" : "") + parts[a];
      plan.scenarios.push_back({name, apply_simulation_settings(base_cfg, overrides)});
    }
  } else if (config.contains("scenarios")) {
    const json& list = config.at("scenarios");
    if (!list.is_array() || list.empty()) throw ValidationError("'scenarios' must be a nonempty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      json overrides = list[i];
      std::string name = "scenario" + std::to_string(i);
      if (overrides.contains("name")) {
        name = overrides.at("name").get<std::string>();
        overrides.erase("name");
      }
      plan.scenarios.push_back({name, apply_simulation_settings(base_cfg, overrides)});
    }
  } else {
    plan.scenarios.push_back({base_name, base_cfg});
  }
  std::vector<std::string> names;
  for (const auto& s : plan.scenarios) {
    s.cfg.validate();
    if (s.name.empty() || s.name.find('/') != std::string::npos || s.name == "." || s.name == "..") {
      throw ValidationError("invalid scenario name '" + s.name + "'");
    }
    names.push_back(s.name);
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw ValidationError("scenario names must be unique");
  }
  return plan;
}

GlmOptions glm_options(const json& j) {
  GlmOptions o;
  for (const auto& [key, value] : j.items()) {
    if (key == "intercept") {
      o.intercept = value.get<bool>();
    } else if (key == "max_iterations") {
      o.max_iterations = value.get<int>();
    } else if (key == "score_tolerance") {
      o.score_tolerance = value.get<double>();
    } else if (key == "relative_loglik_tolerance") {
      o.relative_loglik_tolerance = value.get<double>();
    } else {
      throw ValidationError("unknown residuals setting '" + key + "'");
    }
  }
  return o;
}

SearchConfig search_config(const json& j) {
  SearchConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "max_passes") {
      c.max_passes = value.get<int>();
    } else if (key == "degree_cap") {
      c.degree_cap = value.get<int>();
    } else if (key == "on_degree_cap") {
      const auto policy = value.get<std::string>();
      if (policy == "error") {
        c.on_degree_cap = DegreeCapPolicy::error;
      } else if (policy == "greedy_fallback") {
        c.on_degree_cap = DegreeCapPolicy::greedy_fallback;
      } else {
        throw ValidationError("on_degree_cap must be 'error' or 'greedy_fallback'");
      }
    } else {
      throw ValidationError("unknown estimate-w setting '" + key + "'");
    }
  }
  c.validate();
  return c;
}

SmootherGrid smoother_grid(const json& j) {
  SmootherGrid g = SmootherGrid::defaults();
  for (const auto& [key, value] : j.items()) {
    if (key == "rho_values") {
      g.rho_values = value.get<std::vector<double>>();
    } else if (key == "tau_values") {
      g.tau_values = value.get<std::vector<double>>();
    } else if (key == "obs_sd") {
      if (!value.is_null()) g.obs_sd = value.get<double>();
    } else {
      throw ValidationError("unknown evaluate setting '" + key + "'");
    }
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Simulation truth files

void write_truth(const fs::path& dir, const SimulatedPanel& sim) {
  auto out = open_text(dir / "truth.csv");
  out << "unit,time,phi,delta,theta\n";
  for (Eigen::Index k = 0; k < sim.phi.rows(); ++k) {
    for (Eigen::Index t = 0; t < sim.phi.cols(); ++t) {
      out << k << ',' << t << ',' << fmt(sim.phi(k, t)) << ',' << fmt(sim.delta(t)) << ','
          << fmt(sim.theta(k, t)) << '\n';
    }
  }
  auto units = open_text(dir / "units.csv");
  units << "unit,x,y,region_label\n";
  for (std::size_t k = 0; k < sim.centroids.size(); ++k) {
    units << k << ',' << fmt(sim.centroids[k][0]) << ',' << fmt(sim.centroids[k][1]) << ','
          << sim.region_label[k] << '\n';
  }
}

struct UnitInfo {
  std::vector<std::array<double, 2>> centroids;
  std::vector<int> region_label;
};

UnitInfo read_units(const fs::path& path) {
  auto in = csv::open_input(path);
  csv::LineReader reader(in);
  std::string line;
  auto fail = [&](const std::string& msg) -> void { throw IoError(path.string() + ": line " +
                                                                 std::to_string(reader.line_no()) + ": " + msg); };
  if (!reader.next(line) || csv::split(line) != std::vector<std::string_view>{"unit", "x", "y", "region_label"}) {
    fail("header must be 'unit,x,y,region_label'");
  }
  UnitInfo info;
  while (reader.next(line)) {
    const auto f = csv::split(line);
    if (f.size() != 4) fail("expected 4 fields");
    try {
      if (csv::parse_int(f[0], reader.line_no()) != static_cast<long long>(info.region_label.size())) {
        fail("units must be listed in order");
      }
      info.centroids.push_back({csv::parse_double(f[1], reader.line_no()), csv::parse_double(f[2], reader.line_no())});
      info.region_label.push_back(static_cast<int>(csv::parse_int(f[3], reader.line_no())));
    } catch (const IoError& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  return info;
}

SimulatedPanel read_simulation(const fs::path& dir) {
  for (const char* name : {"panel.csv", "truth.csv", "units.csv"}) {
    if (!fs::exists(dir / name)) throw IoError("missing truth file '" + (dir / name).string() + "'");
  }
  CountPanel panel = read_panel_csv(dir / "panel.csv");
  const int k = panel.units();
  const int n = panel.periods();
  Eigen::MatrixXd phi(k, n);
  Eigen::MatrixXd theta(k, n);
  Eigen::VectorXd delta(n);
  std::vector<char> seen(static_cast<std::size_t>(k) * n, 0);

  const fs::path truth_path = dir / "truth.csv";
  auto in = csv::open_input(truth_path);
  csv::LineReader reader(in);
  std::string line;
  try {
    if (!reader.next(line) ||
        csv::split(line) != std::vector<std::string_view>{"unit", "time", "phi", "delta", "theta"}) {
      csv::fail(reader.line_no(), "header must be 'unit,time,phi,delta,theta'");
    }
    std::size_t rows = 0;
    while (reader.next(line)) {
      const auto f = csv::split(line);
      if (f.size() != 5) csv::fail(reader.line_no(), "expected 5 fields");
      const auto unit = csv::parse_int(f[0], reader.line_no());
      const auto time = csv::parse_int(f[1], reader.line_no());
      if (unit < 0 || unit >= k || time < 0 || time >= n) csv::fail(reader.line_no(), "cell outside the panel");
      char& flag = seen[static_cast<std::size_t>(unit * n + time)];
      if (flag) csv::fail(reader.line_no(), "duplicate cell");
      flag = 1;
      phi(unit, time) = csv::parse_double(f[2], reader.line_no());
      delta(time) = csv::parse_double(f[3], reader.line_no());
      theta(unit, time) = csv::parse_double(f[4], reader.line_no());
      ++rows;
    }
    if (rows != seen.size()) throw IoError("truth covers " + std::to_string(rows) + " of " +
                                           std::to_string(seen.size()) + " panel cells");
  } catch (const IoError& e) {
    throw IoError(truth_path.string() + ": " + e.what());
  }

  UnitInfo units = read_units(dir / "units.csv");
  if (static_cast<int>(units.region_label.size()) != k) {
    throw ValidationError("units.csv lists " + std::to_string(units.region_label.size()) + " units, panel has " +
                          std::to_string(k));
  }
  return SimulatedPanel{std::move(panel), std::move(phi), std::move(delta), std::move(theta),
                        std::move(units.region_label), std::move(units.centroids), 0.0, 0.0};
}

Graph read_graph_for(const fs::path& path, int k) {
  if (!fs::exists(path)) throw IoError("missing graph file '" + path.string() + "'");
  const Graph g = read_graph_csv(path);
  if (g.vertex_count() > k) {
    throw ValidationError("graph '" + path.string() + "' has " + std::to_string(g.vertex_count()) +
                          " vertices but the data have " + std::to_string(k) + " units");
  }
  const auto edges = g.edges();
  return Graph::from_edge_list(k, edges);
}

json edges_json(const std::vector<Edge>& edges) {
  json a = json::array();
  for (const Edge& e : edges) a.push_back({e.u, e.v});
  return a;
}

// ---------------------------------------------------------------------------
// Oracle instances

Graph random_small_connected(int edge_cap, Rng& rng) {
  std::uniform_int_distribution<int> dim(2, 4);
  int rows = dim(rng);
  int cols = dim(rng);
  while (rows * cols - 1 > edge_cap) (rows >= cols ? rows : cols)--;
  std::vector<Edge> pool = lattice_graph(rows, cols).edges();
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<int> parent(static_cast<std::size_t>(rows * cols));
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<Edge> tree;
  std::vector<Edge> rest;
  for (const Edge& e : pool) {
    const int a = find(e.u);
    const int b = find(e.v);
    if (a != b) {
      parent[a] = b;
      tree.push_back(e);
    } else {
      rest.push_back(e);
    }
  }
  const int room = std::min<int>(edge_cap - static_cast<int>(tree.size()), static_cast<int>(rest.size()));
  std::uniform_int_distribution<int> extra(0, std::max(room, 0));
  const int add = extra(rng);
  tree.insert(tree.end(), rest.begin(), rest.begin() + add);
  return Graph::from_edge_list(rows * cols, tree);
}

struct OracleCase {
  std::string name;
  std::string kind;
  Graph graph;
  ResidualSurface phi;
};

Graph star(int leaves) {
  std::vector<Edge> edges;
  for (int i = 1; i <= leaves; ++i) edges.push_back({0, i});
  return Graph::from_edge_list(leaves + 1, edges);
}

std::vector<OracleCase> curated_cases() {
  std::vector<OracleCase> cases;
  cases.push_back({"p4", "curated", lattice_graph(1, 4), ResidualSurface({0, 0, 10, 10})});
  cases.push_back({"c4", "curated", lattice_graph(2, 2), ResidualSurface({1, 1, -1, -1})});
  cases.push_back({"star3", "curated", star(3), ResidualSurface({5, 0, 0, 0})});
  cases.push_back({"star6", "curated", star(6), ResidualSurface({0.3, -1.2, 2.0, 0.7, -0.4, 1.1, -2.5})});
  return cases;
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const SimulateOptions& opts, std::ostream& log) {
  if (!opts.config) throw ValidationError("simulate requires --config");
  const json config = load_config(opts);
  const SimulationPlan plan = plan_simulation(config, opts.seed);
  RunManifest manifest("simulate", config);
  manifest.add_input(*opts.config);
  manifest.add_seed(plan.scenarios.front().cfg.seed);

  struct Task {
    std::size_t scenario;
    int replicate;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < plan.scenarios.size(); ++s) {
    for (int r = 0; r < plan.replicates; ++r) tasks.push_back({s, r});
  }
  prepare_dir(opts.out, {});
  parallel_for(tasks.size(), opts.jobs, [&](std::size_t i) {
    const Scenario& sc = plan.scenarios[tasks[i].scenario];
    const std::uint64_t stream = i;
    char rep_name[32];
    std::snprintf(rep_name, sizeof rep_name, "rep_%03d", tasks[i].replicate);
    const fs::path dir = prepare_dir(opts.out, fs::path(sc.name) / rep_name);
    const SimulatedPanel sim = simulate_panel(sc.cfg, stream);
    write_panel_csv(dir / "panel.csv", sim.panel);
    write_truth(dir, sim);
    write_edge_list_csv(dir / "edges.csv", lattice_graph(sc.cfg.rows, sc.cfg.cols));
    write_json(dir / "metadata.json", {{"scenario", sc.name},
                                       {"replicate", tasks[i].replicate},
                                       {"seed", sc.cfg.seed},
                                       {"stream", stream},
                                       {"rng", "mt19937_64 seeded by seed_seq(seed, stream)"},
                                       {"config", to_json(sc.cfg)},
                                       {"xi_covariate", sim.xi_covariate},
                                       {"xi_phi", sim.xi_phi}});
  });
  manifest.write(opts.out);
  log << "simulate: " << plan.scenarios.size() << " scenario(s) x " << plan.replicates << " replicate(s) -> "
      << opts.out.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// residuals

int cmd_residuals(const ResidualsOptions& opts, std::ostream& log) {
  const json config = load_config(opts);
  const GlmOptions glm = glm_options(config);
  RunManifest manifest("residuals", config);
  manifest.add_input(opts.input);
  if (opts.seed) manifest.add_seed(*opts.seed);
  const auto jobs = discover(opts.input, "panel.csv");
  prepare_dir(opts.out, {});
  std::vector<std::string> lines(jobs.size());
  parallel_for(jobs.size(), opts.jobs, [&](std::size_t i) {
    const CountPanel panel = read_panel_csv(jobs[i].input);
    const GlmFit fit = fit_poisson_glm(panel, glm);
    const Eigen::MatrixXd raw = raw_residuals(panel, fit);
    const fs::path dir = prepare_dir(opts.out, jobs[i].rel);
    write_unit_time_csv(dir / "residuals.csv", raw, "residual");
    write_surface_csv(dir / "phi_tilde.csv", temporal_average(raw));
    write_json(dir / "glm.json", {{"beta", std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size())},
                                  {"intercept", fit.intercept},
                                  {"converged", fit.converged},
                                  {"iterations", fit.iterations},
                                  {"deviance", fit.deviance},
                                  {"max_abs_score", fit.max_abs_score}});
    std::ostringstream line;
    line << label(jobs[i].rel) << ": " << panel.units() << " units x " << panel.periods() << " periods, "
         << fit.iterations << " IRLS iterations";
    lines[i] = line.str();
  });
  manifest.write(opts.out);
  for (const auto& l : lines) log << "residuals: " << l << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// estimate-w

int cmd_estimate_w(const EstimateOptions& opts, std::ostream& log) {
  const json config = load_config(opts);
  const SearchConfig search = search_config(config);
  RunManifest manifest("estimate-w", config);
  manifest.add_input(opts.graph);
  manifest.add_input(opts.residuals);
  if (opts.centroids) manifest.add_input(*opts.centroids);
  if (opts.seed) manifest.add_seed(*opts.seed);
  const auto jobs = discover(opts.residuals, "phi_tilde.csv");
  prepare_dir(opts.out, {});
  std::vector<std::string> lines(jobs.size());
  parallel_for(jobs.size(), opts.jobs, [&](std::size_t i) {
    const ResidualSurface phi = read_surface_csv(jobs[i].input);
    const int k = static_cast<int>(phi.size());
    const Graph g = read_graph_for(resolve(opts.graph, jobs[i].rel, "edges.csv"), k);
    const SearchResult result = local_search(g, phi, search);
    const fs::path dir = prepare_dir(opts.out, jobs[i].rel);
    const auto deleted = result.graph.deleted_edges();
    write_edge_list_csv(dir / "kept_edges.csv", result.graph.kept());
    write_edge_list_csv(dir / "deleted_edges.csv", deleted);

    const double reduction = g.edge_count() ? 100.0 * static_cast<double>(deleted.size()) / g.edge_count() : 0.0;
    const ObjectiveValue initial = objective(g, phi);
    const ObjectiveValue final_value = objective(result.graph, phi);
    json trace = {{"vertices", k},
                  {"input_edges", g.edge_count()},
                  {"kept_edges", result.graph.kept().edge_count()},
                  {"deleted_edges", deleted.size()},
                  {"edge_reduction_pct", reduction},
                  {"initial_objective", initial.value},
                  {"final_objective", final_value.value},
                  {"final_discrepancy_sum", final_value.discrepancy_sum},
                  {"final_guarded", final_value.guarded},
                  {"tau_hat", final_value.discrepancy_sum > 0.0 ? json(tau_mle(result.graph.kept(), phi)) : json()},
                  {"passes", result.trace.passes},
                  {"pass_objectives", result.trace.pass_objectives},
                  {"rejected_pass_objective", result.trace.rejected_pass_objective
                                                   ? json(*result.trace.rejected_pass_objective)
                                                   : json()},
                  {"rolled_back_deletions", result.trace.rolled_back_deletions},
                  {"terminated_by", std::string(to_string(result.trace.terminated_by))},
                  {"deletion_order", edges_json(result.trace.deleted_edges)}};
    write_json(dir / "trace.json", trace);

    if (opts.centroids) {
      const UnitInfo units = read_units(resolve(*opts.centroids, jobs[i].rel, "units.csv"));
      if (static_cast<int>(units.centroids.size()) != k) {
        throw ValidationError("centroid file does not match the residual surface length");
      }
      auto out = open_text(dir / "deleted_midpoints.csv");
      out << "u,v,x,y\n";
      for (const Edge& e : deleted) {
        out << e.u << ',' << e.v << ',' << fmt(0.5 * (units.centroids[e.u][0] + units.centroids[e.v][0])) << ','
            << fmt(0.5 * (units.centroids[e.u][1] + units.centroids[e.v][1])) << '\n';
      }
    }
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(1);
    line << label(jobs[i].rel) << ": edge reduction " << reduction << "% (" << deleted.size() << " of "
         << g.edge_count() << " edges deleted, " << result.trace.passes << " passes)";
    lines[i] = line.str();
  });
  manifest.write(opts.out);
  for (const auto& l : lines) log << "estimate-w: " << l << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

json metrics_json(const MethodMetrics& m) {
  return {{"rmse", m.rmse}, {"surface_rmse", m.surface_rmse}, {"coverage", m.coverage},
          {"interval_width", m.interval_width}};
}

struct TableRow {
  std::size_t replicates = 0;
  std::vector<double> sums;
};

constexpr const char* kTableColumns[] = {
    "rmse_w",     "rmse_we",     "reduction_pct", "surface_rmse_w",
    "surface_rmse_we", "surface_reduction_pct", "coverage_w", "coverage_we",
    "width_w",    "width_we",    "cross_boundary_deleted_fraction", "within_region_deleted_fraction"};

std::vector<double> table_values(const EvalReport& r) {
  return {r.rmse_w,
          r.rmse_we,
          r.reduction_pct,
          r.border.surface_rmse,
          r.estimated.surface_rmse,
          r.surface_reduction_pct,
          r.border.coverage,
          r.estimated.coverage,
          r.border.interval_width,
          r.estimated.interval_width,
          r.cross_boundary_deleted_fraction(),
          r.within_region_deleted_fraction()};
}

}  // namespace

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& log) {
  const json config = load_config(opts);
  const SmootherGrid grid = smoother_grid(config);
  RunManifest manifest("evaluate", config);
  manifest.add_input(opts.truth);
  if (opts.border) manifest.add_input(*opts.border);
  manifest.add_input(opts.estimated);
  if (opts.seed) manifest.add_seed(*opts.seed);
  if (!fs::exists(opts.truth)) throw IoError("truth directory '" + opts.truth.string() + "' does not exist");
  if (!fs::is_directory(opts.truth)) throw ValidationError("--truth must be a simulate output directory");
  const auto jobs = discover(opts.truth, "truth.csv");
  prepare_dir(opts.out, {});
  std::vector<EvalReport> reports(jobs.size());
  parallel_for(jobs.size(), opts.jobs, [&](std::size_t i) {
    const fs::path truth_dir = jobs[i].input.parent_path();
    const SimulatedPanel sim = read_simulation(truth_dir);
    const int k = sim.panel.units();
    const fs::path border_path = opts.border ? resolve(*opts.border, jobs[i].rel, "edges.csv") : truth_dir / "edges.csv";
    auto border = std::make_shared<const Graph>(read_graph_for(border_path, k));
    const Graph kept = read_graph_for(resolve(opts.estimated, jobs[i].rel, "kept_edges.csv"), k);
    const FeasibleSubgraph estimated(border, kept);
    const EvalReport r = evaluate_replicate(sim, *border, estimated, grid);
    reports[i] = r;

    const fs::path dir = prepare_dir(opts.out, jobs[i].rel);
    write_json(dir / "eval_report.json",
               {{"rmse_w", r.rmse_w},
                {"rmse_we", r.rmse_we},
                {"reduction_pct", r.reduction_pct},
                {"surface_reduction_pct", r.surface_reduction_pct},
                {"border", metrics_json(r.border)},
                {"estimated", metrics_json(r.estimated)},
                {"edges",
                 {{"cross_boundary_deleted", r.cross_boundary_deleted},
                  {"cross_boundary_total", r.cross_boundary_total},
                  {"within_region_deleted", r.within_region_deleted},
                  {"within_region_total", r.within_region_total},
                  {"cross_boundary_deleted_fraction", r.cross_boundary_deleted_fraction()},
                  {"within_region_deleted_fraction", r.within_region_deleted_fraction()}}}});
    auto out = open_text(dir / "phi_hat.csv");
    out << "unit,time,phi_hat_w,phi_hat_we\n";
    for (Eigen::Index u = 0; u < r.border.phi_hat.rows(); ++u) {
      for (Eigen::Index t = 0; t < r.border.phi_hat.cols(); ++t) {
        out << u << ',' << t << ',' << fmt(r.border.phi_hat(u, t)) << ',' << fmt(r.estimated.phi_hat(u, t))
            << '\n';
      }
    }
  });

  std::map<std::string, TableRow> table;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const fs::path parent = jobs[i].rel.parent_path();
    TableRow& row = table[parent.empty() ? std::string("all") : parent.generic_string()];
    const auto values = table_values(reports[i]);
    if (row.sums.empty()) row.sums.assign(values.size(), 0.0);
    for (std::size_t c = 0; c < values.size(); ++c) row.sums[c] += values[c];
    ++row.replicates;
  }
  {
    auto out = open_text(opts.out / "scenario_table.csv");
    out << "scenario,replicates";
    for (const char* c : kTableColumns) out << ',' << c;
    out << '\n';
    for (const auto& [name, row] : table) {
      out << name << ',' << row.replicates;
      for (double s : row.sums) out << ',' << fmt(s / static_cast<double>(row.replicates));
      out << '\n';
    }
  }
  manifest.write(opts.out);
  for (const auto& [name, row] : table) {
    log << "evaluate: " << name << ": " << row.replicates << " replicate(s), mean reduction "
        << row.sums[2] / row.replicates << "% (risk), " << row.sums[5] / row.replicates << "% (surface)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// oracle-check

int cmd_oracle_check(const OracleOptions& opts, std::ostream& log) {
  const json config = load_config(opts);
  int trials = 100;
  int edge_cap = 12;
  std::uint64_t seed = 1;
  for (const auto& [key, value] : config.items()) {
    if (key == "trials") {
      trials = value.get<int>();
    } else if (key == "edge_cap") {
      edge_cap = value.get<int>();
    } else if (key == "seed") {
      seed = value.get<std::uint64_t>();
    } else {
      throw ValidationError("unknown oracle-check setting '" + key + "'");
    }
  }
  if (opts.trials) trials = *opts.trials;
  if (opts.edge_cap) edge_cap = *opts.edge_cap;
  if (opts.seed) seed = *opts.seed;
  if (trials < 0) throw ValidationError("trials must be nonnegative");
  if (edge_cap < 1 || edge_cap > 20) throw ValidationError("edge_cap must lie in [1, 20]");

  json effective = config;
  effective["trials"] = trials;
  effective["edge_cap"] = edge_cap;
  effective["seed"] = seed;
  RunManifest manifest("oracle-check", effective);
  manifest.add_seed(seed);

  std::vector<OracleCase> cases = curated_cases();
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
    Graph g = random_small_connected(edge_cap, rng);
    std::normal_distribution<double> normal;
    std::vector<double> values(static_cast<std::size_t>(g.vertex_count()));
    for (auto& v : values) v = normal(rng);
    cases.push_back({"random" + std::to_string(t), "random", std::move(g), ResidualSurface(std::move(values))});
  }

  struct Row {
    double local = 0.0;
    double oracle = 0.0;
    std::size_t local_deleted = 0;
    std::size_t oracle_deleted = 0;
    bool same = false;
  };
  std::vector<Row> rows(cases.size());
  parallel_for(cases.size(), opts.jobs, [&](std::size_t i) {
    const auto local = local_search(cases[i].graph, cases[i].phi);
    const auto oracle = brute_force_optimum(cases[i].graph, cases[i].phi, std::max<int>(edge_cap, cases[i].graph.edge_count()));
    rows[i] = Row{objective(local.graph, cases[i].phi).value, oracle.objective.value,
                  local.graph.deleted_edges().size(), oracle.graph.deleted_edges().size(),
                  local.graph.kept() == oracle.graph.kept()};
  });

  prepare_dir(opts.out, {});
  double min_gap = std::numeric_limits<double>::infinity();
  double max_gap = -std::numeric_limits<double>::infinity();
  std::size_t exact = 0;
  {
    auto out = open_text(opts.out / "gap_table.csv");
    out << "case,kind,vertices,edges,local_objective,oracle_objective,gap,local_deleted,oracle_deleted,same_graph\n";
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const Row& r = rows[i];
      const double gap = r.oracle - r.local;
      min_gap = std::min(min_gap, gap);
      max_gap = std::max(max_gap, gap);
      exact += r.same;
      out << cases[i].name << ',' << cases[i].kind << ',' << cases[i].graph.vertex_count() << ','
          << cases[i].graph.edge_count() << ',' << fmt(r.local) << ',' << fmt(r.oracle) << ',' << fmt(gap) << ','
          << r.local_deleted << ',' << r.oracle_deleted << ',' << (r.same ? 1 : 0) << '\n';
    }
  }
  manifest.write(opts.out);
  log << "oracle-check: " << cases.size() << " instances (" << trials << " random, edge cap " << edge_cap
      << "), gap min " << min_gap << " max " << max_gap << ", " << exact << " identical to the oracle\n";
  return 0;
}

}  // namespace spnb::cli
