#include "sigssar/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "CLI11.hpp"
#include "sigssar/error.hpp"
#include "sigssar/io.hpp"
#include "sigssar/rng.hpp"
#include "sigssar/simgen.hpp"

namespace sigssar::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw UsageError(fmt::format("manifest key '{}': cannot parse '{}'", key, text));
  }
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse_value<T>(key, item));
  if (out.empty()) throw UsageError(fmt::format("manifest key '{}' is empty", key));
  return out;
}

est::RidgeSolver parse_solver(std::string_view tag) {
  if (tag == "primal") return est::RidgeSolver::primal;
  if (tag == "dual") return est::RidgeSolver::dual;
  throw UsageError(fmt::format("unknown ridge solver '{}' (expected primal or dual)", tag));
}

std::string_view to_string(est::RidgeSolver s) { return s == est::RidgeSolver::primal ? "primal" : "dual"; }

template <typename T, typename F>
std::string join(const std::vector<T>& values, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format(values[i]);
  }
  return out;
}

std::string fmt_opt(double v) { return std::isnan(v) ? std::string() : io::format_double(v); }

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

spatial::SplitAssignment make_split(Scheme scheme, const spatial::Coordinates& coords,
                                    std::array<double, 3> fractions, int clusters, std::uint64_t seed) {
  if (scheme == Scheme::ordinary) {
    return spatial::ordinary_split(static_cast<std::size_t>(coords.rows()), fractions, seed);
  }
  return spatial::kmeans_split(coords, clusters, seed);
}

std::string cell_keys(const Cell& c, bool simulated) {
  if (!simulated) return fmt::format("data,{},{},", c.p, c.k);
  return fmt::format("{},{},{},{}", c.model, c.p, c.k, io::format_double(c.rho));
}

}  // namespace

std::string_view to_string(Scheme s) { return s == Scheme::ordinary ? "ordinary" : "kmeans"; }

Scheme parse_scheme(std::string_view tag) {
  if (tag == "ordinary") return Scheme::ordinary;
  if (tag == "kmeans") return Scheme::kmeans;
  throw UsageError(fmt::format("unknown split scheme '{}' (expected ordinary or kmeans)", tag));
}

RunManifest load_manifest(const fs::path& file) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(file.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw DataError(fmt::format("cannot read manifest {}: {}", file.string(), e.what()));
  }
  RunManifest m;
  for (const auto& [key, node] : tree) {
    if (!node.empty()) throw UsageError(fmt::format("manifest: sections are not supported ('{}')", key));
    const std::string value = node.data();
    if (key == "experiment") m.experiment = value;
    else if (key == "data") m.data_dir = fs::path(value);
    else if (key == "model") m.models = parse_list<int>(key, value);
    else if (key == "n") m.n = parse_value<Eigen::Index>(key, value);
    else if (key == "p") m.ps = parse_list<Eigen::Index>(key, value);
    else if (key == "rho") m.rhos = parse_list<double>(key, value);
    else if (key == "k") m.ks = parse_list<int>(key, value);
    else if (key == "grid_side") m.grid_side = parse_value<int>(key, value);
    else if (key == "m") m.m = parse_value<Eigen::Index>(key, value);
    else if (key == "seed") m.seed = parse_value<std::uint64_t>(key, value);
    else if (key == "replicates") m.replicates = parse_value<int>(key, value);
    else if (key == "estimators") {
      m.estimators.clear();
      for (const auto& tag : split_list(value)) m.estimators.push_back(selection::parse_estimator(tag));
    } else if (key == "schemes") {
      m.schemes.clear();
      for (const auto& tag : split_list(value)) m.schemes.push_back(parse_scheme(tag));
    } else if (key == "fractions") {
      const auto f = parse_list<double>(key, value);
      if (f.size() != 3) throw UsageError("manifest key 'fractions' needs three values");
      m.fractions = {f[0], f[1], f[2]};
    } else if (key == "kmeans_clusters") m.kmeans_clusters = parse_value<int>(key, value);
    else if (key == "d_max") m.grid.d_max = parse_value<std::size_t>(key, value);
    else if (key == "lambda_grid") m.grid.lambda_grid = parse_list<double>(key, value);
    else if (key == "j_max") m.grid.j_max = parse_value<Eigen::Index>(key, value);
    else if (key == "inertia_cap") m.grid.inertia_cap = parse_value<double>(key, value);
    else if (key == "coefficient_cap") m.grid.coefficient_cap = parse_value<std::size_t>(key, value);
    else if (key == "ridge_solver") m.ridge_solver = parse_solver(value);
    else if (key == "out") m.out = fs::path(value);
    else throw UsageError(fmt::format("manifest: unknown key '{}'", key));
  }
  return m;
}

std::string dump_manifest(const RunManifest& m) {
  auto num = [](auto v) { return fmt::format("{}", v); };
  std::string out;
  out += fmt::format("experiment = {}\n", m.experiment);
  if (m.data_dir) out += fmt::format("data = {}\n", m.data_dir->string());
  out += fmt::format("model = {}\n", join(m.models, num));
  out += fmt::format("n = {}\n", m.n);
  out += fmt::format("p = {}\n", join(m.ps, num));
  out += fmt::format("rho = {}\n", join(m.rhos, num));
  out += fmt::format("k = {}\n", join(m.ks, num));
  out += fmt::format("grid_side = {}\nm = {}\nseed = {}\nreplicates = {}\n", m.grid_side, m.m, m.seed, m.replicates);
  out += fmt::format("estimators = {}\n", join(m.estimators, [](auto e) { return std::string(selection::to_string(e)); }));
  out += fmt::format("schemes = {}\n", join(m.schemes, [](auto s) { return std::string(to_string(s)); }));
  out += fmt::format("fractions = {}, {}, {}\n", m.fractions[0], m.fractions[1], m.fractions[2]);
  out += fmt::format("kmeans_clusters = {}\n", m.kmeans_clusters);
  out += fmt::format("d_max = {}\n", m.grid.d_max);
  out += fmt::format("lambda_grid = {}\n", join(m.grid.lambda_grid, num));
  out += fmt::format("j_max = {}\ninertia_cap = {}\ncoefficient_cap = {}\n", m.grid.j_max, m.grid.inertia_cap,
                     m.grid.coefficient_cap);
  out += fmt::format("ridge_solver = {}\n", to_string(m.ridge_solver));
  out += fmt::format("out = {}\n", m.out.string());
  return out;
}

void validate(const RunManifest& m) {
  if (m.replicates < 1) throw UsageError("replicates must be at least 1");
  if (m.estimators.empty()) throw UsageError("no estimators listed");
  if (m.schemes.empty()) throw UsageError("no split schemes listed");
  if (m.data_dir && !fs::is_directory(*m.data_dir)) {
    throw DataError(fmt::format("data directory {} does not exist", m.data_dir->string()));
  }
  if (m.kmeans_clusters < 3) throw UsageError("kmeans_clusters must be at least 3");
  if (!m.data_dir) {
    for (int model : m.models) {
      for (Eigen::Index p : m.ps) {
        for (int k : m.ks) {
          for (double rho : m.rhos) {
            sim::SimConfig c{model, m.n, p, rho, k, m.grid_side, m.m, 0};
            try {
              sim::validate(c);
            } catch (const std::invalid_argument& e) {
              throw UsageError(e.what());
            }
          }
        }
      }
    }
  }
  try {
    selection::validate(m.grid, 2);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

RunManifest full_scale(RunManifest m) {
  m.models = {1, 2};
  m.n = 200;
  m.ps = {2, 6, 10};
  m.ks = {4, 8};
  m.rhos = {0.0, 0.2, 0.4, 0.6, 0.8};
  m.grid_side = 60;
  m.m = 101;
  m.replicates = 200;
  m.estimators = {selection::Estimator::pca_projssar, selection::Estimator::naive_penssar,
                  selection::Estimator::pls_projssar};
  m.schemes = {Scheme::ordinary, Scheme::kmeans};
  return m;
}

std::uint64_t replicate_seed(std::uint64_t master, int replicate) {
  return derive_seed(master, Stream::replicate, static_cast<std::uint64_t>(replicate));
}

std::uint64_t split_seed(std::uint64_t master, int replicate) {
  return derive_seed(master, Stream::split, static_cast<std::uint64_t>(replicate));
}

std::vector<Cell> cells(const RunManifest& m) {
  std::vector<Cell> out;
  if (m.data_dir) {
    out.push_back(Cell{0, 0, m.ks.front(), std::numeric_limits<double>::quiet_NaN()});
    return out;
  }
  for (int model : m.models) {
    for (Eigen::Index p : m.ps) {
      for (int k : m.ks) {
        for (double rho : m.rhos) out.push_back(Cell{model, p, k, rho});
      }
    }
  }
  return out;
}

std::vector<fs::path> cmd_simulate(const RunManifest& m) {
  if (m.data_dir) throw UsageError("simulate: the manifest names a data directory, nothing to simulate");
  validate(m);
  std::vector<fs::path> dirs;
  for (const Cell& c : cells(m)) {
    for (int r = 0; r < m.replicates; ++r) {
      sim::SimConfig config{c.model, m.n, c.p, c.rho, c.k, m.grid_side, m.m, replicate_seed(m.seed, r)};
      const sim::Dataset data = sim::simulate(config);
      const fs::path dir =
          m.out / fmt::format("m{}_p{}_k{}_rho{}_r{:03}", c.model, c.p, c.k, io::format_double(c.rho), r);
      io::write_dataset(dir, data, {{"master_seed", m.seed}, {"replicate", r}, {"experiment", m.experiment}});
      dirs.push_back(dir);
    }
  }
  return dirs;
}

selection::Selection cmd_fit(const FitRequest& req) {
  const io::DataDir data = io::read_dataset(req.data_dir);
  const spatial::WeightMatrix w = data.w ? *data.w : spatial::knn_weights(data.coords, req.k);
  const auto split = make_split(req.scheme, data.coords, req.fractions, req.kmeans_clusters, req.seed);
  const selection::Problem problem = selection::make_problem(data.paths, data.y, w, req.grid);
  selection::Selection sel =
      selection::select_and_fit(req.estimator, problem, split, req.grid, {req.ridge_solver});

  fs::create_directories(req.out);
  nlohmann::json j = io::to_json(sel.fit);
  j["context"] = {{"data", req.data_dir.string()},
                  {"k", req.k},
                  {"scheme", std::string(to_string(req.scheme))},
                  {"seed", req.seed},
                  {"augmentation", {{"basepoint", true}, {"time", true}}}};
  io::write_json(req.out / "fit.json", j);
  io::write_report(req.out / "selection.csv", sel.report);
  io::write_split(req.out / "split.csv", split);
  return sel;
}

std::optional<double> cmd_predict(const PredictRequest& req) {
  const io::DataDir data = io::read_dataset(req.data_dir);
  const nlohmann::json j = io::read_json(req.fit_file);
  const est::Fit fit = io::fit_from_json(j);
  int k = req.k.value_or(4);
  if (!req.k && j.contains("context") && j["context"].contains("k")) k = j["context"]["k"].get<int>();
  const spatial::WeightMatrix w = data.w ? *data.w : spatial::knn_weights(data.coords, k);
  const Eigen::MatrixXd xi = sig::build_design_matrix(data.paths, est::order(fit));
  const Eigen::VectorXd y_hat = est::predict(fit, w, xi);

  std::string out = "site,y_hat\n";
  for (Eigen::Index i = 0; i < y_hat.size(); ++i) out += fmt::format("{},{}\n", i, io::format_double(y_hat[i]));
  if (req.out.has_parent_path()) fs::create_directories(req.out.parent_path());
  io::write_text(req.out, out);

  if (!req.split_file) return std::nullopt;
  const auto split = io::read_split(*req.split_file);
  if (static_cast<Eigen::Index>(split.labels.size()) != y_hat.size()) {
    throw DataError(fmt::format("split file covers {} sites, data has {}", split.labels.size(), y_hat.size()));
  }
  const auto test = split.indices(spatial::Label::test);
  if (test.empty()) throw DataError("split file has no test sites");
  return selection::rmse(y_hat(test), data.y(test));
}

std::vector<ResultRow> run_benchmark(const RunManifest& m, const Progress& progress) {
  validate(m);
  std::optional<io::DataDir> user_data;
  if (m.data_dir) user_data = io::read_dataset(*m.data_dir);

  std::vector<ResultRow> rows;
  for (const Cell& cell : cells(m)) {
    for (int r = 0; r < m.replicates; ++r) {
      std::optional<selection::Problem> problem;
      spatial::Coordinates coords;
      Cell row_cell = cell;
      std::string data_error;
      try {
        if (user_data) {
          coords = user_data->coords;
          row_cell.p = user_data->paths.front().dim();
          spatial::WeightMatrix w = user_data->w ? *user_data->w : spatial::knn_weights(coords, cell.k);
          problem = selection::make_problem(user_data->paths, user_data->y, std::move(w), m.grid);
        } else {
          sim::SimConfig config{cell.model, m.n, cell.p, cell.rho, cell.k, m.grid_side, m.m,
                                replicate_seed(m.seed, r)};
          sim::Dataset data = sim::simulate(config);
          coords = data.coords;
          problem = selection::make_problem(data.paths, std::move(data.y), std::move(data.w), m.grid);
        }
      } catch (const std::exception& e) {
        data_error = e.what();
      }

      for (Scheme scheme : m.schemes) {
        std::optional<spatial::SplitAssignment> split;
        std::string split_error = data_error;
        if (problem) {
          try {
            split = make_split(scheme, coords, m.fractions, m.kmeans_clusters, split_seed(m.seed, r));
          } catch (const std::exception& e) {
            split_error = e.what();
          }
        }
        for (selection::Estimator estimator : m.estimators) {
          ResultRow row;
          row.cell = row_cell;
          row.replicate = r;
          row.scheme = scheme;
          row.estimator = estimator;
          if (!split) {
            row.error = split_error;
          } else {
            try {
              const auto fit_start = Clock::now();
              selection::Selection sel =
                  selection::select_and_fit(estimator, *problem, *split, m.grid, {m.ridge_solver});
              row.fit_seconds = seconds_since(fit_start);
              const auto predict_start = Clock::now();
              const Eigen::VectorXd pred = selection::predict_test(sel.fit, *problem, *split);
              row.predict_seconds = seconds_since(predict_start);
              const Eigen::VectorXd truth = problem->y(split->indices(spatial::Label::test));
              row.test_rmse = selection::rmse(pred, truth);
              const auto& best = sel.report.best();
              row.order = best.order;
              row.lambda = best.lambda;
              row.n_scores = best.n_scores;
              row.validation_rmse = best.validation_rmse;
              row.rho_hat = est::rho_hat(sel.fit);
            } catch (const std::exception& e) {
              row.error = e.what();
            }
          }
          if (progress) progress(row);
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

void write_results(const fs::path& dir, const std::vector<ResultRow>& rows) {
  fs::create_directories(dir);
  std::string results =
      "model,p,k,rho,replicate,scheme,estimator,status,order,lambda,n_scores,rho_hat,validation_rmse,test_rmse,"
      "error\n";
  std::string timings = "model,p,k,rho,replicate,scheme,estimator,fit_seconds,predict_seconds\n";
  for (const auto& row : rows) {
    const bool simulated = row.cell.model != 0;
    const std::string keys = fmt::format("{},{},{},{}", cell_keys(row.cell, simulated), row.replicate,
                                         to_string(row.scheme), selection::to_string(row.estimator));
    results += fmt::format("{},{},{},{},{},{},{},{},{}\n", keys, row.ok() ? "ok" : "error",
                           row.ok() ? std::to_string(row.order) : std::string(), fmt_opt(row.lambda),
                           row.n_scores > 0 ? std::to_string(row.n_scores) : std::string(), fmt_opt(row.rho_hat),
                           fmt_opt(row.validation_rmse), fmt_opt(row.test_rmse), sanitize(row.error));
    timings += fmt::format("{},{},{}\n", keys, io::format_double(row.fit_seconds),
                           io::format_double(row.predict_seconds));
  }
  io::write_text(dir / "results.csv", results);
  io::write_text(dir / "timings.csv", timings);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return (1.0 - frac) * values[lo] + frac * values[hi];
}

void cmd_report(const fs::path& dir) {
  const io::Table results = io::read_csv(dir / "results.csv", true);
  const io::Table timings = io::read_csv(dir / "timings.csv", true);
  if (results.rows.size() != timings.rows.size()) {
    throw DataError(fmt::format("results.csv has {} rows but timings.csv has {}", results.rows.size(),
                                timings.rows.size()));
  }
  const std::vector<std::string> key_cols{"model", "p", "k", "rho", "scheme", "estimator"};
  std::vector<std::size_t> key_idx;
  for (const auto& c : key_cols) key_idx.push_back(results.column(c));
  const std::size_t status = results.column("status");
  const std::size_t rmse_col = results.column("test_rmse");
  const std::size_t fit_col = timings.column("fit_seconds");

  struct Group {
    std::vector<double> rmse, seconds;
    int errors = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  for (std::size_t r = 0; r < results.rows.size(); ++r) {
    const auto& row = results.rows[r];
    std::string key;
    for (std::size_t i = 0; i < key_idx.size(); ++i) key += (i ? "," : "") + row.at(key_idx[i]);
    if (!groups.count(key)) order.push_back(key);
    Group& g = groups[key];
    if (row.at(status) != "ok") {
      ++g.errors;
      continue;
    }
    g.rmse.push_back(io::parse_double(row.at(rmse_col), dir / "results.csv"));
    g.seconds.push_back(io::parse_double(timings.rows[r].at(fit_col), dir / "timings.csv"));
  }
  std::string out =
      "model,p,k,rho,scheme,estimator,n_ok,n_error,rmse_median,rmse_q1,rmse_q3,seconds_median,seconds_q1,"
      "seconds_q3\n";
  for (const auto& key : order) {
    const Group& g = groups[key];
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", key, g.rmse.size(), g.errors,
                       fmt_opt(quantile(g.rmse, 0.5)), fmt_opt(quantile(g.rmse, 0.25)),
                       fmt_opt(quantile(g.rmse, 0.75)), fmt_opt(quantile(g.seconds, 0.5)),
                       fmt_opt(quantile(g.seconds, 0.25)), fmt_opt(quantile(g.seconds, 0.75)));
  }
  io::write_text(dir / "summary.csv", out);
}

std::vector<ResultRow> cmd_benchmark(const RunManifest& m) {
  auto rows = run_benchmark(m, [](const ResultRow& row) {
    std::cerr << fmt::format("[{} r{} {} {}] {}\n", row.cell.p, row.replicate, to_string(row.scheme),
                             selection::to_string(row.estimator),
                             row.ok() ? fmt::format("test RMSE {:.4f}, fit {:.2f}s", row.test_rmse, row.fit_seconds)
                                      : "error: " + row.error);
  });
  write_results(m.out, rows);
  io::write_text(m.out / "manifest.ini", dump_manifest(m));
  cmd_report(m.out);
  return rows;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Signature-based spatial autoregressive regression for functional covariates"};
  app.require_subcommand(1);

  // Options shared by several subcommands; CLI11 stores into these.
  std::string manifest_path, estimator_tag, scheme_tag, solver_tag;
  std::optional<int> k_opt;
  std::optional<Eigen::Index> p_opt;
  std::optional<double> rho_opt;
  std::optional<std::uint64_t> seed_opt;
  std::optional<int> replicates_opt;
  std::string out_path;
  std::string data_dir, fit_file, split_file;
  bool full = false;

  auto add_matrix_flags = [&](CLI::App* sub) {
    sub->add_option("--manifest", manifest_path, "Run manifest (key = value file)");
    sub->add_option("--k", k_opt, "Nearest neighbors in the weight matrix");
    sub->add_option("--p", p_opt, "Path dimension");
    sub->add_option("--rho", rho_opt, "Spatial autoregressive parameter");
    sub->add_option("--seed", seed_opt, "Master seed");
    sub->add_option("--replicates", replicates_opt, "Replicate count");
    sub->add_option("--out", out_path, "Output directory");
  };

  auto* simulate = app.add_subcommand("simulate", "Write simulated dataset directories");
  add_matrix_flags(simulate);

  auto* fit = app.add_subcommand("fit", "Select hyperparameters on a validation set and fit");
  fit->add_option("--data", data_dir, "Dataset directory")->required();
  fit->add_option("--estimator", estimator_tag, "naive-penssar | pls-projssar | pca-projssar")->required();
  fit->add_option("--split", scheme_tag, "ordinary | kmeans")->default_str("ordinary");
  fit->add_option("--seed", seed_opt, "Split seed");
  fit->add_option("--k", k_opt, "Nearest neighbors when the dataset has no weights.csv");
  fit->add_option("--manifest", manifest_path, "Manifest providing the hyperparameter grid");
  fit->add_option("--ridge-solver", solver_tag, "primal | dual");
  fit->add_option("--out", out_path, "Output directory")->default_str("fit");

  auto* predict = app.add_subcommand("predict", "Predict every site from a fit file");
  predict->add_option("--data", data_dir, "Dataset directory")->required();
  predict->add_option("--fit", fit_file, "fit.json written by `fit`")->required();
  predict->add_option("--split-file", split_file, "split.csv; prints the test RMSE");
  predict->add_option("--k", k_opt, "Nearest neighbors when the dataset has no weights.csv");
  predict->add_option("--out", out_path, "Predictions CSV")->default_str("predictions.csv");

  auto* bench = app.add_subcommand("benchmark", "Run the estimator x replicate x split matrix");
  add_matrix_flags(bench);
  bench->add_option("--estimator", estimator_tag, "Restrict to one estimator");
  bench->add_option("--split", scheme_tag, "Restrict to one split scheme");
  bench->add_option("--ridge-solver", solver_tag, "primal | dual");
  bench->add_flag("--full-scale", full, "Full simulation matrix with 200 replicates");

  auto* report = app.add_subcommand("report", "Recompute summary.csv from results.csv and timings.csv");
  report->add_option("--out", out_path, "Benchmark output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    auto manifest_from_flags = [&] {
      RunManifest m = manifest_path.empty() ? RunManifest{} : load_manifest(manifest_path);
      if (full) m = full_scale(std::move(m));
      if (k_opt) m.ks = {*k_opt};
      if (p_opt) m.ps = {*p_opt};
      if (rho_opt) m.rhos = {*rho_opt};
      if (seed_opt) m.seed = *seed_opt;
      if (replicates_opt) m.replicates = *replicates_opt;
      if (!out_path.empty()) m.out = out_path;
      if (!estimator_tag.empty()) m.estimators = {selection::parse_estimator(estimator_tag)};
      if (!scheme_tag.empty()) m.schemes = {parse_scheme(scheme_tag)};
      if (!solver_tag.empty()) m.ridge_solver = parse_solver(solver_tag);
      return m;
    };

    if (*simulate) {
      const auto dirs = cmd_simulate(manifest_from_flags());
      for (const auto& d : dirs) std::cout << d.string() << "\n";
    } else if (*fit) {
      FitRequest req;
      req.estimator = selection::parse_estimator(estimator_tag);
      req.scheme = parse_scheme(scheme_tag.empty() ? "ordinary" : scheme_tag);
      if (!manifest_path.empty()) {
        const RunManifest m = load_manifest(manifest_path);
        req.grid = m.grid;
        req.fractions = m.fractions;
        req.kmeans_clusters = m.kmeans_clusters;
        req.ridge_solver = m.ridge_solver;
        req.seed = m.seed;
        req.k = m.ks.front();
      }
      if (!solver_tag.empty()) req.ridge_solver = parse_solver(solver_tag);
      if (seed_opt) req.seed = *seed_opt;
      if (k_opt) req.k = *k_opt;
      req.data_dir = data_dir;
      req.out = out_path.empty() ? fs::path("fit") : fs::path(out_path);
      const auto sel = cmd_fit(req);
      const auto& best = sel.report.best();
      std::cout << fmt::format("{}: D = {}{}, validation RMSE {:.6g}, rho_hat {:.6g}\n",
                               selection::to_string(req.estimator), best.order,
                               std::isnan(best.lambda) ? fmt::format(", J = {}", best.n_scores)
                                                       : fmt::format(", lambda = {}", best.lambda),
                               best.validation_rmse, est::rho_hat(sel.fit));
    } else if (*predict) {
      PredictRequest req;
      req.data_dir = data_dir;
      req.fit_file = fit_file;
      if (!split_file.empty()) req.split_file = fs::path(split_file);
      req.k = k_opt;
      req.out = out_path.empty() ? fs::path("predictions.csv") : fs::path(out_path);
      if (const auto test_rmse = cmd_predict(req)) std::cout << fmt::format("test RMSE {:.6g}\n", *test_rmse);
    } else if (*bench) {
      cmd_benchmark(manifest_from_flags());
    } else if (*report) {
      cmd_report(out_path);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace sigssar::cli
