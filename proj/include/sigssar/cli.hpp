#pragma once

// Experiment driver behind the `sigssar` executable.
//
// Exit statuses: 0 success, 1 runtime or data failure, 2 usage error.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sigssar/estimators.hpp"
#include "sigssar/selection.hpp"

namespace sigssar::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

enum class Scheme { ordinary, kmeans };

std::string_view to_string(Scheme s);
/// Throws UsageError for anything but "ordinary" / "kmeans".
Scheme parse_scheme(std::string_view tag);

/// A simulation or real-data experiment. Loaded from a flat `key = value`
/// file; list-valued keys take comma-separated values.
struct RunManifest {
  std::string experiment = "experiment";
  std::optional<fs::path> data_dir;  // user data instead of simulation
  std::vector<int> models{1};
  Eigen::Index n = 200;
  std::vector<Eigen::Index> ps{2};
  std::vector<double> rhos{0.4};
  std::vector<int> ks{4};
  int grid_side = 60;
  Eigen::Index m = 101;
  std::uint64_t seed = 1;
  int replicates = 20;
  std::vector<selection::Estimator> estimators{selection::Estimator::pls_projssar,
                                               selection::Estimator::naive_penssar};
  std::vector<Scheme> schemes{Scheme::ordinary, Scheme::kmeans};
  std::array<double, 3> fractions{0.5, 0.25, 0.25};
  int kmeans_clusters = 6;
  selection::HyperGrid grid;
  est::RidgeSolver ridge_solver = est::RidgeSolver::primal;
  fs::path out = "out";
};

/// Throws UsageError on unknown keys or unparsable values, DataError if the
/// file cannot be read.
RunManifest load_manifest(const fs::path& file);
std::string dump_manifest(const RunManifest& manifest);
/// Throws UsageError on invalid combinations.
void validate(const RunManifest& manifest);

/// Full simulation matrix: 200 replicates, models 1-2, p in {2, 6, 10},
/// k in {4, 8}, rho in {0, 0.2, 0.4, 0.6, 0.8}, all estimators, both schemes.
RunManifest full_scale(RunManifest manifest);

/// One dataset cell (model, p, k, rho) of the benchmark matrix.
struct Cell {
  int model = 1;
  Eigen::Index p = 2;
  int k = 4;
  double rho = 0.0;
};

struct ResultRow {
  Cell cell;
  int replicate = 0;
  Scheme scheme = Scheme::ordinary;
  selection::Estimator estimator = selection::Estimator::pls_projssar;
  std::string error;  // empty on success
  std::size_t order = 0;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  Eigen::Index n_scores = 0;
  double rho_hat = std::numeric_limits<double>::quiet_NaN();
  double validation_rmse = std::numeric_limits<double>::quiet_NaN();
  double test_rmse = std::numeric_limits<double>::quiet_NaN();
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;

  bool ok() const { return error.empty(); }
};

/// Dataset seed of replicate r.
std::uint64_t replicate_seed(std::uint64_t master, int replicate);
/// Split seed of replicate r.
std::uint64_t split_seed(std::uint64_t master, int replicate);

std::vector<Cell> cells(const RunManifest& manifest);

/// Writes one dataset directory per (cell, replicate); returns them in order.
std::vector<fs::path> cmd_simulate(const RunManifest& manifest);

struct FitRequest {
  fs::path data_dir;
  selection::Estimator estimator = selection::Estimator::pls_projssar;
  Scheme scheme = Scheme::ordinary;
  std::uint64_t seed = 1;
  int k = 4;  // used when the dataset has no weights.csv
  std::array<double, 3> fractions{0.5, 0.25, 0.25};
  int kmeans_clusters = 6;
  selection::HyperGrid grid;
  est::RidgeSolver ridge_solver = est::RidgeSolver::primal;
  fs::path out = "fit";
};

/// Writes fit.json, selection.csv and split.csv into `out`.
selection::Selection cmd_fit(const FitRequest& request);

struct PredictRequest {
  fs::path data_dir;
  fs::path fit_file;
  std::optional<fs::path> split_file;
  std::optional<int> k;
  fs::path out = "predictions.csv";
};

/// Writes site,y_hat for every site. Returns the test RMSE when a split file
/// is given.
std::optional<double> cmd_predict(const PredictRequest& request);

using Progress = std::function<void(const ResultRow&)>;

/// Runs every (cell x replicate x scheme x estimator) combination. Failures
/// are recorded as rows with an error message.
std::vector<ResultRow> run_benchmark(const RunManifest& manifest, const Progress& progress = {});

/// results.csv holds everything but wall-clock times, which go to
/// timings.csv, so that results.csv is reproducible byte for byte.
void write_results(const fs::path& dir, const std::vector<ResultRow>& rows);

/// Median and interquartile range of test RMSE and fit seconds per
/// (cell, scheme, estimator), recomputed from results.csv and timings.csv.
void cmd_report(const fs::path& dir);

/// run_benchmark + write_results + cmd_report into manifest.out.
std::vector<ResultRow> cmd_benchmark(const RunManifest& manifest);

/// Type-7 sample quantile (linear interpolation between order statistics).
double quantile(std::vector<double> values, double q);

/// Parses arguments and dispatches; never throws.
int run(int argc, const char* const* argv);

}  // namespace sigssar::cli
