#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "oracles/oracles.hpp"
#include "sigssar/cli.hpp"
#include "sigssar/error.hpp"
#include "sigssar/io.hpp"

using namespace sigssar;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sigssar_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Runs the executable; returns its exit status, stderr captured to `err`.
int run_binary(const std::string& args, const fs::path& err) {
  const std::string cmd = std::string(SIGSSAR_BIN) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

cli::RunManifest small_manifest(const fs::path& out) {
  cli::RunManifest m;
  m.n = 40;
  m.grid_side = 12;
  m.m = 21;
  m.replicates = 3;
  m.grid.d_max = 2;
  m.grid.j_max = 4;
  m.grid.lambda_grid = {0.01, 1.0};
  m.kmeans_clusters = 4;
  m.out = out;
  return m;
}

}  // namespace

TEST_CASE("manifest parsing") {
  const fs::path dir = scratch("manifest");
  io::write_text(dir / "run.ini",
                 "# comment\n"
                 "experiment = demo\n"
                 "p = 2, 6\n"
                 "rho = 0, 0.4\n"
                 "estimators = pls-projssar, pca-projssar\n"
                 "schemes = kmeans\n"
                 "lambda_grid = 0.1, 1\n"
                 "replicates = 4\n"
                 "ridge_solver = dual\n");
  const cli::RunManifest m = cli::load_manifest(dir / "run.ini");
  CHECK(m.experiment == "demo");
  CHECK(m.ps == std::vector<Eigen::Index>{2, 6});
  CHECK(m.rhos == std::vector<double>{0.0, 0.4});
  CHECK(m.estimators.size() == 2);
  CHECK(m.schemes == std::vector<cli::Scheme>{cli::Scheme::kmeans});
  CHECK(m.grid.lambda_grid == std::vector<double>{0.1, 1.0});
  CHECK(m.replicates == 4);
  CHECK(m.ridge_solver == est::RidgeSolver::dual);
  CHECK(cli::cells(m).size() == 4);

  io::write_text(dir / "dump.ini", cli::dump_manifest(m));
  const cli::RunManifest back = cli::load_manifest(dir / "dump.ini");
  CHECK(cli::dump_manifest(back) == cli::dump_manifest(m));

  io::write_text(dir / "bad.ini", "colour = blue\n");
  CHECK_THROWS_AS(cli::load_manifest(dir / "bad.ini"), UsageError);
  io::write_text(dir / "bad2.ini", "n = many\n");
  CHECK_THROWS_AS(cli::load_manifest(dir / "bad2.ini"), UsageError);
  io::write_text(dir / "bad3.ini", "estimators = lasso\n");
  CHECK_THROWS_AS(cli::load_manifest(dir / "bad3.ini"), UsageError);

  cli::RunManifest zero;
  zero.replicates = 0;
  CHECK_THROWS_AS(cli::validate(zero), UsageError);
  cli::RunManifest missing;
  missing.data_dir = dir / "nowhere";
  CHECK_THROWS(cli::validate(missing));
}

TEST_CASE("full-scale matrix") {
  const cli::RunManifest m = cli::full_scale(cli::RunManifest{});
  CHECK(m.replicates == 200);
  CHECK(cli::cells(m).size() == 2 * 3 * 2 * 5);
  CHECK(m.estimators.size() == 3);
}

TEST_CASE("simulate") {
  const fs::path dir = scratch("simulate");
  cli::RunManifest m = small_manifest(dir / "one");
  m.replicates = 1;
  const auto one = cli::cmd_simulate(m);
  REQUIRE(one.size() == 1);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(one[0])) ++files;
  CHECK(files == 5);

  m.out = dir / "two";
  const auto again = cli::cmd_simulate(m);
  for (const char* f : {"coords.csv", "weights.csv", "paths.csv", "y.csv", "meta.json"}) {
    CHECK(slurp(one[0] / f) == slurp(again[0] / f));
  }

  m.replicates = 3;
  m.out = dir / "three";
  const auto three = cli::cmd_simulate(m);
  REQUIRE(three.size() == 3);
  std::set<std::uint64_t> seeds;
  for (int r = 0; r < 3; ++r) {
    const auto meta = io::read_json(three[static_cast<std::size_t>(r)] / "meta.json");
    const auto seed = meta.at("seed").get<std::uint64_t>();
    CHECK(seed == cli::replicate_seed(m.seed, r));
    seeds.insert(seed);
  }
  CHECK(seeds.size() == 3);
}

TEST_CASE("fit and predict through the executable") {
  const fs::path dir = scratch("fit");
  cli::RunManifest m = small_manifest(dir / "data");
  m.replicates = 1;
  const fs::path data = cli::cmd_simulate(m).at(0);
  io::write_text(dir / "grid.ini", "d_max = 2\nj_max = 4\n");

  const fs::path err = dir / "stderr.txt";
  CHECK(run_binary("fit --data " + data.string() + " --estimator pls-projssar --manifest " +
                       (dir / "grid.ini").string() + " --out " + (dir / "out").string(),
                   err) == cli::kExitOk);
  CHECK(fs::exists(dir / "out" / "fit.json"));
  CHECK(fs::exists(dir / "out" / "selection.csv"));
  CHECK(fs::exists(dir / "out" / "split.csv"));

  CHECK(run_binary("predict --data " + data.string() + " --fit " + (dir / "out" / "fit.json").string() +
                       " --split-file " + (dir / "out" / "split.csv").string() + " --out " +
                       (dir / "pred.csv").string(),
                   err) == cli::kExitOk);
  const io::Table pred = io::read_csv(dir / "pred.csv", true);
  CHECK(pred.rows.size() == 40);

  CHECK(run_binary("fit --data " + data.string() + " --estimator lasso", err) == cli::kExitUsage);
  CHECK(run_binary("fit --data " + data.string(), err) == cli::kExitUsage);
  CHECK(run_binary("frobnicate", err) == cli::kExitUsage);

  // Break the dataset: fewer responses than sites.
  const io::DataDir d = io::read_dataset(data);
  io::write_response(data / "y.csv", d.y.head(35));
  CHECK(run_binary("fit --data " + data.string() + " --estimator pls-projssar", err) == cli::kExitFailure);
  const std::string msg = slurp(err);
  CHECK(msg.find("40") != std::string::npos);
  CHECK(msg.find("35") != std::string::npos);
}

TEST_CASE("benchmark rows, error tagging and summary") {
  const fs::path dir = scratch("bench");
  cli::RunManifest m = small_manifest(dir / "out");
  m.estimators = {selection::Estimator::pls_projssar, selection::Estimator::naive_penssar};
  const auto rows = cli::cmd_benchmark(m);
  CHECK(rows.size() == 12);
  const io::Table results = io::read_csv(m.out / "results.csv", true);
  CHECK(results.rows.size() == 12);
  const io::Table timings = io::read_csv(m.out / "timings.csv", true);
  CHECK(timings.rows.size() == 12);
  for (const auto& row : rows) {
    CHECK(row.ok());
    CHECK(row.test_rmse >= 0.0);
    CHECK(row.fit_seconds >= 0.0);
    CHECK(row.predict_seconds >= 0.0);
  }

  // Independent recomputation of the summary statistics.
  std::map<std::string, std::vector<double>> rmse, secs;
  for (std::size_t r = 0; r < results.rows.size(); ++r) {
    const auto& row = results.rows[r];
    const std::string key = row[results.column("scheme")] + "/" + row[results.column("estimator")];
    rmse[key].push_back(std::stod(row[results.column("test_rmse")]));
    secs[key].push_back(std::stod(timings.rows[r][timings.column("fit_seconds")]));
  }
  const io::Table summary = io::read_csv(m.out / "summary.csv", true);
  CHECK(summary.rows.size() == 4);
  for (const auto& row : summary.rows) {
    const std::string key = row[summary.column("scheme")] + "/" + row[summary.column("estimator")];
    CHECK(row[summary.column("n_ok")] == "3");
    CHECK(row[summary.column("rmse_median")] == io::format_double(oracle::median(rmse[key])));
    CHECK(row[summary.column("rmse_q1")] == io::format_double(oracle::percentile(rmse[key], 0.25)));
    CHECK(row[summary.column("rmse_q3")] == io::format_double(oracle::percentile(rmse[key], 0.75)));
    CHECK(row[summary.column("seconds_median")] == io::format_double(oracle::median(secs[key])));
  }

  // report recomputes the same file.
  const std::string before = slurp(m.out / "summary.csv");
  fs::remove(m.out / "summary.csv");
  cli::cmd_report(m.out);
  CHECK(slurp(m.out / "summary.csv") == before);

  // A failing cell becomes error rows and the run continues.
  cli::RunManifest failing = small_manifest(dir / "failing");
  failing.replicates = 1;
  failing.estimators = {selection::Estimator::pls_projssar};
  failing.kmeans_clusters = 100;
  const auto mixed = cli::run_benchmark(failing);
  REQUIRE(mixed.size() == 2);
  CHECK(mixed[0].ok());
  CHECK_FALSE(mixed[1].ok());
  cli::write_results(failing.out, mixed);
  const io::Table t = io::read_csv(failing.out / "results.csv", true);
  CHECK(t.rows[1][t.column("status")] == "error");
  CHECK_FALSE(t.rows[1][t.column("error")].empty());
}

TEST_CASE("quantiles") {
  std::mt19937_64 gen(3);
  for (int n : {1, 2, 3, 7, 20}) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(std::uniform_real_distribution<double>(0, 10)(gen));
    CHECK(cli::quantile(v, 0.5) == oracle::median(v));
    for (double q : {0.0, 0.25, 0.75, 1.0}) CHECK(cli::quantile(v, q) == oracle::percentile(v, q));
  }
  CHECK(std::isnan(cli::quantile({}, 0.5)));
}

TEST_CASE("seed derivation") {
  CHECK(cli::replicate_seed(1, 0) != cli::replicate_seed(1, 1));
  CHECK(cli::replicate_seed(1, 0) != cli::replicate_seed(2, 0));
  CHECK(cli::replicate_seed(1, 0) != cli::split_seed(1, 0));
  CHECK(cli::replicate_seed(7, 3) == cli::replicate_seed(7, 3));
}
