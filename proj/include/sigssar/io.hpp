#pragma once

// File formats.
//
// Dataset directory:
//   coords.csv   x,y                                   (one row per site)
//   weights.csv  row,col,value                         (nonzero triplets, optional)
//   paths.csv    site,time_index,time,coordinate,value (long form; time defaults to time_index)
//   y.csv        site,y
//   meta.json    generating configuration and seed
// Site, time and coordinate indices are 0-based.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "sigssar/estimators.hpp"
#include "sigssar/selection.hpp"
#include "sigssar/sigcore.hpp"
#include "sigssar/simgen.hpp"
#include "sigssar/spatial.hpp"

namespace sigssar::io {

namespace fs = std::filesystem;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; throws DataError if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

/// Comma-separated, no quoting. When `header` is nullopt the first row is a
/// header iff it contains a non-numeric field.
Table read_csv(const fs::path& file, std::optional<bool> header = std::nullopt);

/// Shortest representation that round-trips exactly.
std::string format_double(double v);
double parse_double(const std::string& s, const fs::path& file);

spatial::Coordinates read_coordinates(const fs::path& file);
void write_coordinates(const fs::path& file, const spatial::Coordinates& coords);

spatial::WeightMatrix read_weights(const fs::path& file, Eigen::Index n);
void write_weights(const fs::path& file, const spatial::WeightMatrix& w);

std::vector<sig::Path> read_paths(const fs::path& file);
void write_paths(const fs::path& file, const std::vector<sig::Path>& paths);

Eigen::VectorXd read_response(const fs::path& file);
void write_response(const fs::path& file, const Eigen::VectorXd& y);

struct DataDir {
  spatial::Coordinates coords;
  std::optional<spatial::WeightMatrix> w;
  std::vector<sig::Path> paths;
  Eigen::VectorXd y;
  nlohmann::json meta;
};

/// Reads a dataset directory and checks that every file agrees on the site
/// count (DataError naming both counts otherwise).
DataDir read_dataset(const fs::path& dir);
void write_dataset(const fs::path& dir, const sim::Dataset& data, const nlohmann::json& extra_meta = {});

void write_split(const fs::path& file, const spatial::SplitAssignment& split);
spatial::SplitAssignment read_split(const fs::path& file);

/// One row per grid point: estimator,order,lambda,n_scores,validation_rmse,seconds,chosen,error
void write_report(const fs::path& file, const selection::SelectionReport& report);

nlohmann::json to_json(const est::Fit& fit);
est::Fit fit_from_json(const nlohmann::json& j);
std::string estimator_tag(const est::Fit& fit);

void write_json(const fs::path& file, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& file);

/// Writes the file through a stream, throwing std::runtime_error on failure.
void write_text(const fs::path& file, const std::string& contents);

}  // namespace sigssar::io
