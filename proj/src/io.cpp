#include "sigssar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/error.hpp"

namespace sigssar::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_number(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end;
}

Eigen::Index parse_index(const std::string& s, const fs::path& file) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 0) {
    throw DataError(fmt::format("{}: '{}' is not a nonnegative integer", file.string(), s));
  }
  return static_cast<Eigen::Index>(v);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw DataError("fit file: matrix size mismatch");
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError(fmt::format("missing CSV column '{}'", name));
  return static_cast<std::size_t>(it - header.begin());
}

bool Table::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

Table read_csv(const fs::path& file, std::optional<bool> header) {
  std::ifstream in(file);
  if (!in) throw DataError(fmt::format("cannot open {}", file.string()));
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_line(line);
    if (first) {
      first = false;
      const bool is_header =
          header.value_or(std::any_of(fields.begin(), fields.end(), [](const auto& f) { return !is_number(f); }));
      if (is_header) {
        table.header = std::move(fields);
        continue;
      }
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::string format_double(double v) { return fmt::format("{}", v); }

double parse_double(const std::string& s, const fs::path& file) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError(fmt::format("{}: '{}' is not a number", file.string(), s));
  }
  return v;
}

void write_text(const fs::path& file, const std::string& contents) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", file.string()));
  out << contents;
  if (!out) throw std::runtime_error(fmt::format("failed writing {}", file.string()));
}

spatial::Coordinates read_coordinates(const fs::path& file) {
  const Table t = read_csv(file);
  std::size_t cx = 0, cy = 1;
  if (t.has_column("x") && t.has_column("y")) {
    cx = t.column("x");
    cy = t.column("y");
  }
  spatial::Coordinates coords(static_cast<Eigen::Index>(t.rows.size()), 2);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() <= std::max(cx, cy)) throw DataError(fmt::format("{}: short row {}", file.string(), r + 1));
    coords(static_cast<Eigen::Index>(r), 0) = parse_double(row[cx], file);
    coords(static_cast<Eigen::Index>(r), 1) = parse_double(row[cy], file);
  }
  if (!coords.allFinite()) throw DataError(fmt::format("{}: non-finite coordinate", file.string()));
  return coords;
}

void write_coordinates(const fs::path& file, const spatial::Coordinates& coords) {
  std::string out = "x,y\n";
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    out += fmt::format("{},{}\n", format_double(coords(i, 0)), format_double(coords(i, 1)));
  }
  write_text(file, out);
}

spatial::WeightMatrix read_weights(const fs::path& file, Eigen::Index n) {
  const Table t = read_csv(file, true);
  const std::size_t cr = t.column("row"), cc = t.column("col"), cv = t.column("value");
  spatial::WeightMatrix w{Eigen::MatrixXd::Zero(n, n)};
  for (const auto& row : t.rows) {
    const Eigen::Index i = parse_index(row.at(cr), file);
    const Eigen::Index j = parse_index(row.at(cc), file);
    if (i >= n || j >= n) {
      throw DataError(fmt::format("{}: entry ({}, {}) outside {} sites", file.string(), i, j, n));
    }
    w.entries(i, j) = parse_double(row.at(cv), file);
  }
  return w;
}

void write_weights(const fs::path& file, const spatial::WeightMatrix& w) {
  std::string out = "row,col,value\n";
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      if (w.entries(i, j) != 0.0) out += fmt::format("{},{},{}\n", i, j, format_double(w.entries(i, j)));
    }
  }
  write_text(file, out);
}

std::vector<sig::Path> read_paths(const fs::path& file) {
  const Table t = read_csv(file, true);
  const std::size_t cs = t.column("site"), ci = t.column("time_index"), cc = t.column("coordinate"),
                    cv = t.column("value");
  const bool has_time = t.has_column("time");
  const std::size_t ct = has_time ? t.column("time") : 0;

  struct Sample {
    double time;
    std::map<Eigen::Index, double> coords;
  };
  std::map<Eigen::Index, std::map<Eigen::Index, Sample>> sites;
  for (const auto& row : t.rows) {
    const Eigen::Index site = parse_index(row.at(cs), file);
    const Eigen::Index idx = parse_index(row.at(ci), file);
    Sample& s = sites[site][idx];
    s.time = has_time ? parse_double(row.at(ct), file) : static_cast<double>(idx);
    s.coords[parse_index(row.at(cc), file)] = parse_double(row.at(cv), file);
  }
  std::vector<sig::Path> paths;
  Eigen::Index expected_site = 0;
  Eigen::Index dim = -1;
  for (const auto& [site, samples] : sites) {
    if (site != expected_site) throw DataError(fmt::format("{}: site {} missing", file.string(), expected_site));
    ++expected_site;
    const auto m = static_cast<Eigen::Index>(samples.size());
    const auto p = static_cast<Eigen::Index>(samples.begin()->second.coords.size());
    if (dim < 0) dim = p;
    if (p != dim) throw DataError(fmt::format("{}: site {} has {} coordinates, expected {}", file.string(), site, p, dim));
    Eigen::VectorXd times(m);
    Eigen::MatrixXd values(m, p);
    Eigen::Index j = 0;
    for (const auto& [idx, sample] : samples) {
      if (static_cast<Eigen::Index>(sample.coords.size()) != p) {
        throw DataError(fmt::format("{}: site {} sample {} is incomplete", file.string(), site, idx));
      }
      times[j] = sample.time;
      for (const auto& [c, v] : sample.coords) {
        if (c >= p) throw DataError(fmt::format("{}: coordinate index {} out of range", file.string(), c));
        values(j, c) = v;
      }
      ++j;
    }
    paths.emplace_back(std::move(times), std::move(values));
  }
  return paths;
}

void write_paths(const fs::path& file, const std::vector<sig::Path>& paths) {
  std::string out = "site,time_index,time,coordinate,value\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& x = paths[i];
    for (Eigen::Index j = 0; j < x.samples(); ++j) {
      const std::string t = format_double(x.times[j]);
      for (Eigen::Index c = 0; c < x.dim(); ++c) {
        out += fmt::format("{},{},{},{},{}\n", i, j, t, c, format_double(x.values(j, c)));
      }
    }
  }
  write_text(file, out);
}

Eigen::VectorXd read_response(const fs::path& file) {
  const Table t = read_csv(file);
  std::size_t cy = 0;
  if (t.has_column("y")) {
    cy = t.column("y");
  } else if (!t.rows.empty() && t.rows.front().size() == 2) {
    cy = 1;
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    y[static_cast<Eigen::Index>(r)] = parse_double(t.rows[r].at(cy), file);
  }
  if (!y.allFinite()) throw DataError(fmt::format("{}: non-finite response", file.string()));
  return y;
}

void write_response(const fs::path& file, const Eigen::VectorXd& y) {
  std::string out = "site,y\n";
  for (Eigen::Index i = 0; i < y.size(); ++i) out += fmt::format("{},{}\n", i, format_double(y[i]));
  write_text(file, out);
}

DataDir read_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(fmt::format("{} is not a directory", dir.string()));
  DataDir d;
  d.coords = read_coordinates(dir / "coords.csv");
  d.paths = read_paths(dir / "paths.csv");
  d.y = read_response(dir / "y.csv");
  const auto n = d.coords.rows();
  if (d.y.size() != n) {
    throw DataError(fmt::format("site count mismatch: coords.csv has {} sites, y.csv has {}", n, d.y.size()));
  }
  if (static_cast<Eigen::Index>(d.paths.size()) != n) {
    throw DataError(fmt::format("site count mismatch: coords.csv has {} sites, paths.csv has {}", n, d.paths.size()));
  }
  if (fs::exists(dir / "weights.csv")) d.w = read_weights(dir / "weights.csv", n);
  if (fs::exists(dir / "meta.json")) d.meta = read_json(dir / "meta.json");
  return d;
}

void write_dataset(const fs::path& dir, const sim::Dataset& data, const nlohmann::json& extra_meta) {
  fs::create_directories(dir);
  write_coordinates(dir / "coords.csv", data.coords);
  write_weights(dir / "weights.csv", data.w);
  write_paths(dir / "paths.csv", data.paths);
  write_response(dir / "y.csv", data.y);
  const auto& c = data.config;
  nlohmann::json meta = {{"model", c.model}, {"n", c.n},       {"p", c.p},
                         {"rho_star", c.rho_star}, {"k", c.k}, {"grid_side", c.grid_side},
                         {"m", c.m},         {"seed", c.seed}};
  if (extra_meta.is_object()) meta.update(extra_meta);
  write_json(dir / "meta.json", meta);
}

void write_split(const fs::path& file, const spatial::SplitAssignment& split) {
  std::string out = "site,label\n";
  for (std::size_t i = 0; i < split.labels.size(); ++i) {
    out += fmt::format("{},{}\n", i, spatial::to_string(split.labels[i]));
  }
  write_text(file, out);
}

spatial::SplitAssignment read_split(const fs::path& file) {
  const Table t = read_csv(file, true);
  const std::size_t cs = t.column("site"), cl = t.column("label");
  spatial::SplitAssignment split;
  split.labels.resize(t.rows.size(), spatial::Label::train);
  for (const auto& row : t.rows) {
    const auto site = static_cast<std::size_t>(parse_index(row.at(cs), file));
    if (site >= split.labels.size()) throw DataError(fmt::format("{}: site {} out of range", file.string(), site));
    const std::string& label = row.at(cl);
    if (label == "train") split.labels[site] = spatial::Label::train;
    else if (label == "validation") split.labels[site] = spatial::Label::validation;
    else if (label == "test") split.labels[site] = spatial::Label::test;
    else throw DataError(fmt::format("{}: unknown label '{}'", file.string(), label));
  }
  return split;
}

void write_report(const fs::path& file, const selection::SelectionReport& report) {
  std::string out = "estimator,order,lambda,n_scores,validation_rmse,seconds,chosen,error\n";
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const auto& p = report.points[i];
    std::string err = p.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += fmt::format("{},{},{},{},{},{},{},{}\n", selection::to_string(report.estimator), p.order,
                       std::isnan(p.lambda) ? std::string() : format_double(p.lambda),
                       p.n_scores > 0 ? std::to_string(p.n_scores) : std::string(),
                       p.ok() ? format_double(p.validation_rmse) : std::string(),
                       format_double(p.seconds), i == report.chosen ? 1 : 0, err);
  }
  write_text(file, out);
}

std::string estimator_tag(const est::Fit& fit) {
  if (std::holds_alternative<est::RidgeFit>(fit)) return "naive-penssar";
  const auto& proj = std::get<est::ProjFit>(fit);
  return std::holds_alternative<est::PlsBasis>(proj.basis) ? "pls-projssar" : "pca-projssar";
}

nlohmann::json to_json(const est::Fit& fit) {
  nlohmann::json j;
  j["format"] = "sigssar-fit";
  j["version"] = 1;
  j["estimator"] = estimator_tag(fit);
  if (const auto* r = std::get_if<est::RidgeFit>(&fit)) {
    j["order"] = r->order;
    j["rho_hat"] = r->rho_hat;
    j["alpha_hat"] = r->alpha_hat;
    j["lambda"] = r->lambda;
    j["objective"] = r->objective;
    j["min_norm"] = r->min_norm;
    j["beta"] = to_vector(r->beta_hat);
    return j;
  }
  const auto& p = std::get<est::ProjFit>(fit);
  j["order"] = p.order;
  j["rho_hat"] = p.rho_hat;
  j["alpha_hat"] = p.alpha_hat;
  j["sigma2_hat"] = p.sigma2_hat;
  j["log_likelihood"] = p.log_likelihood;
  j["n_scores"] = p.phi_hat.size();
  j["phi"] = to_vector(p.phi_hat);
  if (const auto* b = std::get_if<est::PlsBasis>(&p.basis)) {
    j["basis"] = {{"kind", "pls"},
                  {"weights", matrix_to_json(b->weights)},
                  {"x_loadings", matrix_to_json(b->x_loadings)},
                  {"y_loadings", to_vector(b->y_loadings)},
                  {"column_centers", to_vector(b->column_centers.transpose())},
                  {"y_center", b->y_center}};
  } else {
    const auto& c = std::get<est::PcaBasis>(p.basis);
    j["basis"] = {{"kind", "pca"},
                  {"input_width", c.input_width},
                  {"kept_columns", c.kept_columns},
                  {"column_centers", to_vector(c.column_centers.transpose())},
                  {"column_scales", to_vector(c.column_scales.transpose())},
                  {"directions", matrix_to_json(c.directions)},
                  {"explained_inertia", to_vector(c.explained_inertia)}};
  }
  return j;
}

est::Fit fit_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "sigssar-fit") throw DataError("not a fit file");
    const std::string tag = j.at("estimator");
    if (tag == "naive-penssar") {
      est::RidgeFit r;
      r.order = j.at("order");
      r.rho_hat = j.at("rho_hat");
      r.alpha_hat = j.at("alpha_hat");
      r.lambda = j.at("lambda");
      r.objective = j.at("objective");
      r.min_norm = j.at("min_norm");
      r.beta_hat = vector_from_json(j.at("beta"));
      return r;
    }
    est::ProjFit p;
    p.order = j.at("order");
    p.rho_hat = j.at("rho_hat");
    p.alpha_hat = j.at("alpha_hat");
    p.sigma2_hat = j.at("sigma2_hat");
    p.log_likelihood = j.at("log_likelihood");
    p.phi_hat = vector_from_json(j.at("phi"));
    const auto& b = j.at("basis");
    if (b.at("kind") == "pls") {
      est::PlsBasis basis;
      basis.weights = matrix_from_json(b.at("weights"));
      basis.x_loadings = matrix_from_json(b.at("x_loadings"));
      basis.y_loadings = vector_from_json(b.at("y_loadings"));
      basis.column_centers = vector_from_json(b.at("column_centers")).transpose();
      basis.y_center = b.at("y_center");
      p.basis = std::move(basis);
    } else if (b.at("kind") == "pca") {
      est::PcaBasis basis;
      basis.input_width = b.at("input_width");
      basis.kept_columns = b.at("kept_columns").get<std::vector<Eigen::Index>>();
      basis.column_centers = vector_from_json(b.at("column_centers")).transpose();
      basis.column_scales = vector_from_json(b.at("column_scales")).transpose();
      basis.directions = matrix_from_json(b.at("directions"));
      basis.explained_inertia = vector_from_json(b.at("explained_inertia"));
      p.basis = std::move(basis);
    } else {
      throw DataError("fit file: unknown basis kind");
    }
    if (tag != estimator_tag(est::Fit(p))) throw DataError("fit file: estimator tag does not match basis");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("malformed fit file: {}", e.what()));
  }
}

void write_json(const fs::path& file, const nlohmann::json& j) { write_text(file, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(fmt::format("cannot open {}", file.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: {}", file.string(), e.what()));
  }
}

}  // namespace sigssar::io
