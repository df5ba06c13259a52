#include "sigssar/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/rng.hpp"

namespace sigssar::sim {

namespace {

std::uint64_t coordinate_index(Eigen::Index site, Eigen::Index coord) {
  return (static_cast<std::uint64_t>(site) << 20) | static_cast<std::uint64_t>(coord);
}

Eigen::VectorXd standard_normals(Eigen::Index count, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(count);
  for (Eigen::Index i = 0; i < count; ++i) z[i] = normal(gen);
  return z;
}

}  // namespace

void validate(const SimConfig& c) {
  if (c.model != 1 && c.model != 2) throw std::invalid_argument(fmt::format("unknown model {}", c.model));
  if (c.p < 1) throw std::invalid_argument("p must be at least 1");
  if (c.m < 3) throw std::invalid_argument("m must be at least 3");
  if (!(std::abs(c.rho_star) < 1.0)) throw std::invalid_argument("|rho_star| must be below 1");
  if (c.grid_side < 1) throw std::invalid_argument("grid_side must be positive");
  if (c.n < 3 || c.n > static_cast<Eigen::Index>(c.grid_side) * c.grid_side) {
    throw std::invalid_argument(fmt::format("n = {} does not fit a {}x{} grid", c.n, c.grid_side, c.grid_side));
  }
  if (c.k < 1 || c.k >= c.n) throw std::invalid_argument(fmt::format("k = {} outside [1, n)", c.k));
}

spatial::Coordinates sample_sites(int grid_side, Eigen::Index n, std::uint64_t seed) {
  const Eigen::Index cells = static_cast<Eigen::Index>(grid_side) * grid_side;
  if (n > cells) {
    throw std::invalid_argument(fmt::format("cannot place {} sites on {} cells", n, cells));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(cells));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto gen = make_engine(seed, Stream::sites);
  std::shuffle(order.begin(), order.end(), gen);
  spatial::Coordinates coords(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index cell = order[static_cast<std::size_t>(i)];
    coords(i, 0) = static_cast<double>(cell % grid_side);
    coords(i, 1) = static_cast<double>(cell / grid_side);
  }
  return coords;
}

Eigen::VectorXd time_grid(Eigen::Index m) {
  return Eigen::VectorXd::LinSpaced(m, 0.0, 1.0);
}

ExponentialGp::ExponentialGp(Eigen::Index m, double length_scale) {
  if (m < 2) throw std::invalid_argument("ExponentialGp needs m >= 2");
  const Eigen::VectorXd t = time_grid(m);
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) cov(a, b) = std::exp(-std::abs(t[a] - t[b]) / length_scale);
  }
  for (double jitter = 1e-10; jitter <= 1e-6 * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd c = cov;
    c.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      jitter_ = jitter;
      return;
    }
  }
  throw std::runtime_error("exponential covariance factorization failed at maximum jitter");
}

Eigen::VectorXd ExponentialGp::draw(std::mt19937_64& gen) const {
  return factor_ * standard_normals(factor_.rows(), gen);
}

Eigen::VectorXd gp_exponential(Eigen::Index m, double length_scale, std::uint64_t seed) {
  auto gen = make_engine(seed, Stream::gaussian_process);
  return ExponentialGp(m, length_scale).draw(gen);
}

std::vector<sig::Path> gen_model1_paths(Eigen::Index n, Eigen::Index p, Eigen::Index m,
                                        std::uint64_t seed, bool include_gp) {
  const Eigen::VectorXd t = time_grid(m);
  const ExponentialGp gp(m);
  std::uniform_real_distribution<double> slope(-3.0, 3.0);
  std::vector<sig::Path> paths;
  paths.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd values(m, p);
    for (Eigen::Index k = 0; k < p; ++k) {
      auto slope_gen = make_engine(seed, Stream::slopes, coordinate_index(i, k));
      values.col(k) = slope(slope_gen) * t;
      if (include_gp) {
        auto gp_gen = make_engine(seed, Stream::gaussian_process, coordinate_index(i, k));
        values.col(k) += gp.draw(gp_gen);
      }
    }
    paths.emplace_back(t, std::move(values));
  }
  return paths;
}

double model2_value(const std::array<double, 4>& beta, double t) {
  const double shifted = t - beta[3];
  return beta[0] * t + 10.0 * beta[1] * std::sin(2.0 * std::numbers::pi * t / beta[2]) +
         10.0 * shifted * shifted * shifted;
}

std::vector<sig::Path> gen_model2_paths(Eigen::Index n, Eigen::Index p, Eigen::Index m,
                                        std::uint64_t seed) {
  const Eigen::VectorXd t = time_grid(m);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<sig::Path> paths;
  paths.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd values(m, p);
    for (Eigen::Index k = 0; k < p; ++k) {
      auto gen = make_engine(seed, Stream::model2_coeffs, coordinate_index(i, k));
      std::array<double, 4> beta{};
      for (double& b : beta) b = unit(gen);
      while (beta[2] < 1e-6) beta[2] = unit(gen);
      for (Eigen::Index j = 0; j < m; ++j) values(j, k) = model2_value(beta, t[j]);
    }
    paths.emplace_back(t, std::move(values));
  }
  return paths;
}

Eigen::VectorXd gen_response(const spatial::WeightMatrix& w, const Eigen::VectorXd& mean_term,
                             double rho_star, const Eigen::VectorXd& noise) {
  if (!(std::abs(rho_star) < 1.0)) throw std::invalid_argument("|rho_star| must be below 1");
  const Eigen::VectorXd rhs = mean_term + noise;
  Eigen::VectorXd y = spatial::solve_reduced_form(w, rho_star, rhs);
  const double residual = (y - rho_star * (w.entries * y) - rhs).cwiseAbs().maxCoeff();
  if (!(residual < 1e-10)) {
    throw std::runtime_error(fmt::format("generated response violates its equation (residual {})", residual));
  }
  return y;
}

Eigen::VectorXd gen_response(const spatial::WeightMatrix& w, const Eigen::VectorXd& mean_term,
                             double rho_star, std::uint64_t seed) {
  auto gen = make_engine(seed, Stream::noise);
  return gen_response(w, mean_term, rho_star, standard_normals(mean_term.size(), gen));
}

double equation_residual(const Dataset& d) {
  return (d.y - d.config.rho_star * (d.w.entries * d.y) - d.mean_term - d.noise).cwiseAbs().maxCoeff();
}

Dataset simulate(const SimConfig& config) {
  validate(config);
  Dataset d;
  d.config = config;
  d.coords = sample_sites(config.grid_side, config.n, config.seed);
  d.w = spatial::knn_weights(d.coords, config.k);
  d.full_paths = config.model == 1 ? gen_model1_paths(config.n, config.p, config.m, config.seed)
                                   : gen_model2_paths(config.n, config.p, config.m, config.seed);
  d.mean_term.resize(config.n);
  d.paths.reserve(d.full_paths.size());
  for (Eigen::Index i = 0; i < config.n; ++i) {
    const sig::Path& full = d.full_paths[static_cast<std::size_t>(i)];
    d.mean_term[i] = full.values.row(config.m - 1).mean();
    d.paths.emplace_back(full.times.head(config.m - 1), full.values.topRows(config.m - 1));
  }
  auto gen = make_engine(config.seed, Stream::noise);
  d.noise = standard_normals(config.n, gen);
  d.y = gen_response(d.w, d.mean_term, config.rho_star, d.noise);
  return d;
}

}  // namespace sigssar::sim
