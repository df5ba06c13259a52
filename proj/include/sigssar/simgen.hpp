#pragma once

// Synthetic SAR datasets with functional covariates.
//
// Model 1: X_ik(t) = a_ik t + f_ik(t), a_ik ~ U[-3, 3], f_ik a centered
//          Gaussian process with covariance exp(-|s - t|).
// Model 2: Z_ik(t) = b1 t + 10 b2 sin(2 pi t / b3) + 10 (t - b4)^3,
//          b1..b4 ~ U[0, 1].
// Both:    Y = rho W Y + (1/p) sum_k X_ik(t_m) + eps, eps ~ N(0, 1),
//          with the paths handed to estimators truncated to t_1..t_{m-1}.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sigssar/sigcore.hpp"
#include "sigssar/spatial.hpp"

namespace sigssar::sim {

struct SimConfig {
  int model = 1;
  Eigen::Index n = 200;
  Eigen::Index p = 2;
  double rho_star = 0.0;
  int k = 4;
  int grid_side = 60;
  Eigen::Index m = 101;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument on out-of-range fields.
void validate(const SimConfig& config);

struct Dataset {
  SimConfig config;
  spatial::Coordinates coords;
  spatial::WeightMatrix w;
  std::vector<sig::Path> paths;       // first m - 1 samples, what estimators see
  Eigen::VectorXd y;
  std::vector<sig::Path> full_paths;  // all m samples
  Eigen::VectorXd mean_term;          // (1/p) sum_k X_ik(t_m)
  Eigen::VectorXd noise;
};

/// n distinct cells of a grid_side x grid_side grid, as integer (column, row).
spatial::Coordinates sample_sites(int grid_side, Eigen::Index n, std::uint64_t seed);

/// Equally spaced stamps of [0, 1]: t_j = j / (m - 1).
Eigen::VectorXd time_grid(Eigen::Index m);

/// Sampler for the centered exponential-covariance Gaussian process on the
/// equally spaced grid of [0, 1]. Cholesky factor with diagonal jitter
/// 1e-10, escalating x10 up to 1e-6.
class ExponentialGp {
 public:
  explicit ExponentialGp(Eigen::Index m, double length_scale = 1.0);

  Eigen::VectorXd draw(std::mt19937_64& gen) const;
  const Eigen::MatrixXd& factor() const { return factor_; }
  double jitter() const { return jitter_; }

 private:
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

Eigen::VectorXd gp_exponential(Eigen::Index m, double length_scale, std::uint64_t seed);

/// include_gp = false drops f_ik (test hook: exactly linear paths).
std::vector<sig::Path> gen_model1_paths(Eigen::Index n, Eigen::Index p, Eigen::Index m,
                                        std::uint64_t seed, bool include_gp = true);

double model2_value(const std::array<double, 4>& beta, double t);

std::vector<sig::Path> gen_model2_paths(Eigen::Index n, Eigen::Index p, Eigen::Index m,
                                        std::uint64_t seed);

/// Y = (I - rho W)^{-1} (mean_term + noise); throws std::runtime_error if the
/// simultaneous-equation residual exceeds 1e-10.
Eigen::VectorXd gen_response(const spatial::WeightMatrix& w, const Eigen::VectorXd& mean_term,
                             double rho_star, const Eigen::VectorXd& noise);

/// As above with standard normal noise drawn from the seed's noise stream.
Eigen::VectorXd gen_response(const spatial::WeightMatrix& w, const Eigen::VectorXd& mean_term,
                             double rho_star, std::uint64_t seed);

/// Max absolute entry of Y - rho W Y - mean_term - noise.
double equation_residual(const Dataset& data);

Dataset simulate(const SimConfig& config);

}  // namespace sigssar::sim
