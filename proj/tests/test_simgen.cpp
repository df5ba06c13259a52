#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "oracles/oracles.hpp"
#include "sigssar/rng.hpp"
#include "sigssar/simgen.hpp"

using namespace sigssar;
using namespace sigssar::sim;

TEST_CASE("site sampling") {
  const spatial::Coordinates all = sample_sites(5, 25, 1);
  std::set<std::pair<double, double>> cells;
  for (Eigen::Index i = 0; i < all.rows(); ++i) cells.emplace(all(i, 0), all(i, 1));
  CHECK(cells.size() == 25);
  CHECK(sample_sites(5, 25, 2).rows() == 25);

  const spatial::Coordinates a = sample_sites(60, 200, 7);
  CHECK(a == sample_sites(60, 200, 7));
  CHECK(a != sample_sites(60, 200, 8));
  double min_dist = 1e9;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.rows(); ++j) min_dist = std::min(min_dist, (a.row(i) - a.row(j)).norm());
  }
  CHECK(min_dist >= 1.0);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(a.maxCoeff() <= 59.0);
  CHECK_THROWS(sample_sites(5, 26, 1));
}

TEST_CASE("time grid") {
  const Eigen::VectorXd t = time_grid(101);
  CHECK(t.size() == 101);
  CHECK(t(0) == 0.0);
  CHECK(t(100) == 1.0);
  for (Eigen::Index j = 0; j < 101; ++j) CHECK(t(j) == doctest::Approx(j / 100.0).epsilon(1e-15));
}

TEST_CASE("exponential Gaussian process") {
  const ExponentialGp gp(101);
  CHECK(gp.jitter() <= 1e-6);
  std::mt19937_64 gen(derive_seed(3, Stream::gaussian_process));
  const int draws = 10000;
  double sum_sq = 0, sum_lag = 0, sum_a = 0, sum_b = 0, sum_b2 = 0;
  for (int d = 0; d < draws; ++d) {
    const Eigen::VectorXd f = gp.draw(gen);
    sum_a += f(50);
    sum_sq += f(50) * f(50);
    sum_b += f(51);
    sum_b2 += f(51) * f(51);
    sum_lag += f(50) * f(51);
  }
  const double mean_a = sum_a / draws, mean_b = sum_b / draws;
  const double var_a = sum_sq / draws - mean_a * mean_a;
  const double var_b = sum_b2 / draws - mean_b * mean_b;
  const double corr = (sum_lag / draws - mean_a * mean_b) / std::sqrt(var_a * var_b);
  CHECK(std::abs(var_a - 1.0) <= 0.05);
  CHECK(std::abs(corr - std::exp(-0.01)) <= 0.01);
  CHECK(gp_exponential(101, 1.0, 5) == gp_exponential(101, 1.0, 5));
}

TEST_CASE("Model 1 paths") {
  SUBCASE("linear without the Gaussian process") {
    const auto paths = gen_model1_paths(50, 3, 101, 4, false);
    REQUIRE(paths.size() == 50);
    for (const auto& x : paths) {
      CHECK(x.samples() == 101);
      CHECK(x.times == time_grid(101));
      for (Eigen::Index k = 0; k < 3; ++k) {
        const double slope = x.values(100, k);
        CHECK(std::abs(slope) <= 3.0);
        CHECK(x.values(0, k) == 0.0);
        for (Eigen::Index j = 0; j < 101; ++j) CHECK(x.values(j, k) == doctest::Approx(slope * x.times(j)));
      }
    }
  }
  SUBCASE("coordinates are independent") {
    const auto paths = gen_model1_paths(1000, 2, 11, 5, false);
    Eigen::MatrixXd slopes(1000, 2);
    for (Eigen::Index i = 0; i < 1000; ++i) slopes.row(i) = paths[static_cast<std::size_t>(i)].values.row(10);
    const Eigen::MatrixXd c = slopes.rowwise() - slopes.colwise().mean();
    const double cov = c.col(0).dot(c.col(1)) / 999.0;
    // Uniform[-3, 3] has variance 3, so the covariance estimate has SE 3/sqrt(1000).
    CHECK(std::abs(cov) < 3 * 3.0 / std::sqrt(1000.0));
    // Distinct sites too.
    const double site_cov = (c.col(0).head(999).dot(c.col(0).tail(999))) / 998.0;
    CHECK(std::abs(site_cov) < 3 * 3.0 / std::sqrt(999.0));
  }
  SUBCASE("deterministic") {
    const auto a = gen_model1_paths(5, 2, 101, 6);
    const auto b = gen_model1_paths(5, 2, 101, 6);
    for (std::size_t i = 0; i < 5; ++i) CHECK(a[i].values == b[i].values);
  }
}

TEST_CASE("Model 2 functional form") {
  for (double t : {0.0, 0.3, 1.0}) {
    CHECK(model2_value({1, 0, 0.37, 0}, t) == doctest::Approx(t + 10 * t * t * t));
  }
  CHECK(model2_value({1, 0, 0.37, 0}, 1.0) == doctest::Approx(11.0));
  CHECK(model2_value({0, 1, 0.5, 1}, 0.0) == doctest::Approx(-10.0));
  CHECK(model2_value({0, 1, 0.5, 1}, 0.1) ==
        doctest::Approx(10 * std::sin(4 * M_PI * 0.1) + 10 * std::pow(0.1 - 1, 3)));

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool finite = true;
  for (int d = 0; d < 100000; ++d) {
    const std::array<double, 4> b{u(gen), u(gen), std::max(u(gen), 1e-6), u(gen)};
    finite = finite && std::isfinite(model2_value(b, u(gen)));
  }
  CHECK(finite);

  const auto paths = gen_model2_paths(20, 3, 101, 8);
  for (const auto& x : paths) CHECK(x.values.allFinite());
}

TEST_CASE("response generation") {
  SUBCASE("rho = 0") {
    std::mt19937_64 gen(9);
    const spatial::WeightMatrix w = spatial::knn_weights(sample_sites(10, 30, 1), 4);
    const Eigen::VectorXd m = oracle::gaussian_matrix(gen, 30, 1).col(0);
    const Eigen::VectorXd e = oracle::gaussian_matrix(gen, 30, 1).col(0);
    CHECK(gen_response(w, m, 0.0, e) == m + e);
  }
  SUBCASE("two-site system") {
    spatial::WeightMatrix w;
    w.entries.resize(2, 2);
    w.entries << 0, 1, 1, 0;
    const Eigen::VectorXd y = gen_response(w, Eigen::Vector2d(1, 0), 0.5, Eigen::Vector2d::Zero().eval());
    CHECK(y(0) == doctest::Approx(4.0 / 3));
    CHECK(y(1) == doctest::Approx(2.0 / 3));
  }
  SUBCASE("simultaneous equation holds") {
    for (int model : {1, 2}) {
      for (double rho : {0.0, 0.4, 0.8}) {
        const Dataset d = simulate(SimConfig{model, 200, 2, rho, 4, 60, 101, 11});
        CHECK(equation_residual(d) < 1e-10);
        CHECK(d.paths.front().samples() == 100);
        CHECK(d.full_paths.front().samples() == 101);
        Eigen::VectorXd mean(200);
        for (Eigen::Index i = 0; i < 200; ++i) {
          mean(i) = d.full_paths[static_cast<std::size_t>(i)].values.row(100).mean();
        }
        CHECK((mean - d.mean_term).cwiseAbs().maxCoeff() < 1e-15);
      }
    }
  }
}

TEST_CASE("configuration validation") {
  CHECK_NOTHROW(validate(SimConfig{}));
  CHECK_THROWS(validate(SimConfig{3}));
  CHECK_THROWS(validate(SimConfig{1, 200, 2, 1.0}));
  CHECK_THROWS(validate(SimConfig{1, 5000, 2, 0.0, 4, 60}));
  CHECK_THROWS(validate(SimConfig{1, 200, 0}));
  CHECK_THROWS(validate(SimConfig{1, 200, 2, 0.0, 200}));
}
