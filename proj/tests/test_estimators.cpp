#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "sigssar/error.hpp"
#include "sigssar/estimators.hpp"
#include "sigssar/simgen.hpp"

using namespace sigssar;
using namespace sigssar::est;

namespace {

WeightMatrix random_w(std::mt19937_64& gen, Eigen::Index n, int k) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  spatial::Coordinates c(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) c.row(i) << u(gen), u(gen);
  return spatial::knn_weights(c, k);
}

struct Instance {
  WeightMatrix w;
  Eigen::MatrixXd xi;
  Eigen::VectorXd y;
  double alpha;
  Eigen::VectorXd beta;
};

/// Y = (I - rho W)^{-1} (alpha + xi beta + sigma eps).
Instance sar_instance(std::mt19937_64& gen, Eigen::Index n, Eigen::Index s, double rho, double sigma) {
  Instance in;
  in.w = random_w(gen, n, 4);
  in.xi = oracle::gaussian_matrix(gen, n, s);
  in.beta = oracle::gaussian_matrix(gen, s, 1).col(0);
  in.alpha = 0.7;
  const Eigen::VectorXd noise = oracle::gaussian_matrix(gen, n, 1).col(0);
  const Eigen::VectorXd rhs = (in.alpha + (in.xi * in.beta).array()).matrix() + sigma * noise;
  in.y = spatial::solve_reduced_form(in.w, rho, rhs);
  return in;
}

double profiled_objective(const RidgeProblem& problem, const WeightMatrix& w, const Eigen::VectorXd& y,
                          double rho, double lambda) {
  const Eigen::VectorXd z = y - rho * (w.entries * y);
  const Eigen::VectorXd coef = problem.coefficients(z, lambda).col(0);
  return problem.objective(rho, coef(0), coef.tail(coef.size() - 1), lambda);
}

}  // namespace

TEST_CASE("ridge: noiseless identifiable case") {
  std::mt19937_64 gen(1);
  const Instance in = sar_instance(gen, 30, 5, 0.0, 0.0);
  const RidgeFit fit = naive_penssar_fit(in.w, in.y, in.xi, 0.0);
  CHECK(std::abs(fit.rho_hat) < 1e-3);
  CHECK(std::abs(fit.alpha_hat - in.alpha) < 1e-8);
  CHECK((fit.beta_hat - in.beta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ridge: returned rho minimizes the profiled objective") {
  std::mt19937_64 gen(2);
  const Instance in = sar_instance(gen, 40, 6, 0.5, 0.5);
  for (double lambda : {0.0, 0.05, 2.0}) {
    const RidgeProblem problem(in.w, in.y, in.xi);
    const RidgeFit fit = problem.fit(lambda);
    const double at_fit = profiled_objective(problem, in.w, in.y, fit.rho_hat, lambda);
    CHECK(at_fit == doctest::Approx(fit.objective).epsilon(1e-12));
    for (int g = 0; g < 1001; ++g) {
      const double rho = spatial::kRhoMin + (spatial::kRhoMax - spatial::kRhoMin) * g / 1000.0;
      CHECK(at_fit <= profiled_objective(problem, in.w, in.y, rho, lambda) + 1e-10);
    }
  }
}

TEST_CASE("ridge: closed form matches gradient descent") {
  std::mt19937_64 gen(3);
  const Instance in = sar_instance(gen, 20, 5, 0.3, 1.0);
  const RidgeProblem problem(in.w, in.y, in.xi);
  for (double rho : {-0.4, 0.3}) {
    for (double lambda : {0.0, 0.1, 10.0}) {
      const Eigen::VectorXd z = in.y - rho * (in.w.entries * in.y);
      const Eigen::VectorXd coef = problem.coefficients(z, lambda).col(0);
      const oracle::RidgeSolution ref = oracle::ridge_gradient_descent(z, in.xi, lambda);
      CHECK(std::abs(coef(0) - ref.alpha) < 1e-6);
      CHECK((coef.tail(5) - ref.beta).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("ridge: dual solver equals primal for positive lambda") {
  std::mt19937_64 gen(4);
  // s > n, where the dual system is the cheap one.
  const Instance in = sar_instance(gen, 25, 60, 0.4, 0.3);
  const RidgeProblem primal(in.w, in.y, in.xi, RidgeSolver::primal);
  const RidgeProblem dual(in.w, in.y, in.xi, RidgeSolver::dual);
  for (double lambda : {1e-4, 0.1, 10.0}) {
    const RidgeFit a = primal.fit(lambda);
    const RidgeFit b = dual.fit(lambda);
    CHECK(std::abs(a.rho_hat - b.rho_hat) < 1e-6);
    CHECK(std::abs(a.alpha_hat - b.alpha_hat) < 1e-6);
    CHECK((a.beta_hat - b.beta_hat).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("ridge: singular unpenalized system") {
  std::mt19937_64 gen(5);
  const Instance in = sar_instance(gen, 10, 20, 0.2, 1.0);
  CHECK_THROWS_AS(naive_penssar_fit(in.w, in.y, in.xi, 0.0), SingularSystem);
  RidgeOptions options;
  options.allow_min_norm = true;
  const RidgeFit fit = naive_penssar_fit(in.w, in.y, in.xi, 0.0, options);
  CHECK(fit.min_norm);
  CHECK(fit.beta_hat.allFinite());
  CHECK_THROWS(naive_penssar_fit(in.w, in.y, in.xi, -1.0));
}

TEST_CASE("PLS: rank-one design") {
  std::mt19937_64 gen(6);
  const Eigen::VectorXd y = oracle::gaussian_matrix(gen, 30, 1).col(0);
  const Eigen::MatrixXd xi = 2.5 * y;
  const PlsScores pls = pls_scores(y, xi, 1);
  const Eigen::VectorXd centered = xi.col(0).array() - xi.col(0).mean();
  const Eigen::VectorXd t = pls.scores.col(0);
  CHECK(std::abs(std::abs(t.dot(centered)) - t.norm() * centered.norm()) < 1e-10 * t.norm() * centered.norm());
  const Eigen::VectorXd yc = y.array() - y.mean();
  const Eigen::VectorXd resid = yc - t * (t.dot(yc) / t.squaredNorm());
  CHECK(resid.norm() < 1e-10);
  // Three collinear columns: a second score cannot be extracted.
  Eigen::MatrixXd collinear(30, 3);
  collinear << 2.5 * y, -y, 0.3 * y;
  const PlsScores more = pls_scores(y, collinear, 3);
  CHECK(more.truncated);
  CHECK(more.scores.cols() == 1);
}

TEST_CASE("PLS: orthogonal scores and the full-rank OLS limit") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd xi = oracle::gaussian_matrix(gen, 50, 10);
    const Eigen::VectorXd y = xi * oracle::gaussian_matrix(gen, 10, 1).col(0) +
                              oracle::gaussian_matrix(gen, 50, 1).col(0);
    const PlsScores pls = pls_scores(y, xi, 10);
    REQUIRE(pls.scores.cols() == 10);
    for (Eigen::Index j = 0; j < 10; ++j) {
      for (Eigen::Index k = j + 1; k < 10; ++k) {
        const double dot = std::abs(pls.scores.col(j).dot(pls.scores.col(k)));
        CHECK(dot < 1e-8 * pls.scores.col(j).norm() * pls.scores.col(k).norm());
      }
    }
    const Eigen::VectorXd via_scores = oracle::ols_fitted(y, pls.scores);
    const Eigen::VectorXd direct = oracle::ols_fitted(y, xi);
    CHECK((via_scores - direct).cwiseAbs().maxCoeff() < 1e-6);

    // Projection of the training rows reproduces the scores; prefixes agree.
    CHECK((project(pls.basis, xi) - pls.scores).cwiseAbs().maxCoeff() < 1e-9);
    const PlsScores three = pls_scores(y, xi, 3);
    CHECK((three.scores - pls.scores.leftCols(3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((project(pls.basis.prefix(3), xi) - three.scores).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("PCA scores") {
  SUBCASE("two independent columns of equal variance") {
    std::mt19937_64 gen(8);
    const Eigen::MatrixXd xi = oracle::gaussian_matrix(gen, 20000, 2);
    const PcaScores pca = pca_scores(xi, 0.95);
    CHECK(pca.basis.n_scores() == 1);
    CHECK(pca.basis.explained_inertia(0) == doctest::Approx(0.5).epsilon(0.02));
    // Direct eigendecomposition of the correlation matrix.
    Eigen::MatrixXd centered = xi.rowwise() - xi.colwise().mean();
    Eigen::MatrixXd corr = centered.transpose() * centered / (xi.rows() - 1.0);
    const Eigen::Vector2d sd = corr.diagonal().cwiseSqrt();
    corr = sd.cwiseInverse().asDiagonal() * corr * sd.cwiseInverse().asDiagonal();
    const Eigen::Vector2d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(corr).eigenvalues();
    CHECK(pca.basis.explained_inertia(0) == doctest::Approx(eig.maxCoeff() / eig.sum()).epsilon(1e-10));
  }
  SUBCASE("orthonormal directions, constant columns dropped") {
    std::mt19937_64 gen(9);
    Eigen::MatrixXd xi = oracle::gaussian_matrix(gen, 40, 12);
    xi.col(3).setConstant(4.0);
    const PcaScores pca = pca_scores(xi, 0.999);
    CHECK(pca.basis.kept_columns.size() == 11);
    const Eigen::MatrixXd& v = pca.basis.directions;
    CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(pca.basis.n_scores() <= pca.positive_eigenvalues);
    CHECK((project(pca.basis, xi) - pca.scores).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("more columns than rows") {
    std::mt19937_64 gen(10);
    const Eigen::MatrixXd xi = oracle::gaussian_matrix(gen, 8, 30);
    const PcaScores pca = pca_scores(xi, 1.0);
    CHECK(pca.positive_eigenvalues <= 7);
    CHECK(pca.basis.n_scores() <= pca.positive_eigenvalues);
  }
  SUBCASE("all columns constant") {
    CHECK_THROWS_AS(pca_scores(Eigen::MatrixXd::Ones(10, 3), 0.95), DataError);
  }
}

TEST_CASE("projection estimator: concentrated likelihood") {
  std::mt19937_64 gen(11);
  const Instance in = sar_instance(gen, 80, 8, 0.5, 1.0);
  const PlsScores pls = pls_scores(in.y, in.xi, 4);
  const ConcentratedLikelihood ll(in.w, in.y, pls.scores);
  const ProjFit fit = fit_on_scores(in.w, in.y, pls.scores, pls.basis);
  CHECK(fit.log_likelihood == doctest::Approx(ll(fit.rho_hat)).epsilon(1e-12));
  for (int g = 0; g < 1001; ++g) {
    const double rho = spatial::kRhoMin + (spatial::kRhoMax - spatial::kRhoMin) * g / 1000.0;
    CHECK(fit.log_likelihood >= ll(rho) - 1e-8);
  }
  // sigma^2 recomputed from the residual of the fitted equation.
  const Eigen::VectorXd resid = in.y - fit.rho_hat * (in.w.entries * in.y) -
                                (fit.alpha_hat + (pls.scores * fit.phi_hat).array()).matrix();
  CHECK(std::abs(fit.sigma2_hat - resid.squaredNorm() / 80.0) < 1e-10);
  // Likelihood formula from its ingredients.
  const double n = 80.0;
  const double expected = -0.5 * n * (std::log(2 * M_PI) + 1) - 0.5 * n * std::log(ll.sigma2(0.3)) +
                          oracle::log_det_eigen(in.w.entries, 0.3);
  CHECK(ll(0.3) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("projection estimator: rank-deficient scores") {
  std::mt19937_64 gen(12);
  const Instance in = sar_instance(gen, 20, 2, 0.0, 1.0);
  Eigen::MatrixXd scores(20, 2);
  scores.col(0) = in.xi.col(0);
  scores.col(1) = 2.0 * in.xi.col(0);
  CHECK_THROWS_AS(ConcentratedLikelihood(in.w, in.y, scores), SingularSystem);
}

TEST_CASE("projection estimator recovers rho = 0 when W plays no role") {
  std::mt19937_64 gen(13);
  std::vector<double> pls_err, pca_err;
  for (int r = 0; r < 20; ++r) {
    // Signal variance 9 against unit noise.
    Instance in = sar_instance(gen, 200, 10, 0.0, 1.0);
    in.beta *= 3.0 / in.beta.norm();
    in.y = (in.alpha + (in.xi * in.beta).array()).matrix() + oracle::gaussian_matrix(gen, 200, 1).col(0);
    pls_err.push_back(std::abs(pls_projssar_fit(in.w, in.y, in.xi, 3).rho_hat));
    pca_err.push_back(std::abs(pca_projssar_fit(in.w, in.y, in.xi, 1.0).rho_hat));
  }
  CHECK(oracle::median(pls_err) <= 0.1);
  CHECK(oracle::median(pca_err) <= 0.1);
}

TEST_CASE("prediction") {
  SUBCASE("rho = 0 collapses to the mean component") {
    std::mt19937_64 gen(14);
    const Instance in = sar_instance(gen, 15, 3, 0.0, 1.0);
    RidgeFit fit;
    fit.rho_hat = 0.0;
    fit.alpha_hat = 1.25;
    fit.beta_hat = in.beta;
    const Eigen::VectorXd expected = (1.25 + (in.xi * in.beta).array()).matrix();
    CHECK(predict(Fit{fit}, in.w, in.xi) == expected);
    CHECK(mean_component(Fit{fit}, in.xi) == expected);
  }
  SUBCASE("two-site system") {
    WeightMatrix w;
    w.entries.resize(2, 2);
    w.entries << 0, 1, 1, 0;
    RidgeFit fit;
    fit.rho_hat = 0.5;
    fit.alpha_hat = 0.0;
    fit.beta_hat = Eigen::VectorXd::Ones(1);
    const Eigen::VectorXd y = predict(Fit{fit}, w, Eigen::Vector2d(1, 0));
    CHECK(y(0) == doctest::Approx(4.0 / 3));
    CHECK(y(1) == doctest::Approx(2.0 / 3));
  }
  SUBCASE("noiseless ridge data are reproduced") {
    std::mt19937_64 gen(15);
    const Instance in = sar_instance(gen, 30, 4, 0.6, 0.0);
    const RidgeFit fit = naive_penssar_fit(in.w, in.y, in.xi, 0.0);
    CHECK(std::abs(fit.rho_hat - 0.6) < 1e-4);
    CHECK((predict(Fit{fit}, in.w, in.xi) - in.y).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("size mismatch") {
    RidgeFit fit;
    fit.beta_hat = Eigen::VectorXd::Ones(3);
    WeightMatrix w;
    w.entries = Eigen::MatrixXd::Zero(4, 4);
    CHECK_THROWS(predict(Fit{fit}, w, Eigen::MatrixXd::Ones(4, 2)));
    CHECK_THROWS(predict(Fit{fit}, w, Eigen::MatrixXd::Ones(5, 3)));
  }
}
