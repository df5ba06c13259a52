#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/error.hpp"
#include "sigssar/estimators.hpp"

namespace sigssar::est {

ConcentratedLikelihood::ConcentratedLikelihood(const WeightMatrix& w, const Eigen::VectorXd& y,
                                               const Eigen::MatrixXd& scores)
    : w_(w), n_(y.size()), y_(y) {
  const Eigen::Index j = scores.cols();
  if (scores.rows() != n_ || w.size() != n_) {
    throw std::invalid_argument(fmt::format("projection fit: sizes disagree (W {}, y {}, scores {})",
                                            w.size(), n_, scores.rows()));
  }
  if (n_ < j + 2) {
    throw std::invalid_argument(fmt::format("projection fit needs n >= J + 2 (n = {}, J = {})", n_, j));
  }
  Eigen::MatrixXd design(n_, j + 1);
  design.col(0).setOnes();
  design.rightCols(j) = scores;
  qr_.compute(design);
  if (qr_.rank() < j + 1) {
    throw SingularSystem(fmt::format("score matrix with intercept has rank {} < {}", qr_.rank(), j + 1));
  }
  wy_ = w_.entries * y_;
  resid_y_ = y_ - design * qr_.solve(y_);
  resid_wy_ = wy_ - design * qr_.solve(wy_);
}

double ConcentratedLikelihood::sigma2(double rho) const {
  return (resid_y_ - rho * resid_wy_).squaredNorm() / static_cast<double>(n_);
}

double ConcentratedLikelihood::operator()(double rho) const {
  const double half_n = 0.5 * static_cast<double>(n_);
  return -half_n * (std::log(2.0 * std::numbers::pi) + 1.0) - half_n * std::log(sigma2(rho)) +
         spatial::log_det_factor(w_, rho);
}

Eigen::VectorXd ConcentratedLikelihood::coefficients(double rho) const {
  return qr_.solve(Eigen::VectorXd(y_ - rho * wy_));
}

ProjFit fit_on_scores(const WeightMatrix& w, const Eigen::VectorXd& y, const Eigen::MatrixXd& scores,
                      ProjBasis basis, const SearchOptions& search) {
  const ConcentratedLikelihood loglik(w, y, scores);
  auto objective = [&](double rho) {
    try {
      return loglik(rho);
    } catch (const InadmissibleRho&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const SearchResult best = maximize_1d(objective, search);

  ProjFit fit;
  fit.rho_hat = best.x;
  fit.log_likelihood = best.value;
  const Eigen::VectorXd coef = loglik.coefficients(best.x);
  fit.alpha_hat = coef[0];
  fit.phi_hat = coef.tail(scores.cols());
  const Eigen::VectorXd resid =
      y - best.x * (w.entries * y) - scores * fit.phi_hat - Eigen::VectorXd::Constant(y.size(), fit.alpha_hat);
  fit.sigma2_hat = resid.squaredNorm() / static_cast<double>(y.size());
  if (!(fit.sigma2_hat > 0.0)) throw SingularSystem("projection fit interpolates the data (sigma^2 = 0)");
  fit.basis = std::move(basis);
  return fit;
}

ProjFit pls_projssar_fit(const WeightMatrix& w, const Eigen::VectorXd& y, const Eigen::MatrixXd& xi,
                         Eigen::Index n_scores, const SearchOptions& search) {
  PlsScores pls = pls_scores(y, xi, n_scores);
  return fit_on_scores(w, y, pls.scores, std::move(pls.basis), search);
}

ProjFit pca_projssar_fit(const WeightMatrix& w, const Eigen::VectorXd& y, const Eigen::MatrixXd& xi,
                         double inertia_cap, Eigen::Index n_components, const SearchOptions& search) {
  PcaScores pca = pca_scores(xi, inertia_cap);
  Eigen::Index j = pca.basis.n_scores();
  if (n_components > 0) j = std::min(j, n_components);
  return fit_on_scores(w, y, pca.scores.leftCols(j), pca.basis.prefix(j), search);
}

}  // namespace sigssar::est
