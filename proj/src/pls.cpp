#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/error.hpp"
#include "sigssar/estimators.hpp"

namespace sigssar::est {

namespace {

constexpr double kZeroCovariance = 1e-12;

}  // namespace

PlsBasis PlsBasis::prefix(Eigen::Index j) const {
  if (j < 1 || j > n_scores()) throw std::out_of_range("PlsBasis::prefix");
  PlsBasis out;
  out.weights = weights.leftCols(j);
  out.x_loadings = x_loadings.leftCols(j);
  out.y_loadings = y_loadings.head(j);
  out.column_centers = column_centers;
  out.y_center = y_center;
  return out;
}

PlsScores pls_scores(const Eigen::VectorXd& y, const Eigen::MatrixXd& xi, Eigen::Index n_scores) {
  const Eigen::Index n = xi.rows();
  const Eigen::Index s = xi.cols();
  if (y.size() != n) throw std::invalid_argument("pls_scores: y and xi disagree on the site count");
  if (n_scores < 1 || n_scores > std::min(n, s)) {
    throw std::invalid_argument(
        fmt::format("pls_scores: need 1 <= J <= min(n, s) (J = {}, n = {}, s = {})", n_scores, n, s));
  }

  PlsScores out;
  out.basis.column_centers = xi.colwise().mean();
  out.basis.y_center = y.mean();
  Eigen::MatrixXd x = xi.rowwise() - out.basis.column_centers;
  Eigen::VectorXd r = y.array() - out.basis.y_center;

  out.scores.resize(n, n_scores);
  out.basis.weights.resize(s, n_scores);
  out.basis.x_loadings.resize(s, n_scores);
  out.basis.y_loadings.resize(n_scores);

  Eigen::Index k = 0;
  for (; k < n_scores; ++k) {
    Eigen::VectorXd w = x.transpose() * r;
    const double norm = w.norm();
    if (norm < kZeroCovariance) break;
    w /= norm;
    const Eigen::VectorXd t = x * w;
    const double tt = t.squaredNorm();
    if (tt < kZeroCovariance) break;
    const Eigen::VectorXd p = x.transpose() * t / tt;
    const double q = r.dot(t) / tt;
    x.noalias() -= t * p.transpose();
    r -= q * t;
    out.scores.col(k) = t;
    out.basis.weights.col(k) = w;
    out.basis.x_loadings.col(k) = p;
    out.basis.y_loadings[k] = q;
  }
  if (k == 0) throw DataError("pls_scores: design matrix has no covariance with the response");
  if (k < n_scores) {
    out.truncated = true;
    out.scores.conservativeResize(n, k);
    out.basis = out.basis.prefix(k);
  }
  return out;
}

Eigen::MatrixXd project(const PlsBasis& basis, const Eigen::MatrixXd& xi_new) {
  if (xi_new.cols() != basis.weights.rows()) {
    throw std::invalid_argument(fmt::format("PLS projection expects {} columns, got {}",
                                            basis.weights.rows(), xi_new.cols()));
  }
  // P^T W is unit upper triangular for NIPALS weights.
  const Eigen::MatrixXd ptw = basis.x_loadings.transpose() * basis.weights;
  const Eigen::MatrixXd rotation =
      ptw.transpose().partialPivLu().solve(basis.weights.transpose()).transpose();
  return (xi_new.rowwise() - basis.column_centers) * rotation;
}

}  // namespace sigssar::est
