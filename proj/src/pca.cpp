#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/error.hpp"
#include "sigssar/estimators.hpp"

namespace sigssar::est {

PcaBasis PcaBasis::prefix(Eigen::Index j) const {
  if (j < 1 || j > n_scores()) throw std::out_of_range("PcaBasis::prefix");
  PcaBasis out = *this;
  out.directions = directions.leftCols(j);
  out.explained_inertia = explained_inertia.head(j);
  return out;
}

PcaScores pca_scores(const Eigen::MatrixXd& xi, double inertia_cap) {
  const Eigen::Index n = xi.rows();
  if (n < 2) throw DataError("pca_scores: need at least two rows");
  if (!(inertia_cap > 0.0 && inertia_cap <= 1.0)) {
    throw std::invalid_argument("pca_scores: inertia cap must lie in (0, 1]");
  }

  PcaScores out;
  PcaBasis& basis = out.basis;
  basis.input_width = xi.cols();
  const Eigen::RowVectorXd mean = xi.colwise().mean();
  const Eigen::RowVectorXd sd =
      ((xi.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(n - 1)).cwiseSqrt();
  for (Eigen::Index c = 0; c < xi.cols(); ++c) {
    if (sd[c] > 1e-12 * std::max(1.0, std::abs(mean[c]))) basis.kept_columns.push_back(c);
  }
  const auto kept = static_cast<Eigen::Index>(basis.kept_columns.size());
  if (kept == 0) throw DataError("pca_scores: every design column is constant");

  basis.column_centers.resize(kept);
  basis.column_scales.resize(kept);
  Eigen::MatrixXd z(n, kept);
  for (Eigen::Index c = 0; c < kept; ++c) {
    const Eigen::Index src = basis.kept_columns[static_cast<std::size_t>(c)];
    basis.column_centers[c] = mean[src];
    basis.column_scales[c] = sd[src];
    z.col(c) = (xi.col(src).array() - mean[src]) / sd[src];
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinV);
  const Eigen::VectorXd eig = svd.singularValues().array().square();
  const double total = eig.sum();
  const double tol = 1e-12 * eig[0];
  Eigen::Index positive = 0;
  while (positive < eig.size() && eig[positive] > tol) ++positive;
  out.positive_eigenvalues = positive;

  Eigen::Index keep = 1;
  double cumulative = eig[0] / total;
  while (keep < positive && cumulative + eig[keep] / total < inertia_cap) {
    cumulative += eig[keep] / total;
    ++keep;
  }
  basis.directions = svd.matrixV().leftCols(keep);
  basis.explained_inertia.resize(keep);
  double running = 0.0;
  for (Eigen::Index j = 0; j < keep; ++j) {
    running += eig[j] / total;
    basis.explained_inertia[j] = running;
  }
  out.scores = z * basis.directions;
  return out;
}

Eigen::MatrixXd project(const PcaBasis& basis, const Eigen::MatrixXd& xi_new) {
  if (xi_new.cols() != basis.input_width) {
    throw std::invalid_argument(fmt::format("PCA projection expects {} columns, got {}",
                                            basis.input_width, xi_new.cols()));
  }
  const auto kept = static_cast<Eigen::Index>(basis.kept_columns.size());
  Eigen::MatrixXd z(xi_new.rows(), kept);
  for (Eigen::Index c = 0; c < kept; ++c) {
    z.col(c) = (xi_new.col(basis.kept_columns[static_cast<std::size_t>(c)]).array() -
                basis.column_centers[c]) /
               basis.column_scales[c];
  }
  return z * basis.directions;
}

}  // namespace sigssar::est
