#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/error.hpp"
#include "sigssar/estimators.hpp"

namespace sigssar::est {

namespace {

constexpr double kMaxCondition = 1e12;

}  // namespace

RidgeProblem::RidgeProblem(const WeightMatrix& w, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& xi, RidgeSolver solver)
    : xi_(xi), y_(y), solver_(solver) {
  if (xi.rows() != y.size() || w.size() != y.size()) {
    throw std::invalid_argument(fmt::format("ridge: sizes disagree (W {}, y {}, xi {} rows)",
                                            w.size(), y.size(), xi.rows()));
  }
  wy_ = w.entries * y_;
  if (solver_ == RidgeSolver::primal) {
    const Eigen::Index s = xi_.cols();
    Eigen::MatrixXd g(s + 1, s + 1);
    g(0, 0) = static_cast<double>(xi_.rows());
    g.col(0).tail(s) = xi_.colwise().sum().transpose();
    g.bottomRightCorner(s, s).setZero();
    g.bottomRightCorner(s, s).selfadjointView<Eigen::Lower>().rankUpdate(xi_.transpose());
    gram_ = std::move(g);
  } else {
    column_means_ = xi_.colwise().mean();
    Eigen::MatrixXd centered = xi_.rowwise() - column_means_;
    kernel_ = centered * centered.transpose();
  }
}

Eigen::MatrixXd RidgeProblem::solve_primal(const Eigen::MatrixXd& z, double lambda,
                                           bool allow_min_norm, bool* used_min_norm) const {
  const Eigen::Index n = xi_.rows();
  const Eigen::Index s = xi_.cols();
  Eigen::MatrixXd a;
  if (gram_) {
    a = *gram_;
  } else {
    a.resize(s + 1, s + 1);
    a(0, 0) = static_cast<double>(n);
    a.col(0).tail(s) = xi_.colwise().sum().transpose();
    a.bottomRightCorner(s, s).setZero();
    a.bottomRightCorner(s, s).selfadjointView<Eigen::Lower>().rankUpdate(xi_.transpose());
  }
  a.diagonal().tail(s).array() += static_cast<double>(n) * lambda;

  Eigen::MatrixXd rhs(s + 1, z.cols());
  rhs.row(0) = z.colwise().sum();
  rhs.bottomRows(s) = xi_.transpose() * z;

  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(a);
  const bool ok = llt.info() == Eigen::Success && (lambda > 0.0 || 1.0 / llt.rcond() <= kMaxCondition);
  if (ok) {
    if (used_min_norm) *used_min_norm = false;
    return llt.solve(rhs);
  }
  if (lambda > 0.0) {
    throw SingularSystem(fmt::format("ridge system not positive definite at lambda = {}", lambda));
  }
  if (!allow_min_norm) {
    throw SingularSystem(fmt::format(
        "ridge normal equations are singular with lambda = 0 ({} sites, {} columns); use lambda > 0",
        n, s + 1));
  }
  Eigen::MatrixXd design(n, s + 1);
  design.col(0).setOnes();
  design.rightCols(s) = xi_;
  if (used_min_norm) *used_min_norm = true;
  return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(design).solve(z);
}

Eigen::MatrixXd RidgeProblem::solve_dual(const Eigen::MatrixXd& z, double lambda) const {
  const Eigen::Index n = xi_.rows();
  Eigen::RowVectorXd z_mean = z.colwise().mean();
  Eigen::MatrixXd zc = z.rowwise() - z_mean;
  Eigen::MatrixXd k = kernel_;
  k.diagonal().array() += static_cast<double>(n) * lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw SingularSystem(fmt::format("dual ridge system not positive definite at lambda = {}", lambda));
  }
  Eigen::MatrixXd dual = llt.solve(zc);
  Eigen::MatrixXd theta(xi_.cols() + 1, z.cols());
  // beta = Xc^T a, without materializing Xc
  theta.bottomRows(xi_.cols()) = xi_.transpose() * dual - column_means_.transpose() * dual.colwise().sum();
  theta.row(0) = z_mean - column_means_ * theta.bottomRows(xi_.cols());
  return theta;
}

Eigen::MatrixXd RidgeProblem::coefficients(const Eigen::MatrixXd& z, double lambda,
                                           bool allow_min_norm, bool* used_min_norm) const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("ridge: lambda must be nonnegative");
  if (z.rows() != xi_.rows()) throw std::invalid_argument("ridge: response length mismatch");
  if (solver_ == RidgeSolver::dual && lambda > 0.0) {
    if (used_min_norm) *used_min_norm = false;
    return solve_dual(z, lambda);
  }
  return solve_primal(z, lambda, allow_min_norm, used_min_norm);
}

double RidgeProblem::objective(double rho, double alpha, const Eigen::VectorXd& beta,
                               double lambda) const {
  const Eigen::VectorXd r = y_ - rho * wy_ - xi_ * beta - Eigen::VectorXd::Constant(y_.size(), alpha);
  return r.squaredNorm() / static_cast<double>(y_.size()) + lambda * beta.squaredNorm();
}

RidgeFit RidgeProblem::fit(double lambda, const RidgeOptions& options) const {
  const Eigen::Index n = y_.size();
  const Eigen::Index s = xi_.cols();
  Eigen::MatrixXd z(n, 2);
  z.col(0) = y_;
  z.col(1) = wy_;
  bool min_norm = false;
  const Eigen::MatrixXd theta = coefficients(z, lambda, options.allow_min_norm, &min_norm);

  // The coefficients are linear in the response, so the profiled objective
  // is an exact quadratic in rho: a - 2 b rho + c rho^2.
  Eigen::MatrixXd resid = z;
  resid.col(0).array() -= theta(0, 0);
  resid.col(1).array() -= theta(0, 1);
  resid -= xi_ * theta.bottomRows(s);
  const auto beta_y = theta.col(0).tail(s);
  const auto beta_w = theta.col(1).tail(s);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double a = resid.col(0).squaredNorm() * inv_n + lambda * beta_y.squaredNorm();
  const double b = resid.col(0).dot(resid.col(1)) * inv_n + lambda * beta_y.dot(beta_w);
  const double c = resid.col(1).squaredNorm() * inv_n + lambda * beta_w.squaredNorm();
  auto neg_profile = [&](double rho) { return -(a - 2.0 * b * rho + c * rho * rho); };
  const SearchResult best = maximize_1d(neg_profile, options.search);

  RidgeFit out;
  out.rho_hat = best.x;
  const Eigen::VectorXd coef = theta.col(0) - best.x * theta.col(1);
  out.alpha_hat = coef[0];
  out.beta_hat = coef.tail(s);
  out.lambda = lambda;
  out.min_norm = min_norm;
  out.objective = objective(out.rho_hat, out.alpha_hat, out.beta_hat, lambda);
  return out;
}

RidgeFit naive_penssar_fit(const WeightMatrix& w, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& xi, double lambda, const RidgeOptions& options) {
  return RidgeProblem(w, y, xi, options.solver).fit(lambda, options);
}

}  // namespace sigssar::est
