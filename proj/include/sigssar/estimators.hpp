#pragma once

// Signature-based spatial autoregressive estimators.
//
// All three estimators fit  Y = rho W Y + alpha 1 + M + eps  where M is a
// linear function of the signature design matrix xi:
//   * NaivePenSSAR: M = xi beta with a ridge penalty on beta; rho profiled
//     out of the penalized least-squares objective.
//   * PLS-ProjSSAR: M = zeta phi with zeta the PLS scores of (xi, Y); rho
//     maximizes the concentrated quasi-log-likelihood.
//   * PCA-ProjSSAR: as PLS-ProjSSAR with principal component scores of the
//     standardized design matrix.

#include <cstddef>
#include <optional>
#include <vector>
#include <variant>

#include <Eigen/Dense>

#include "sigssar/search.hpp"
#include "sigssar/spatial.hpp"

namespace sigssar::est {

using spatial::WeightMatrix;

// ---------------------------------------------------------------------------
// NaivePenSSAR

/// How the ridge normal equations are solved. `primal` factors the
/// (s+1) x (s+1) system (xi'^T xi' + n Lambda); `dual` solves the equivalent
/// n x n kernel system on column-centered xi, which is exact for lambda > 0
/// and much cheaper when s >> n. lambda == 0 always uses the primal system.
enum class RidgeSolver { primal, dual };

struct RidgeOptions {
  RidgeSolver solver = RidgeSolver::primal;
  /// With lambda == 0 and a singular system, fall back to the minimum-norm
  /// least-squares solution (flagged in the fit) instead of throwing.
  bool allow_min_norm = false;
  SearchOptions search{};
};

struct RidgeFit {
  double rho_hat = 0.0;
  double alpha_hat = 0.0;
  Eigen::VectorXd beta_hat;
  double lambda = 0.0;
  std::size_t order = 0;  // truncation order of the design, set by the caller
  double objective = 0.0;  // penalized objective at the fitted parameters
  bool min_norm = false;
};

/// Ridge system for one (W, Y, xi) triple, reusable across lambda values.
class RidgeProblem {
 public:
  RidgeProblem(const WeightMatrix& w, const Eigen::VectorXd& y, const Eigen::MatrixXd& xi,
               RidgeSolver solver = RidgeSolver::primal);

  /// Closed-form (alpha, beta) for each column of z: row 0 holds alpha.
  /// Throws SingularSystem when lambda == 0 and the system is singular
  /// (condition estimate above 1e12) unless allow_min_norm is set.
  Eigen::MatrixXd coefficients(const Eigen::MatrixXd& z, double lambda, bool allow_min_norm = false,
                               bool* used_min_norm = nullptr) const;

  /// (1/n) ||Y - rho W Y - alpha 1 - xi beta||^2 + lambda ||beta||^2
  double objective(double rho, double alpha, const Eigen::VectorXd& beta, double lambda) const;

  /// Runs the rho search and returns the fit at the optimum.
  RidgeFit fit(double lambda, const RidgeOptions& options = {}) const;

  Eigen::Index sites() const { return y_.size(); }

 private:
  Eigen::MatrixXd solve_primal(const Eigen::MatrixXd& z, double lambda, bool allow_min_norm,
                               bool* used_min_norm) const;
  Eigen::MatrixXd solve_dual(const Eigen::MatrixXd& z, double lambda) const;

  Eigen::MatrixXd xi_;
  Eigen::VectorXd y_;
  Eigen::VectorXd wy_;
  RidgeSolver solver_;
  std::optional<Eigen::MatrixXd> gram_;  // primal: xi'^T xi' (lower triangle valid)
  Eigen::RowVectorXd column_means_;      // dual
  Eigen::MatrixXd kernel_;               // dual: centered xi times its transpose
};

RidgeFit naive_penssar_fit(const WeightMatrix& w, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& xi, double lambda,
                           const RidgeOptions& options = {});

// ---------------------------------------------------------------------------
// PLS scores

struct PlsBasis {
  Eigen::MatrixXd weights;     // s x J, unit columns w^(k)
  Eigen::MatrixXd x_loadings;  // s x J, p^(k)
  Eigen::VectorXd y_loadings;  // J, q^(k)
  Eigen::RowVectorXd column_centers;
  double y_center = 0.0;

  Eigen::Index n_scores() const { return weights.cols(); }
  /// Basis of the first j scores (deflation makes them independent of J).
  PlsBasis prefix(Eigen::Index j) const;
};

struct PlsScores {
  Eigen::MatrixXd scores;  // n x J
  PlsBasis basis;
  bool truncated = false;  // cross-covariance vanished before J scores
};

/// NIPALS deflation on the column-centered design and centered response.
PlsScores pls_scores(const Eigen::VectorXd& y, const Eigen::MatrixXd& xi, Eigen::Index n_scores);

/// Scores of new rows: (xi_new - centers) W (P^T W)^{-1}.
Eigen::MatrixXd project(const PlsBasis& basis, const Eigen::MatrixXd& xi_new);

// ---------------------------------------------------------------------------
// PCA scores

struct PcaBasis {
  Eigen::Index input_width = 0;
  std::vector<Eigen::Index> kept_columns;  // non-constant columns of xi
  Eigen::RowVectorXd column_centers;       // over kept columns
  Eigen::RowVectorXd column_scales;        // sample standard deviations
  Eigen::MatrixXd directions;              // kept x J, orthonormal columns
  Eigen::VectorXd explained_inertia;       // cumulative fractions, length J

  Eigen::Index n_scores() const { return directions.cols(); }
  PcaBasis prefix(Eigen::Index j) const;
};

struct PcaScores {
  Eigen::MatrixXd scores;
  PcaBasis basis;
  Eigen::Index positive_eigenvalues = 0;
};

/// Keeps the largest J whose cumulative inertia is below `inertia_cap`
/// (at least one component). Throws DataError if every column is constant.
PcaScores pca_scores(const Eigen::MatrixXd& xi, double inertia_cap);

Eigen::MatrixXd project(const PcaBasis& basis, const Eigen::MatrixXd& xi_new);

// ---------------------------------------------------------------------------
// Projection estimators

using ProjBasis = std::variant<PlsBasis, PcaBasis>;

struct ProjFit {
  double rho_hat = 0.0;
  double alpha_hat = 0.0;
  Eigen::VectorXd phi_hat;
  double sigma2_hat = 0.0;
  ProjBasis basis;
  std::size_t order = 0;  // set by the caller
  double log_likelihood = 0.0;  // concentrated quasi-log-likelihood at rho_hat
};

/// Concentrated quasi-log-likelihood of Y on an intercept plus `scores`, as
/// a function of rho. Holds a QR factorization of (1, scores).
class ConcentratedLikelihood {
 public:
  /// Throws SingularSystem if (1, scores) is rank deficient.
  ConcentratedLikelihood(const WeightMatrix& w, const Eigen::VectorXd& y,
                         const Eigen::MatrixXd& scores);

  /// sigma^2(rho) = (1/n) ||residual of (I - rho W) Y on (1, scores)||^2
  double sigma2(double rho) const;
  /// -(n/2)(ln 2 pi + 1) - (n/2) ln sigma^2(rho) + ln det(I - rho W).
  /// Throws InadmissibleRho where the log-determinant is undefined.
  double operator()(double rho) const;
  /// (alpha, phi) at rho, stacked.
  Eigen::VectorXd coefficients(double rho) const;

 private:
  WeightMatrix w_;
  Eigen::Index n_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::VectorXd y_, wy_;
  Eigen::VectorXd resid_y_, resid_wy_;
};

/// Shared machinery of both projection estimators: rho by concentrated
/// likelihood, then (alpha, phi) and sigma^2 in closed form.
ProjFit fit_on_scores(const WeightMatrix& w, const Eigen::VectorXd& y,
                      const Eigen::MatrixXd& scores, ProjBasis basis,
                      const SearchOptions& search = {});

ProjFit pls_projssar_fit(const WeightMatrix& w, const Eigen::VectorXd& y,
                         const Eigen::MatrixXd& xi, Eigen::Index n_scores,
                         const SearchOptions& search = {});

/// n_components = 0 keeps every component allowed by the inertia cap;
/// otherwise the first min(n_components, cap count) are used.
ProjFit pca_projssar_fit(const WeightMatrix& w, const Eigen::VectorXd& y,
                         const Eigen::MatrixXd& xi, double inertia_cap = 0.95,
                         Eigen::Index n_components = 0, const SearchOptions& search = {});

// ---------------------------------------------------------------------------
// Prediction

using Fit = std::variant<RidgeFit, ProjFit>;

double rho_hat(const Fit& fit);
std::size_t order(const Fit& fit);

/// alpha 1 + M for the rows of xi (M = xi beta or projected scores times phi).
Eigen::VectorXd mean_component(const Fit& fit, const Eigen::MatrixXd& xi);

/// Reduced form (I - rho W)^{-1} (alpha 1 + M) over all sites of w_full.
Eigen::VectorXd predict(const Fit& fit, const WeightMatrix& w_full, const Eigen::MatrixXd& xi_full);

}  // namespace sigssar::est
