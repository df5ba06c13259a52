#pragma once

// Validation-set selection of the truncation order and the estimator's own
// hyperparameter (ridge lambda, PLS score count, PCA score count under the
// inertia cap).
//
// Fits use W restricted to train sites, validation predictions the reduced
// form over train + validation sites; both restricted matrices are
// re-row-normalized.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sigssar/estimators.hpp"
#include "sigssar/sigcore.hpp"
#include "sigssar/spatial.hpp"

namespace sigssar::selection {

enum class Estimator { naive_penssar, pls_projssar, pca_projssar };

std::string_view to_string(Estimator e);
/// Accepts naive-penssar, pls-projssar, pca-projssar. Throws UsageError.
Estimator parse_estimator(std::string_view tag);

/// 1e-6, 1e-5, ..., 1e3
std::vector<double> default_lambda_grid();

struct HyperGrid {
  std::size_t d_max = 16;
  std::vector<double> lambda_grid = default_lambda_grid();
  Eigen::Index j_max = 30;
  double inertia_cap = 0.95;
  std::size_t coefficient_cap = 10000;
};

/// Throws std::invalid_argument if the grid cannot produce a single order
/// for an alphabet of `dim` letters.
void validate(const HyperGrid& grid, std::size_t dim);

/// Orders D >= 1 with sig_length(p + 1, D) <= cap (time augmentation adds a
/// coordinate). Throws std::invalid_argument if none qualifies.
std::vector<std::size_t> feasible_orders(std::size_t p, std::size_t cap);

/// Same for an explicit alphabet size.
std::vector<std::size_t> feasible_orders_for_dim(std::size_t dim, std::size_t cap);

struct GridPoint {
  std::size_t order = 0;
  double lambda = std::numeric_limits<double>::quiet_NaN();  // ridge only
  Eigen::Index n_scores = 0;                                  // projection fits only
  double validation_rmse = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct SelectionReport {
  Estimator estimator = Estimator::pls_projssar;
  std::vector<GridPoint> points;  // D ascending, then lambda / J ascending
  std::size_t chosen = 0;

  const GridPoint& best() const { return points.at(chosen); }
};

/// Everything selection needs about one dataset. `design` holds the
/// signature coefficients at `max_order`; lower orders are its leading
/// columns.
struct Problem {
  Eigen::MatrixXd design;
  std::size_t dim = 0;
  std::size_t max_order = 0;
  Eigen::VectorXd y;
  spatial::WeightMatrix w;
};

/// Builds the design matrix at the largest order allowed by the grid.
Problem make_problem(std::span<const sig::Path> paths, Eigen::VectorXd y, spatial::WeightMatrix w,
                     const HyperGrid& grid, sig::Augmentation aug = {});

/// Leading columns of the design for order D.
Eigen::MatrixXd design_at(const Problem& problem, std::size_t order);

struct Options {
  est::RidgeSolver ridge_solver = est::RidgeSolver::primal;
};

struct Selection {
  est::Fit fit;
  SelectionReport report;
};

/// Evaluates every grid point and returns the train fit at the smallest
/// validation RMSE. Throws std::runtime_error (with per-point diagnostics)
/// if every grid point fails.
Selection select_and_fit(Estimator estimator, const Problem& problem,
                         const spatial::SplitAssignment& split, const HyperGrid& grid,
                         const Options& options = {});

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Predictions at the test sites using W over all sites.
Eigen::VectorXd predict_test(const est::Fit& fit, const Problem& problem,
                             const spatial::SplitAssignment& split);

}  // namespace sigssar::selection
