#include "sigssar/selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/error.hpp"

namespace sigssar::selection {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Subsets {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> train_val;
  Eigen::Index n_val = 0;
  spatial::WeightMatrix w_train;
  spatial::WeightMatrix w_train_val;
  Eigen::VectorXd y_train;
  Eigen::VectorXd y_val;
};

Subsets make_subsets(const Problem& problem, const spatial::SplitAssignment& split) {
  Subsets s;
  s.train = split.indices(spatial::Label::train);
  const auto val = split.indices(spatial::Label::validation);
  if (s.train.empty() || val.empty()) throw DataError("selection needs nonempty train and validation sets");
  s.train_val = split.train_and_validation();
  s.n_val = static_cast<Eigen::Index>(val.size());
  s.w_train = spatial::restrict_to(problem.w, s.train);
  s.w_train_val = spatial::restrict_to(problem.w, s.train_val);
  s.y_train = problem.y(s.train);
  s.y_val = problem.y(val);
  return s;
}

// Tracks the running argmin; strict comparison keeps the earliest grid point
// on ties, which is the smaller order and then the smaller lambda / J.
struct Best {
  std::optional<est::Fit> fit;
  std::size_t index = 0;
  double rmse = std::numeric_limits<double>::infinity();

  void offer(est::Fit&& candidate, std::size_t at, double value) {
    if (value < rmse) {
      rmse = value;
      index = at;
      fit = std::move(candidate);
    }
  }
};

}  // namespace

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::naive_penssar: return "naive-penssar";
    case Estimator::pls_projssar: return "pls-projssar";
    case Estimator::pca_projssar: return "pca-projssar";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view tag) {
  for (Estimator e : {Estimator::naive_penssar, Estimator::pls_projssar, Estimator::pca_projssar}) {
    if (tag == to_string(e)) return e;
  }
  throw UsageError(fmt::format("unknown estimator '{}' (expected naive-penssar, pls-projssar or pca-projssar)", tag));
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int e = -6; e <= 3; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

std::vector<std::size_t> feasible_orders_for_dim(std::size_t dim, std::size_t cap) {
  std::vector<std::size_t> orders;
  for (std::size_t d = 1;; ++d) {
    std::size_t len = 0;
    try {
      len = sig::sig_length(dim, d);
    } catch (const std::overflow_error&) {
      break;
    }
    if (len > cap) break;
    orders.push_back(d);
  }
  if (orders.empty()) {
    throw std::invalid_argument(
        fmt::format("coefficient cap {} admits no truncation order for dimension {}", cap, dim));
  }
  return orders;
}

std::vector<std::size_t> feasible_orders(std::size_t p, std::size_t cap) {
  return feasible_orders_for_dim(p + 1, cap);
}

void validate(const HyperGrid& grid, std::size_t dim) {
  if (grid.d_max < 1) throw std::invalid_argument("d_max must be at least 1");
  if (grid.coefficient_cap < dim) {
    throw std::invalid_argument(fmt::format("coefficient cap {} is below the order-1 length {}",
                                            grid.coefficient_cap, dim));
  }
  if (grid.j_max < 1) throw std::invalid_argument("j_max must be at least 1");
  if (!(grid.inertia_cap > 0.0 && grid.inertia_cap <= 1.0)) {
    throw std::invalid_argument("inertia cap must lie in (0, 1]");
  }
  for (double l : grid.lambda_grid) {
    if (!(l >= 0.0)) throw std::invalid_argument("lambda grid values must be nonnegative");
  }
}

Problem make_problem(std::span<const sig::Path> paths, Eigen::VectorXd y, spatial::WeightMatrix w,
                     const HyperGrid& grid, sig::Augmentation aug) {
  if (paths.empty()) throw DataError("no paths");
  const auto n = static_cast<Eigen::Index>(paths.size());
  if (y.size() != n) {
    throw DataError(fmt::format("{} paths but {} responses", n, y.size()));
  }
  if (w.size() != n) throw DataError(fmt::format("{} paths but W has {} sites", n, w.size()));
  Problem problem;
  problem.dim = static_cast<std::size_t>(paths.front().dim()) + (aug.time ? 1 : 0);
  validate(grid, problem.dim);
  const auto orders = feasible_orders_for_dim(problem.dim, grid.coefficient_cap);
  problem.max_order = std::min(orders.back(), grid.d_max);
  problem.design = sig::build_design_matrix(paths, problem.max_order, aug);
  problem.y = std::move(y);
  problem.w = std::move(w);
  return problem;
}

Eigen::MatrixXd design_at(const Problem& problem, std::size_t order) {
  if (order < 1 || order > problem.max_order) {
    throw std::out_of_range(fmt::format("order {} outside 1..{}", order, problem.max_order));
  }
  return problem.design.leftCols(static_cast<Eigen::Index>(sig::sig_length(problem.dim, order)));
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() == 0) throw std::invalid_argument("rmse: size mismatch");
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

Selection select_and_fit(Estimator estimator, const Problem& problem,
                         const spatial::SplitAssignment& split, const HyperGrid& grid,
                         const Options& options) {
  validate(grid, problem.dim);
  if (static_cast<Eigen::Index>(split.labels.size()) != problem.y.size()) {
    throw DataError(fmt::format("split covers {} sites, data has {}", split.labels.size(), problem.y.size()));
  }
  const Subsets sub = make_subsets(problem, split);
  const auto n_train = static_cast<Eigen::Index>(sub.train.size());

  std::vector<double> lambdas = grid.lambda_grid;
  std::stable_sort(lambdas.begin(), lambdas.end());

  SelectionReport report;
  report.estimator = estimator;
  Best best;

  auto validation_rmse = [&](const est::Fit& fit, const Eigen::MatrixXd& xi_tv) {
    const Eigen::VectorXd pred = est::predict(fit, sub.w_train_val, xi_tv);
    return rmse(pred.tail(sub.n_val), sub.y_val);
  };

  const std::size_t last_order = std::min(grid.d_max, problem.max_order);
  for (std::size_t order = 1; order <= last_order; ++order) {
    const Eigen::MatrixXd xi = design_at(problem, order);
    const Eigen::MatrixXd xi_train = xi(sub.train, Eigen::all);
    const Eigen::MatrixXd xi_tv = xi(sub.train_val, Eigen::all);
    const Eigen::Index s = xi.cols();

    if (estimator == Estimator::naive_penssar) {
      auto start = Clock::now();
      std::optional<est::RidgeProblem> ridge;
      std::string setup_error;
      try {
        ridge.emplace(sub.w_train, sub.y_train, xi_train, options.ridge_solver);
      } catch (const std::exception& e) {
        setup_error = e.what();
      }
      for (double lambda : lambdas) {
        GridPoint point;
        point.order = order;
        point.lambda = lambda;
        if (!ridge) {
          point.error = setup_error;
        } else {
          try {
            est::RidgeFit fit = ridge->fit(lambda);
            fit.order = order;
            est::Fit wrapped = std::move(fit);
            point.validation_rmse = validation_rmse(wrapped, xi_tv);
            best.offer(std::move(wrapped), report.points.size(), point.validation_rmse);
          } catch (const std::exception& e) {
            point.error = e.what();
          }
        }
        point.seconds = seconds_since(start);
        report.points.push_back(std::move(point));
        start = Clock::now();
      }
      continue;
    }

    const Eigen::Index j_cap = std::min({grid.j_max, n_train - 2, s});
    if (j_cap < 1) {
      GridPoint point;
      point.order = order;
      point.n_scores = 1;
      point.error = fmt::format("no admissible score count (n_train = {}, s = {})", n_train, s);
      report.points.push_back(std::move(point));
      continue;
    }

    auto start = Clock::now();
    Eigen::MatrixXd scores;
    std::optional<est::ProjBasis> basis;
    std::string setup_error;
    Eigen::Index available = 0;
    try {
      if (estimator == Estimator::pls_projssar) {
        est::PlsScores pls = est::pls_scores(sub.y_train, xi_train, j_cap);
        scores = std::move(pls.scores);
        available = pls.basis.n_scores();
        basis = std::move(pls.basis);
      } else {
        est::PcaScores pca = est::pca_scores(xi_train, grid.inertia_cap);
        available = std::min(pca.basis.n_scores(), j_cap);
        scores = std::move(pca.scores);
        basis = std::move(pca.basis);
      }
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    const Eigen::Index j_last = basis ? available : 1;
    for (Eigen::Index j = 1; j <= j_last; ++j) {
      GridPoint point;
      point.order = order;
      point.n_scores = j;
      if (!basis) {
        point.error = setup_error;
      } else {
        try {
          est::ProjBasis prefix = std::visit([&](const auto& b) -> est::ProjBasis { return b.prefix(j); }, *basis);
          est::ProjFit fit = est::fit_on_scores(sub.w_train, sub.y_train, scores.leftCols(j), std::move(prefix));
          fit.order = order;
          est::Fit wrapped = std::move(fit);
          point.validation_rmse = validation_rmse(wrapped, xi_tv);
          best.offer(std::move(wrapped), report.points.size(), point.validation_rmse);
        } catch (const std::exception& e) {
          point.error = e.what();
        }
      }
      point.seconds = seconds_since(start);
      report.points.push_back(std::move(point));
      start = Clock::now();
    }
  }

  if (!best.fit) {
    std::string diag;
    for (const auto& p : report.points) {
      diag += fmt::format("\n  D={} lambda={} J={}: {}", p.order, p.lambda, p.n_scores, p.error);
    }
    throw std::runtime_error(fmt::format("{}: every grid point failed{}", to_string(estimator), diag));
  }
  report.chosen = best.index;
  return Selection{std::move(*best.fit), std::move(report)};
}

Eigen::VectorXd predict_test(const est::Fit& fit, const Problem& problem,
                             const spatial::SplitAssignment& split) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(problem.y.size()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  const spatial::WeightMatrix w_full = spatial::restrict_to(problem.w, all);
  const Eigen::VectorXd pred = est::predict(fit, w_full, design_at(problem, est::order(fit)));
  return pred(split.indices(spatial::Label::test));
}

}  // namespace sigssar::selection
