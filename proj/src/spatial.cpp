#include "sigssar/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/error.hpp"
#include "sigssar/rng.hpp"

namespace sigssar::spatial {

WeightMatrix knn_weights(const Coordinates& coords, int k) {
  const Eigen::Index n = coords.rows();
  if (k < 1 || k >= n) {
    throw std::invalid_argument(fmt::format("knn_weights: need 1 <= k < n (k = {}, n = {})", k, n));
  }
  if (!coords.allFinite()) throw DataError("knn_weights: non-finite coordinates");
  WeightMatrix w{Eigen::MatrixXd::Zero(n, n)};
  const double weight = 1.0 / k;
  std::vector<std::pair<double, Eigen::Index>> cand;
  cand.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    cand.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back((coords.row(i) - coords.row(j)).squaredNorm(), j);
    }
    // pair ordering breaks distance ties by lower index
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int r = 0; r < k; ++r) w.entries(i, cand[static_cast<std::size_t>(r)].second) = weight;
  }
  return w;
}

WeightMatrix restrict_to(const WeightMatrix& w, std::span<const Eigen::Index> sites) {
  const auto m = static_cast<Eigen::Index>(sites.size());
  WeightMatrix out{Eigen::MatrixXd::Zero(m, m)};
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) out.entries(a, b) = w.entries(sites[a], sites[b]);
    const double total = out.entries.row(a).sum();
    if (total > 0.0) out.entries.row(a) /= total;
  }
  return out;
}

double log_det_factor(const WeightMatrix& w, double rho) {
  const Eigen::Index n = w.size();
  if (rho == 0.0) return 0.0;
  Eigen::MatrixXd a = -rho * w.entries;
  a.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const auto& packed = lu.matrixLU();
  double log_abs = 0.0;
  int sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pivot = packed(i, i);
    if (std::abs(pivot) <= 1e-12) {
      throw InadmissibleRho(rho, fmt::format("I - rho W is singular at rho = {}", rho));
    }
    if (pivot < 0.0) sign = -sign;
    log_abs += std::log(std::abs(pivot));
  }
  if (sign < 0) {
    throw InadmissibleRho(rho, fmt::format("det(I - rho W) is negative at rho = {}", rho));
  }
  return log_abs;
}

Eigen::VectorXd solve_reduced_form(const WeightMatrix& w, double rho, const Eigen::VectorXd& rhs) {
  if (rhs.size() != w.size()) {
    throw std::invalid_argument(fmt::format("solve_reduced_form: W has {} sites, rhs has {}",
                                            w.size(), rhs.size()));
  }
  if (rho == 0.0) return rhs;
  Eigen::MatrixXd a = -rho * w.entries;
  a.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const auto& packed = lu.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (std::abs(packed(i, i)) <= 1e-12) {
      throw InadmissibleRho(rho, fmt::format("I - rho W is singular at rho = {}", rho));
    }
  }
  return lu.solve(rhs);
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::train: return "train";
    case Label::validation: return "validation";
    case Label::test: return "test";
  }
  return "unknown";
}

std::vector<Eigen::Index> SplitAssignment::indices(Label label) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

std::vector<Eigen::Index> SplitAssignment::train_and_validation() const {
  auto out = indices(Label::train);
  auto val = indices(Label::validation);
  out.insert(out.end(), val.begin(), val.end());
  return out;
}

std::size_t SplitAssignment::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void validate(const SplitAssignment& split) {
  for (Label l : {Label::train, Label::validation, Label::test}) {
    if (split.count(l) == 0) {
      throw DataError(fmt::format("split has no {} sites", to_string(l)));
    }
  }
}

std::vector<int> kmeans_labels(const Coordinates& coords, int clusters, std::uint64_t seed,
                               KMeansOptions options) {
  const Eigen::Index n = coords.rows();
  if (clusters < 1 || clusters > n) {
    throw std::invalid_argument(fmt::format("kmeans: need 1 <= K <= n (K = {}, n = {})", clusters, n));
  }
  auto gen = make_engine(seed, Stream::kmeans);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), gen);

  Coordinates centers(clusters, 2);
  for (int c = 0; c < clusters; ++c) centers.row(c) = coords.row(order[static_cast<std::size_t>(c)]);

  std::vector<int> label(static_cast<std::size_t>(n), 0);
  auto assign = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < clusters; ++c) {
        const double d = (coords.row(i) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          label[static_cast<std::size_t>(i)] = c;
        }
      }
    }
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    assign();
    Coordinates next = Coordinates::Zero(clusters, 2);
    std::vector<int> size(static_cast<std::size_t>(clusters), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = label[static_cast<std::size_t>(i)];
      next.row(c) += coords.row(i);
      ++size[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < clusters; ++c) {
      if (size[static_cast<std::size_t>(c)] > 0) {
        next.row(c) /= size[static_cast<std::size_t>(c)];
        continue;
      }
      // empty cluster: re-seed at the point farthest from its own centroid
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (coords.row(i) - centers.row(label[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      next.row(c) = coords.row(far);
      label[static_cast<std::size_t>(far)] = c;
    }
    const double shift = (next - centers).rowwise().norm().maxCoeff();
    centers = next;
    if (shift < options.tolerance) break;
  }
  assign();
  return label;
}

SplitAssignment kmeans_split(const Coordinates& coords, int clusters, std::uint64_t seed,
                             KMeansOptions options) {
  if (clusters < 3) throw std::invalid_argument("kmeans_split needs K >= 3");
  const auto label = kmeans_labels(coords, clusters, seed, options);
  std::vector<int> ids(static_cast<std::size_t>(clusters));
  std::iota(ids.begin(), ids.end(), 0);
  auto gen = make_engine(seed, Stream::cluster_pick);
  std::shuffle(ids.begin(), ids.end(), gen);
  SplitAssignment split;
  split.labels.resize(label.size(), Label::train);
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] == ids[0]) split.labels[i] = Label::validation;
    if (label[i] == ids[1]) split.labels[i] = Label::test;
  }
  validate(split);
  return split;
}

SplitAssignment ordinary_split(std::size_t n, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f > 0.0)) throw std::invalid_argument("ordinary_split: fractions must be positive");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("ordinary_split: fractions must sum to 1");
  }
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions[1]));
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions[2]));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n) {
    throw DataError(fmt::format("ordinary_split: an empty part for n = {}", n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto gen = make_engine(seed, Stream::ordinary);
  std::shuffle(order.begin(), order.end(), gen);
  SplitAssignment split;
  split.labels.assign(n, Label::train);
  for (std::size_t r = 0; r < n_val; ++r) split.labels[order[r]] = Label::validation;
  for (std::size_t r = n_val; r < n_val + n_test; ++r) split.labels[order[r]] = Label::test;
  return split;
}

}  // namespace sigssar::spatial
