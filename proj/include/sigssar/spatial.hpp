#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sigssar::spatial {

/// n x 2 planar site locations.
using Coordinates = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Interior guard for rho: the search domain is [-1 + kRhoGuard, 1 - kRhoGuard].
inline constexpr double kRhoGuard = 1e-6;
inline constexpr double kRhoMin = -1.0 + kRhoGuard;
inline constexpr double kRhoMax = 1.0 - kRhoGuard;

/// Dense n x n spatial weights. Rows sum to 1, or are all zero for sites
/// without neighbors (possible only after restriction to a subset).
struct WeightMatrix {
  Eigen::MatrixXd entries;

  Eigen::Index size() const { return entries.rows(); }
};

/// Row-normalized k-nearest-neighbor weights (self excluded). Ties in
/// distance go to the lower site index. Throws std::invalid_argument when
/// k < 1 or k >= n.
WeightMatrix knn_weights(const Coordinates& coords, int k);

/// Sub-matrix on `sites` (in the given order) with rows re-normalized to sum
/// to one; rows left without any neighbor stay zero.
WeightMatrix restrict_to(const WeightMatrix& w, std::span<const Eigen::Index> sites);

/// ln det(I - rho W) through a dense LU factorization. Throws InadmissibleRho
/// if a pivot is within 1e-12 of zero or the determinant is negative.
double log_det_factor(const WeightMatrix& w, double rho);

/// Solves (I - rho W) y = rhs. Throws InadmissibleRho when singular.
Eigen::VectorXd solve_reduced_form(const WeightMatrix& w, double rho, const Eigen::VectorXd& rhs);

enum class Label : std::uint8_t { train, validation, test };

std::string_view to_string(Label label);

struct SplitAssignment {
  std::vector<Label> labels;

  std::vector<Eigen::Index> indices(Label label) const;
  /// Train then validation sites, each block in increasing site order.
  std::vector<Eigen::Index> train_and_validation() const;
  std::size_t count(Label label) const;
};

/// Throws DataError unless all three labels are present.
void validate(const SplitAssignment& split);

struct KMeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;
};

/// Lloyd's K-means on the coordinates, then two distinct clusters drawn at
/// random become validation and test; everything else is train.
SplitAssignment kmeans_split(const Coordinates& coords, int clusters, std::uint64_t seed,
                             KMeansOptions options = {});

/// Cluster labels from seeded Lloyd's K-means. Exposed for testing.
std::vector<int> kmeans_labels(const Coordinates& coords, int clusters, std::uint64_t seed,
                               KMeansOptions options = {});

/// Uniform random partition. Validation and test sizes are rounded to the
/// nearest integer, the remainder goes to train.
SplitAssignment ordinary_split(std::size_t n, std::array<double, 3> fractions, std::uint64_t seed);

}  // namespace sigssar::spatial
