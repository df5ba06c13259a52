#pragma once

// Truncated signatures of piecewise-linear multivariate paths.
//
// A Path is a set of time-stamped samples interpreted as the polyline through
// them. Its signature up to order D is computed exactly by multiplying the
// closed-form signatures of the linear segments (Chen's identity) in the
// truncated tensor algebra. Coefficients are flattened level by level, words
// of equal length in lexicographic order, so word (i1, ..., id) over a
// p-letter alphabet sits at offset sig_length(p, d - 1) + sum_j i_j p^(d-j)
// (0-based letters).

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sigssar::sig {

struct Path {
  Eigen::VectorXd times;   // strictly increasing, length m >= 2 for signatures
  Eigen::MatrixXd values;  // m x p, row j = X(t_j)

  Path() = default;
  /// Validates and takes ownership. Throws DataError on invariant violations.
  Path(Eigen::VectorXd t, Eigen::MatrixXd v);

  Eigen::Index samples() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

/// Throws DataError unless times are strictly increasing, sizes agree and
/// every entry is finite.
void validate(const Path& x);

/// Number of words of length 1..order over a dim-letter alphabet. Throws
/// std::overflow_error if the count does not fit in std::size_t.
std::size_t sig_length(std::size_t dim, std::size_t order);

/// Element of the truncated tensor algebra: levels 0..order, level d dense
/// with dim^d entries in lexicographic word order.
class TensorSeq {
 public:
  /// The unit element (1, 0, 0, ...).
  TensorSeq(std::size_t dim, std::size_t order);

  std::size_t dim() const { return dim_; }
  std::size_t order() const { return levels_.size() - 1; }

  std::span<const double> level(std::size_t d) const { return levels_.at(d); }
  std::span<double> level(std::size_t d) { return levels_.at(d); }

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> levels_;
};

/// Truncated shifted-signature coefficient vector (levels 1..order).
struct SigVector {
  std::size_t dim = 0;
  std::size_t order = 0;
  Eigen::VectorXd coeffs;
};

/// Prepends a zero sample one inter-sample gap before the first stamp.
Path basepoint_augment(const Path& x);

/// Appends time, affinely rescaled to [0, 1], as the last coordinate.
Path time_augment(const Path& x);

/// Signature of the linear segment with the given increment:
/// level d = increment^{(x)d} / d!.
TensorSeq segment_signature(std::span<const double> increment, std::size_t order);

/// Truncated tensor product. Throws std::invalid_argument on dim/order mismatch.
TensorSeq chen_concat(const TensorSeq& left, const TensorSeq& right);

/// Full truncated signature (level 0 included) of the polyline through x.
TensorSeq signature_levels(const Path& x, std::size_t order);

/// Flattens levels 1..order of s into the word-ordered coefficient vector.
SigVector flatten(const TensorSeq& s);

/// Throws DataError if x has fewer than two samples; std::domain_error if a
/// coefficient overflows to a non-finite value.
SigVector signature(const Path& x, std::size_t order);

/// Flat index of a word (0-based letters) in a SigVector over dim letters.
std::size_t word_index(std::span<const std::size_t> word, std::size_t dim);

struct Augmentation {
  bool basepoint = true;
  bool time = true;
};

/// Applies time augmentation first (if enabled), then basepoint augmentation.
Path augment(const Path& x, Augmentation aug);

/// Row i = signature(augment(paths[i]), order).coeffs. All paths must share
/// their dimension.
Eigen::MatrixXd build_design_matrix(std::span<const Path> paths, std::size_t order,
                                    Augmentation aug = {});

}  // namespace sigssar::sig
