#include "sigssar/sigcore.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/error.hpp"

namespace sigssar::sig {

Path::Path(Eigen::VectorXd t, Eigen::MatrixXd v) : times(std::move(t)), values(std::move(v)) {
  validate(*this);
}

void validate(const Path& x) {
  if (x.times.size() != x.values.rows()) {
    throw DataError(fmt::format("path has {} time stamps but {} samples", x.times.size(),
                                x.values.rows()));
  }
  if (x.values.cols() < 1) throw DataError("path dimension must be at least 1");
  for (Eigen::Index j = 0; j < x.times.size(); ++j) {
    if (!std::isfinite(x.times[j])) throw DataError("non-finite time stamp");
    if (j > 0 && !(x.times[j] > x.times[j - 1])) {
      throw DataError(fmt::format("time stamps not strictly increasing at sample {}", j));
    }
  }
  if (!x.values.allFinite()) throw DataError("non-finite path value");
}

std::size_t sig_length(std::size_t dim, std::size_t order) {
  if (dim == 0 || order == 0) throw std::invalid_argument("sig_length needs dim >= 1 and order >= 1");
  if (dim == 1) return order;
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  std::size_t power = 1;
  for (std::size_t d = 1; d <= order; ++d) {
    if (power > kMax / dim) throw std::overflow_error("signature length overflows size_t");
    power *= dim;
    if (total > kMax - power) throw std::overflow_error("signature length overflows size_t");
    total += power;
  }
  return total;
}

TensorSeq::TensorSeq(std::size_t dim, std::size_t order) : dim_(dim) {
  if (dim == 0 || order == 0) throw std::invalid_argument("TensorSeq needs dim >= 1 and order >= 1");
  levels_.resize(order + 1);
  std::size_t size = 1;
  for (std::size_t d = 0; d <= order; ++d) {
    levels_[d].assign(size, 0.0);
    size *= dim;
  }
  levels_[0][0] = 1.0;
}

Path basepoint_augment(const Path& x) {
  const Eigen::Index m = x.samples();
  const double gap = m >= 2 ? x.times[1] - x.times[0] : 1.0;
  Path out;
  out.times.resize(m + 1);
  out.times[0] = x.times[0] - gap;
  out.times.tail(m) = x.times;
  out.values.resize(m + 1, x.dim());
  out.values.row(0).setZero();
  out.values.bottomRows(m) = x.values;
  return out;
}

Path time_augment(const Path& x) {
  const Eigen::Index m = x.samples();
  Path out;
  out.times = x.times;
  out.values.resize(m, x.dim() + 1);
  out.values.leftCols(x.dim()) = x.values;
  const double start = x.times[0];
  const double span = x.times[m - 1] - start;
  for (Eigen::Index j = 0; j < m; ++j) {
    out.values(j, x.dim()) = span > 0.0 ? (x.times[j] - start) / span : 0.0;
  }
  return out;
}

TensorSeq segment_signature(std::span<const double> increment, std::size_t order) {
  const std::size_t p = increment.size();
  TensorSeq s(p, order);
  auto first = s.level(1);
  std::copy(increment.begin(), increment.end(), first.begin());
  for (std::size_t d = 2; d <= order; ++d) {
    auto prev = s.level(d - 1);
    auto cur = s.level(d);
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t a = 0; a < prev.size(); ++a) {
      const double scaled = prev[a] * inv_d;
      double* row = cur.data() + a * p;
      for (std::size_t b = 0; b < p; ++b) row[b] = scaled * increment[b];
    }
  }
  return s;
}

TensorSeq chen_concat(const TensorSeq& left, const TensorSeq& right) {
  if (left.dim() != right.dim() || left.order() != right.order()) {
    throw std::invalid_argument(fmt::format("chen_concat: mismatch (dim {} vs {}, order {} vs {})",
                                            left.dim(), right.dim(), left.order(), right.order()));
  }
  const std::size_t order = left.order();
  TensorSeq out(left.dim(), order);
  for (std::size_t d = 1; d <= order; ++d) {
    auto dst = out.level(d);
    for (std::size_t j = 0; j <= d; ++j) {
      auto l = left.level(j);
      auto r = right.level(d - j);
      const std::size_t stride = r.size();
      for (std::size_t a = 0; a < l.size(); ++a) {
        const double la = l[a];
        if (la == 0.0) continue;
        double* row = dst.data() + a * stride;
        for (std::size_t b = 0; b < stride; ++b) row[b] += la * r[b];
      }
    }
  }
  return out;
}

TensorSeq signature_levels(const Path& x, std::size_t order) {
  if (x.samples() < 2) throw DataError("signature needs at least two samples");
  const auto p = static_cast<std::size_t>(x.dim());
  sig_length(p, order);  // overflow check before allocating
  TensorSeq acc(p, order);
  std::vector<double> inc(p);
  for (Eigen::Index j = 1; j < x.samples(); ++j) {
    for (std::size_t c = 0; c < p; ++c) inc[c] = x.values(j, c) - x.values(j - 1, c);
    acc = chen_concat(acc, segment_signature(inc, order));
  }
  return acc;
}

SigVector flatten(const TensorSeq& s) {
  SigVector out;
  out.dim = s.dim();
  out.order = s.order();
  out.coeffs.resize(static_cast<Eigen::Index>(sig_length(s.dim(), s.order())));
  Eigen::Index at = 0;
  for (std::size_t d = 1; d <= s.order(); ++d) {
    for (double v : s.level(d)) out.coeffs[at++] = v;
  }
  return out;
}

SigVector signature(const Path& x, std::size_t order) {
  SigVector out = flatten(signature_levels(x, order));
  if (!out.coeffs.allFinite()) {
    throw std::domain_error(fmt::format("signature at order {} has non-finite coefficients", order));
  }
  return out;
}

std::size_t word_index(std::span<const std::size_t> word, std::size_t dim) {
  if (word.empty()) throw std::invalid_argument("word_index: empty word");
  std::size_t offset = word.size() > 1 ? sig_length(dim, word.size() - 1) : 0;
  std::size_t within = 0;
  for (std::size_t letter : word) {
    if (letter >= dim) throw std::out_of_range("word_index: letter out of alphabet");
    within = within * dim + letter;
  }
  return offset + within;
}

Path augment(const Path& x, Augmentation aug) {
  Path out = aug.time ? time_augment(x) : x;
  if (aug.basepoint) out = basepoint_augment(out);
  return out;
}

Eigen::MatrixXd build_design_matrix(std::span<const Path> paths, std::size_t order,
                                    Augmentation aug) {
  if (paths.empty()) throw DataError("build_design_matrix: no paths");
  const Eigen::Index p = paths.front().dim();
  const std::size_t dim = static_cast<std::size_t>(p) + (aug.time ? 1 : 0);
  const auto cols = static_cast<Eigen::Index>(sig_length(dim, order));
  Eigen::MatrixXd xi(static_cast<Eigen::Index>(paths.size()), cols);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].dim() != p) {
      throw DataError(fmt::format("path {} has dimension {}, expected {}", i, paths[i].dim(), p));
    }
    xi.row(static_cast<Eigen::Index>(i)) = signature(augment(paths[i], aug), order).coeffs.transpose();
  }
  return xi;
}

}  // namespace sigssar::sig
