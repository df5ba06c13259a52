#pragma once

#include <functional>

namespace sigssar {

struct SearchOptions {
  double lo = -1.0 + 1e-6;
  double hi = 1.0 - 1e-6;
  int grid_points = 201;
  double tolerance = 1e-8;
};

struct SearchResult {
  double x;
  double value;
};

/// Maximizes f over [lo, hi]: scan an equally spaced grid, then refine with
/// golden-section search on the bracket around the best grid point. f may
/// return -inf for inadmissible points. Throws std::runtime_error if every
/// grid point is inadmissible.
SearchResult maximize_1d(const std::function<double(double)>& f, SearchOptions options = {});

}  // namespace sigssar
