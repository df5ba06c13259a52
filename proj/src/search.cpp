#include "sigssar/search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sigssar {

SearchResult maximize_1d(const std::function<double(double)>& f, SearchOptions options) {
  const int g = options.grid_points;
  if (g < 3 || !(options.hi > options.lo)) throw std::invalid_argument("maximize_1d: bad grid");
  const double step = (options.hi - options.lo) / (g - 1);
  auto grid_x = [&](int i) { return i == g - 1 ? options.hi : options.lo + i * step; };

  int best = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < g; ++i) {
    const double v = f(grid_x(i));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best < 0) throw std::runtime_error("maximize_1d: objective inadmissible on the whole grid");

  double a = grid_x(best > 0 ? best - 1 : 0);
  double b = grid_x(best < g - 1 ? best + 1 : g - 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > options.tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = fc >= fd ? c : d;
  const double v = std::max(fc, fd);
  if (v > best_value) return {x, v};
  return {grid_x(best), best_value};
}

}  // namespace sigssar
