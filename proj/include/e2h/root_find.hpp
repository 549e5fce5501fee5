#pragma once

#include <cmath>
#include <optional>
#include <utility>

namespace e2h {

struct BisectionOptions {
  double abs_tol = 1e-12;
  double rel_tol = 0.0;
  int max_iter = 4000;
};

/// Shrinks [lo, hi] around the boundary of a monotone predicate with
/// pred(lo) == false and pred(hi) == true. Returns the final bracket.
/// Stops on width <= abs_tol + rel_tol*|mid| or when the midpoint is no
/// longer representable between the endpoints.
template <class Pred>
std::pair<double, double> bisect_boundary(Pred&& pred, double lo, double hi,
                                          const BisectionOptions& opt = {}) {
  for (int it = 0; it < opt.max_iter; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (hi - lo <= opt.abs_tol + opt.rel_tol * std::fabs(mid)) break;
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {lo, hi};
}

/// Geometric expansion start, start*factor, ... until pred holds or limit is
/// passed. Returns {last point where pred was false, first point where true}.
template <class Pred>
std::optional<std::pair<double, double>> expand_bracket(Pred&& pred, double floor_point, double start,
                                                        double factor, double limit) {
  double prev = floor_point;
  for (double x = start; x <= limit; x *= factor) {
    if (pred(x)) return std::make_pair(prev, x);
    prev = x;
  }
  return std::nullopt;
}

}  // namespace e2h
