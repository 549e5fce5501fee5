#pragma once

#include <cmath>

#include "e2h/dynamics.hpp"
#include "e2h/kernels.hpp"

namespace e2h::kernels::detail {

inline constexpr int kLanes = 4;

inline double pow_int(double b, int m) {
  double r = 1.0;
  while (m > 0) {
    if (m & 1) r *= b;
    b *= b;
    m >>= 1;
  }
  return r;
}

struct StepResult {
  double y;
  bool in_domain;
  bool monotone;
};

inline StepResult step(double a, double x, double cpn, double cdn, double c, double top) {
  const double rad = a * x - cpn;
  if (!(rad > 0.0)) return {x, false, false};
  const double y = top - cdn / (c * std::sqrt(rad));
  const double delta = y - x;
  return {y, true, delta > 0.0 || std::fabs(delta) < kPlateauTol};
}

}  // namespace e2h::kernels::detail
