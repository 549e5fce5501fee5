#include "e2h/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "e2h/error.hpp"

namespace e2h {

namespace {

constexpr double kTwoPiOverThree = 2.0 * std::numbers::pi / 3.0;
constexpr double kFourPiOverThree = 4.0 * std::numbers::pi / 3.0;

// (1/3) arccos(-1 + 27 sigma^2 / 2); the argument is clamped onto [-1, 1]
// when it drifts past the boundary by at most kBoundaryTol.
double trig_angle(double sigma) {
  double arg = -1.0 + 13.5 * sigma * sigma;
  if (arg > 1.0 && arg <= 1.0 + kBoundaryTol) arg = 1.0;
  if (arg < -1.0 && arg >= -1.0 - kBoundaryTol) arg = -1.0;
  return std::acos(arg) / 3.0;
}

void require_closed_range(double s) {
  if (!(s >= 0.0 && s <= kSigmaMax + kBoundaryTol))
    throw DomainError("sigma must lie in [0, sqrt(4/27)]");
}

}  // namespace

double sigma(double a, const TheoryParams& p, const DerivedConstants& d) {
  if (!(a > 0.0)) throw DomainError("scale a must be positive");
  const double rad = a * (1.0 - p.gamma) - d.c_delta_prime * d.nu;
  if (!(rad > 0.0)) throw DomainError("a (1 - gamma) > c_delta' nu");
  return a * d.c_delta * d.nu / (p.c * rad * std::sqrt(rad));
}

CubicRoots cubic_roots(double s) {
  if (!(s > 0.0 && s < kSigmaMax)) throw DomainError("cubic roots need 0 < sigma < sqrt(4/27)");
  CubicRoots r;
  r.u = trig_angle(s);
  // l = 1 gives the root in (1/3, 1), l = 2 the root in (0, 1/3).
  r.y_plus = 2.0 / 3.0 + (2.0 / 3.0) * std::cos(r.u - kTwoPiOverThree);
  r.y_minus = 2.0 / 3.0 + (2.0 / 3.0) * std::cos(r.u - kFourPiOverThree);
  return r;
}

double gap_lower_bound(double s) {
  require_closed_range(s);
  return 1.0 - 1.5 * std::sqrt(3.0) * s;
}

double exact_gap(double s) {
  require_closed_range(s);
  if (s == 0.0) return 1.0;
  return (2.0 / std::sqrt(3.0)) * std::sin(trig_angle(std::min(s, kSigmaMax)));
}

Interval invariant_interval(double a, const TheoryParams& p, const DerivedConstants& d) {
  Interval iv;
  if (!(a > 0.0)) {
    iv.reason = "scale a must be positive";
    return iv;
  }
  const double top = 1.0 - p.gamma;
  if (d.nu == 0.0) {
    // The map is constant at 1 - gamma; sigma = 0 and y ranges over (0, 1).
    iv.lo = 0.0;
    iv.hi = top;
    iv.valid = true;
    return iv;
  }
  if (!(a * top - d.c_delta_prime * d.nu > 0.0)) {
    iv.reason = "a (1 - gamma) > c_delta' nu";
    return iv;
  }
  const double s = sigma(a, p, d);
  if (!(s < kSigmaMax)) {
    iv.reason = "sigma < sqrt(4/27)";
    return iv;
  }
  if (kSigmaMax - s < kNearDegenerate) {
    iv.reason = "near-degenerate: sigma within 1e-8 of sqrt(4/27)";
    return iv;
  }
  const CubicRoots r = cubic_roots(s);
  const double base = d.c_delta_prime * d.nu / a;
  const double scale = top - base;
  iv.lo = base + scale * r.y_minus;
  iv.hi = base + scale * r.y_plus;
  iv.valid = iv.lo < iv.hi;
  if (!iv.valid) iv.reason = "collapsed interval";
  return iv;
}

}  // namespace e2h
