#pragma once

#include <string>

#include "e2h/params.hpp"

namespace e2h {

/// Open interval (lo, hi). `reason` names the violated condition when !valid.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool valid = false;
  std::string reason;

  double length() const { return valid ? hi - lo : 0.0; }
  bool contains(double x) const { return valid && x > lo && x < hi; }
  /// Inclusion with endpoint slack `tol`.
  bool within(const Interval& outer, double tol = 0.0) const {
    return valid && outer.valid && lo >= outer.lo - tol && hi <= outer.hi + tol;
  }
};

inline constexpr double kSigmaMax = 0.38490017945975052;  // sqrt(4/27)
inline constexpr double kNearDegenerate = 1e-8;

/// a*c_delta*nu / (c * (a(1-gamma) - c_delta'*nu)^(3/2)). Throws DomainError
/// when the radicand is not positive.
double sigma(double a, const TheoryParams& p, const DerivedConstants& d);

/// The two roots of y(1-y)^2 = sigma^2 in (0,1), with y_minus < 1/3 < y_plus.
struct CubicRoots {
  double y_minus = 0.0;
  double y_plus = 0.0;
  double u = 0.0;  // (1/3) arccos(-1 + 27 sigma^2 / 2)
};

/// Trigonometric solution of the depressed cubic. Throws DomainError unless
/// 0 < sigma < sqrt(4/27).
CubicRoots cubic_roots(double sigma);

/// 1 - (3 sqrt 3 / 2) sigma, for sigma in [0, sqrt(4/27)].
double gap_lower_bound(double sigma);

/// y_plus - y_minus = (2/sqrt 3) sin(u), for sigma in [0, sqrt(4/27)].
double exact_gap(double sigma);

/// I(a, nu): the open interval between the two fixed points of
/// x -> 1 - gamma - c_delta nu / (c sqrt(a x - c_delta' nu)).
/// Outside the regime returns valid == false with the reason set.
Interval invariant_interval(double a, const TheoryParams& p, const DerivedConstants& d);

}  // namespace e2h
