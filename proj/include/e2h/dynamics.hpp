#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "e2h/params.hpp"

namespace e2h {

/// Step difference below which an exact comparison is treated as a numerical
/// plateau rather than a decrease.
inline constexpr double kPlateauTol = 1e-14;

/// One lower-bound map x -> 1 - gamma - c_delta nu / (c sqrt(a x - c_delta' nu)).
/// a = 1 is the baseline map F; a = a_t gives the curriculum map H_t.
struct MapSpec {
  double a = 1.0;
  double nu = 0.0;
  double c = 0.9;
  double gamma = 0.0;
  double c_delta = 0.0;
  double c_delta_prime = 0.0;

  static MapSpec make(double a, const TheoryParams& p, const DerivedConstants& d);

  /// Points x > domain_lower() are admissible.
  double domain_lower() const { return c_delta_prime * nu / a; }
  bool in_domain(double x) const { return a * x - c_delta_prime * nu > 0.0; }
};

/// Throws DomainError when a x - c_delta' nu <= 0.
double eval_map(const MapSpec& spec, double x);

/// Non-throwing variant; nullopt outside the domain.
std::optional<double> try_eval_map(const MapSpec& spec, double x);

/// Change-of-measure coefficients of the easy-to-hard curriculum.
struct CurriculumCoefficients {
  double a0 = 1.0;              // L / sum_i i^-beta'
  double aL = 1.0;              // sum_i i^-beta' / L^(1-beta')
  std::vector<double> a_mid;    // a_mid[t-1] = (1 + 1/t)^-beta, t = 1..L-1

  double mid(int t) const { return a_mid.at(static_cast<std::size_t>(t - 1)); }
};

/// Accepts beta_lo >= 0 (beta_lo = 0 gives a0 = aL = 1) and beta_hi > 0.
CurriculumCoefficients curriculum_coefficients(int L, double beta_lo, double beta_hi);
CurriculumCoefficients curriculum_coefficients(const TheoryParams& p);

/// values[k+1] is the map applied to values[k].
struct Trajectory {
  std::vector<double> values;
  std::vector<bool> increasing;  // per step: strict increase
  std::vector<bool> plateau;     // per step: |delta| < kPlateauTol
  std::size_t monotone_prefix = 0;
  bool stayed_in_domain = true;
  std::optional<double> final_value;  // G applied (curriculum only)
  bool final_exceeds_one = false;

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  /// Every recorded step increased (or hit a plateau) and stayed in domain.
  bool monotone() const { return stayed_in_domain && monotone_prefix == steps(); }
};

/// Applies the maps with the given scales in order from x0.
Trajectory iterate_maps(std::span<const double> scales, const TheoryParams& p,
                        const DerivedConstants& d, double x0);

/// x0, F(x0), ..., F^T(x0), truncated at the first domain violation.
Trajectory iterate_baseline(const TheoryParams& p, const DerivedConstants& d, double x0, int steps = 100);

/// H_0 (a0), H_1..H_{L-1} (a_mid), then optionally G(x) = aL x as final_value.
Trajectory iterate_curriculum(const TheoryParams& p, const DerivedConstants& d, double x0,
                              bool with_final_G);

/// CSV: step,value,monotone_so_far,in_domain. A trailing row is written for
/// the first out-of-domain evaluation when the trajectory was truncated.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);

}  // namespace e2h
