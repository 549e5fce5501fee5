#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "e2h/cubic.hpp"
#include "e2h/params.hpp"

namespace e2h {

/// Argument tuple (beta', beta, nu, x0) of E and N. x0 may be +infinity,
/// which evaluates the x0 -> infinity limit (r = 0).
struct ErrorFunctionalInputs {
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double nu = 0.0;
  double x0 = std::numeric_limits<double>::infinity();
};

/// Pieces of the error functional E = T1 - aL (T3 + T2).
struct ErrorTerms {
  double T1 = 0.0;   // baseline accumulation
  double T2 = 0.0;   // (.)^(L-1) L^-beta r
  double T3 = 0.0;   // 2^-beta radicand term over the e^(-beta/L) weighted series
  double E = 0.0;
  double q = 0.0;    // common ratio in T1
  double rho = 0.0;  // common ratio of the infinite series in T3
  double r = 0.0;    // c_delta nu / (c sqrt(a0 x0 - c_delta' nu))
  double a0 = 1.0;
  double aL = 1.0;
};

/// Result of a non-throwing evaluation; `violated` is null on success.
struct ErrorEvaluation {
  ErrorTerms terms;
  const char* violated = nullptr;
  bool ok() const { return violated == nullptr; }
};

/// Guard on the T3 common ratio: rho must stay below 1 - kRhoGuard.
inline constexpr double kRhoGuard = 1e-10;

ErrorEvaluation evaluate_error_terms(const ErrorFunctionalInputs& in, const TheoryParams& p,
                                     const DerivedConstants& d);

/// Throws DomainError naming the first violated positivity condition.
double error_functional_E(const ErrorFunctionalInputs& in, const TheoryParams& p,
                          const DerivedConstants& d);

/// N = -E - (aL - 1)(1 - gamma)/2; negative iff the curriculum bound wins.
double improvement_condition_N(const ErrorFunctionalInputs& in, const TheoryParams& p,
                               const DerivedConstants& d);

/// The baseline accumulation term T1(nu) on its own. Throws DomainError.
double baseline_term_T1(double nu, const TheoryParams& p, const DerivedConstants& d);

/// I_M = (x_-(2^-beta, nu), (2^-beta / a0) x_+(2^-beta, nu)).
Interval feasibility_interval(double beta_lo, double beta_hi, double nu, const TheoryParams& p,
                              const DerivedConstants& d);
Interval feasibility_interval(const TheoryParams& p, const DerivedConstants& d);

/// Two-sided bound on |I_M(0)| - |I_M(nu)|.
struct ShrinkageBounds {
  double lower = 0.0;
  double upper = 0.0;
};
ShrinkageBounds feasibility_shrinkage_bounds(double beta_hi, double nu, const TheoryParams& p,
                                             const DerivedConstants& d);

/// x(nu): the unique x0 with N(beta', beta, nu, x0) = 0. May exceed 1 - gamma
/// close to nu_c. Throws RootFindError when nu >= nu_c or the domain collapses.
double improvement_threshold_x(double beta_lo, double beta_hi, double nu, const TheoryParams& p,
                               const DerivedConstants& d);

/// I_N = (x(nu), 1 - gamma); invalid (empty) once x(nu) >= 1 - gamma or nu >= nu_c.
Interval improvement_interval(double beta_lo, double beta_hi, double nu, const TheoryParams& p,
                              const DerivedConstants& d);

struct ThresholdSample {
  double nu = 0.0;
  double x = 0.0;
  bool ok = false;  // false: no threshold (nu >= nu_c or domain collapse)
};
std::vector<ThresholdSample> threshold_curve(double beta_lo, double beta_hi, std::span<const double> nus,
                                             const TheoryParams& p, const DerivedConstants& d);

struct CriticalValue {
  double value = 0.0;
  bool domain_limited = false;  // the bracket ran into domain breakdown first
};

/// Unique root of N_inf(nu) = 0.
CriticalValue critical_nu_c(double beta_lo, double beta_hi, const TheoryParams& p,
                            const DerivedConstants& d);

/// Unique root of T1(nu) = (1 - gamma)/2.
double critical_nu_T(const TheoryParams& p, const DerivedConstants& d);

struct NuStar {
  double value = 0.0;
  bool capped = false;  // x0 lies above every attainable threshold; value is nu_c
};

/// sup{ nu > 0 : N(beta', beta, nu, x0) < 0 }, i.e. x(nu*) = x0.
/// Throws ParameterError unless x0 in (0, 1 - gamma).
NuStar nu_star(double beta_lo, double beta_hi, double x0, const TheoryParams& p,
               const DerivedConstants& d);

/// First-order coefficient of nu*(beta', beta' + gap) as beta' -> 0.
double small_beta_lo_coefficient(double delta_gap, const TheoryParams& p, const DerivedConstants& d);

struct ProfilePoint {
  double beta_lo = 0.0;
  double nu_star = 0.0;
  bool is_argmax = false;
};

struct NuStarProfile {
  std::vector<ProfilePoint> points;
  std::size_t argmax = 0;
  int local_maxima = 0;      // strict interior local maxima
  double tail_slope = 0.0;   // least-squares slope of log nu* vs beta' on the tail
  double tail_start = 0.0;
};

/// nu*(beta', beta' + gap) along `beta_grid` (strictly increasing). The tail
/// fit uses grid points with beta' >= tail_start (default: upper third).
NuStarProfile nu_star_profile(double delta_gap, std::span<const double> beta_grid, double x0,
                              const TheoryParams& p, const DerivedConstants& d,
                              std::optional<double> tail_start = std::nullopt);

/// a_L(beta') = (1/L) sum_i (L/i)^beta'.
double aL_of(double beta_lo, int L);
/// a_L'(beta') = a_L E[X], X on {log(L/i)} with weights i^-beta'.
double aL_derivative(double beta_lo, int L);

/// h(beta') = a_L (a_L - 1) / a_L'.
double aL_ratio_h(double beta_lo, int L);

struct ConditionalMeans {
  double lhs = 0.0;  // E[X - t | X > t]
  double rhs = 0.0;  // E[X | X > 0]
};

/// Exact summation over the finite support. Throws ParameterError unless
/// t in [0, log L).
ConditionalMeans conditional_mean_check(int L, double beta_lo, double t);

}  // namespace e2h
