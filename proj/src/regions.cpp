#include "e2h/regions.hpp"

#include <algorithm>
#include <cmath>

#include "e2h/error.hpp"
#include "e2h/root_find.hpp"

namespace e2h {

namespace {

double power_sum(int L, double beta_lo) {
  double s = 0.0;
  for (int i = 1; i <= L; ++i) s += std::pow(static_cast<double>(i), -beta_lo);
  return s;
}

// sum_{j=0}^{k-1} q^j
double geometric_partial(double q, int k) {
  if (q == 1.0) return static_cast<double>(k);
  return (1.0 - std::pow(q, k)) / (1.0 - q);
}

constexpr double kBracketStart = 1e-9;
constexpr double kBracketFactor = 2.0;
constexpr double kXLimit = 1e12;

}  // namespace

ErrorEvaluation evaluate_error_terms(const ErrorFunctionalInputs& in, const TheoryParams& p,
                                     const DerivedConstants& d) {
  ErrorEvaluation out;
  ErrorTerms& t = out.terms;
  const double nu = in.nu;
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    out.violated = "nu >= 0";
    return out;
  }
  if (!(in.beta_lo >= 0.0) || !(in.beta_hi > 0.0)) {
    out.violated = "beta_lo >= 0 and beta_hi > 0";
    return out;
  }
  if (!(in.x0 > 0.0)) {
    out.violated = "x0 > 0";
    return out;
  }
  const int L = p.L;
  const double c = p.c;
  const double top = 1.0 - p.gamma;
  const double S = power_sum(L, in.beta_lo);
  t.a0 = L / S;
  t.aL = S / std::pow(static_cast<double>(L), 1.0 - in.beta_lo);

  const double cdn = d.c_delta * nu;
  const double cpn = d.c_delta_prime * nu;

  const double base = top - cpn;
  if (!(base > 0.0)) {
    out.violated = "1 - gamma > c_delta' nu";
    return out;
  }
  t.q = cdn / (2.0 * c * base * std::sqrt(base));
  t.T1 = cdn / (c * std::sqrt(base)) * geometric_partial(t.q, L - 1);

  if (std::isinf(in.x0)) {
    t.r = 0.0;
  } else {
    const double rad0 = t.a0 * in.x0 - cpn;
    if (!(rad0 > 0.0)) {
      out.violated = "a0 x0 > c_delta' nu";
      return out;
    }
    t.r = cdn / (c * std::sqrt(rad0));
  }

  const double scale = std::exp2(-in.beta_hi);
  const double inner = scale * (top - t.r) - cpn;
  if (!(inner > 0.0)) {
    out.violated = "2^-beta (1 - gamma - r) > c_delta' nu";
    return out;
  }
  const double ratio = cdn / (2.0 * c * inner * std::sqrt(inner));
  t.rho = ratio * std::exp(-in.beta_hi / L);
  if (!(t.rho < 1.0 - kRhoGuard)) {
    out.violated = "rho < 1 (series denominator positive)";
    return out;
  }
  const double rad2 = scale * top - cpn;
  if (!(rad2 > 0.0)) {
    out.violated = "2^-beta (1 - gamma) > c_delta' nu";
    return out;
  }
  t.T3 = cdn / (c * std::sqrt(rad2)) / (1.0 - t.rho);
  t.T2 = std::pow(ratio, L - 1) * std::pow(static_cast<double>(L), -in.beta_hi) * t.r;
  t.E = t.T1 - t.aL * (t.T3 + t.T2);
  return out;
}

double error_functional_E(const ErrorFunctionalInputs& in, const TheoryParams& p, const DerivedConstants& d) {
  const ErrorEvaluation ev = evaluate_error_terms(in, p, d);
  if (!ev.ok()) throw DomainError(std::string("error functional undefined: ") + ev.violated);
  return ev.terms.E;
}

namespace {

double n_from_terms(const ErrorTerms& t, const TheoryParams& p) {
  return -t.E - 0.5 * (t.aL - 1.0) * (1.0 - p.gamma);
}

// True when N >= 0 or the functional is undefined; monotone in nu and
// decreasing in x0.
bool no_improvement(const ErrorFunctionalInputs& in, const TheoryParams& p, const DerivedConstants& d) {
  const ErrorEvaluation ev = evaluate_error_terms(in, p, d);
  return !ev.ok() || n_from_terms(ev.terms, p) >= 0.0;
}

}  // namespace

double improvement_condition_N(const ErrorFunctionalInputs& in, const TheoryParams& p, const DerivedConstants& d) {
  const ErrorEvaluation ev = evaluate_error_terms(in, p, d);
  if (!ev.ok()) throw DomainError(std::string("improvement condition undefined: ") + ev.violated);
  return n_from_terms(ev.terms, p);
}

double baseline_term_T1(double nu, const TheoryParams& p, const DerivedConstants& d) {
  const double base = 1.0 - p.gamma - d.c_delta_prime * nu;
  if (!(nu >= 0.0)) throw DomainError("nu >= 0");
  if (!(base > 0.0)) throw DomainError("T1 undefined: 1 - gamma > c_delta' nu");
  const double cdn = d.c_delta * nu;
  const double q = cdn / (2.0 * p.c * base * std::sqrt(base));
  return cdn / (p.c * std::sqrt(base)) * geometric_partial(q, p.L - 1);
}

Interval feasibility_interval(double beta_lo, double beta_hi, double nu, const TheoryParams& p,
                              const DerivedConstants& d) {
  const double scale = std::exp2(-beta_hi);
  Interval iv = invariant_interval(scale, p, with_nu(d, nu));
  if (!iv.valid) return iv;
  const double a0 = p.L / power_sum(p.L, beta_lo);
  iv.hi = scale / a0 * iv.hi;
  iv.valid = iv.lo < iv.hi;
  if (!iv.valid) iv.reason = "empty feasibility interval";
  return iv;
}

Interval feasibility_interval(const TheoryParams& p, const DerivedConstants& d) {
  return feasibility_interval(p.beta_lo, p.beta_hi, d.nu, p, d);
}

ShrinkageBounds feasibility_shrinkage_bounds(double beta_hi, double nu, const TheoryParams& p,
                                             const DerivedConstants& d) {
  const double scale = std::exp2(-beta_hi);
  const double rad = scale * (1.0 - p.gamma) - d.c_delta_prime * nu;
  if (!(rad > 0.0)) throw DomainError("2^-beta (1 - gamma) > c_delta' nu");
  ShrinkageBounds b;
  b.lower = d.c_delta_prime * nu / scale;
  b.upper = b.lower + 1.5 * std::sqrt(3.0) * d.c_delta * nu / (p.c * std::sqrt(rad));
  return b;
}

double improvement_threshold_x(double beta_lo, double beta_hi, double nu, const TheoryParams& p,
                               const DerivedConstants& d) {
  if (!(nu >= 0.0)) throw ParameterError("invalid parameter: nu >= 0");
  if (nu == 0.0) return 0.0;
  if (no_improvement({beta_lo, beta_hi, nu}, p, d))
    throw RootFindError("no improvement threshold: nu >= nu_c or the functional is undefined");
  auto improves = [&](double x0) { return !no_improvement({beta_lo, beta_hi, nu, x0}, p, d); };
  const auto bracket = expand_bracket(improves, 0.0, 1.0 - p.gamma, kBracketFactor, kXLimit);
  if (!bracket) throw RootFindError("improvement threshold exceeds search limit");
  return bisect_boundary(improves, bracket->first, bracket->second).second;
}

Interval improvement_interval(double beta_lo, double beta_hi, double nu, const TheoryParams& p,
                              const DerivedConstants& d) {
  Interval iv;
  iv.hi = 1.0 - p.gamma;
  try {
    iv.lo = improvement_threshold_x(beta_lo, beta_hi, nu, p, d);
  } catch (const RootFindError& e) {
    iv.lo = iv.hi;
    iv.reason = e.what();
    return iv;
  }
  iv.valid = iv.lo < iv.hi;
  if (!iv.valid) iv.reason = "x(nu) >= 1 - gamma";
  return iv;
}

std::vector<ThresholdSample> threshold_curve(double beta_lo, double beta_hi, std::span<const double> nus,
                                             const TheoryParams& p, const DerivedConstants& d) {
  std::vector<ThresholdSample> out;
  out.reserve(nus.size());
  for (double nu : nus) {
    ThresholdSample s{nu, std::nan(""), false};
    try {
      s.x = improvement_threshold_x(beta_lo, beta_hi, nu, p, d);
      s.ok = true;
    } catch (const RootFindError&) {
    }
    out.push_back(s);
  }
  return out;
}

CriticalValue critical_nu_c(double beta_lo, double beta_hi, const TheoryParams& p, const DerivedConstants& d) {
  auto stop = [&](double nu) { return no_improvement({beta_lo, beta_hi, nu}, p, d); };
  if (stop(0.0)) throw RootFindError("N_inf(0) >= 0: no improvement at nu = 0");
  const auto bracket = expand_bracket(stop, 0.0, kBracketStart, kBracketFactor, 1.0 + kBracketStart);
  if (!bracket) throw RootFindError("N_inf does not change sign on (0, 1]");
  const auto [lo, hi] = bisect_boundary(stop, bracket->first, bracket->second);
  CriticalValue cv;
  cv.value = hi;
  cv.domain_limited = !evaluate_error_terms({beta_lo, beta_hi, hi}, p, d).ok();
  (void)lo;
  return cv;
}

double critical_nu_T(const TheoryParams& p, const DerivedConstants& d) {
  const double target = 0.5 * (1.0 - p.gamma);
  const double limit = (1.0 - p.gamma) / std::max(d.c_delta_prime, 1e-300);
  auto above = [&](double nu) {
    if (!(1.0 - p.gamma - d.c_delta_prime * nu > 0.0)) return true;
    return baseline_term_T1(nu, p, d) >= target;
  };
  const auto bracket = expand_bracket(above, 0.0, kBracketStart, kBracketFactor, std::min(limit * 2.0, 1e6));
  if (!bracket) throw RootFindError("T1 never reaches (1 - gamma)/2");
  const double hi = bisect_boundary(above, bracket->first, bracket->second).second;
  if (!(1.0 - p.gamma - d.c_delta_prime * hi > 0.0))
    throw RootFindError("T1 domain breaks down before reaching (1 - gamma)/2");
  return hi;
}

NuStar nu_star(double beta_lo, double beta_hi, double x0, const TheoryParams& p, const DerivedConstants& d) {
  if (!(x0 > 0.0 && x0 < 1.0 - p.gamma)) throw ParameterError("invalid parameter: 0 < x0 < 1 - gamma");
  const CriticalValue nc = critical_nu_c(beta_lo, beta_hi, p, d);
  auto stop = [&](double nu) { return no_improvement({beta_lo, beta_hi, nu, x0}, p, d); };
  NuStar ns;
  ns.value = bisect_boundary(stop, 0.0, nc.value).first;
  ns.capped = nc.domain_limited && nc.value - ns.value < 1e-9;
  return ns;
}

double small_beta_lo_coefficient(double delta_gap, const TheoryParams& p, const DerivedConstants& d) {
  if (!(delta_gap > 0.0)) throw ParameterError("invalid parameter: delta_gap > 0");
  double log_fact = 0.0;
  for (int i = 2; i <= p.L; ++i) log_fact += std::log(static_cast<double>(i));
  const double log_factor = std::log(static_cast<double>(p.L)) - log_fact / p.L;
  const double top = 1.0 - p.gamma;
  return p.c * top * std::sqrt(top) * log_factor / (2.0 * d.c_delta * (std::exp2(delta_gap / 2.0) - 1.0));
}

NuStarProfile nu_star_profile(double delta_gap, std::span<const double> beta_grid, double x0, const TheoryParams& p,
                              const DerivedConstants& d, std::optional<double> tail_start) {
  if (!(delta_gap > 0.0)) throw ParameterError("invalid parameter: delta_gap > 0");
  if (beta_grid.empty()) throw ParameterError("invalid parameter: empty beta grid");
  if (!std::is_sorted(beta_grid.begin(), beta_grid.end(), std::less_equal<>()))
    throw ParameterError("invalid parameter: beta grid strictly increasing");
  NuStarProfile prof;
  prof.points.reserve(beta_grid.size());
  for (double b : beta_grid) {
    prof.points.push_back({b, nu_star(b, b + delta_gap, x0, p, d).value, false});
  }
  const auto& pts = prof.points;
  prof.argmax = static_cast<std::size_t>(
      std::max_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.nu_star < b.nu_star; }) -
      pts.begin());
  prof.points[prof.argmax].is_argmax = true;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    if (pts[i].nu_star > pts[i - 1].nu_star && pts[i].nu_star > pts[i + 1].nu_star) ++prof.local_maxima;
  }

  prof.tail_start = tail_start.value_or(beta_grid[(2 * beta_grid.size()) / 3]);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (const auto& pt : pts) {
    if (pt.beta_lo < prof.tail_start || !(pt.nu_star > 0.0)) continue;
    const double y = std::log(pt.nu_star);
    sx += pt.beta_lo;
    sy += y;
    sxx += pt.beta_lo * pt.beta_lo;
    sxy += pt.beta_lo * y;
    ++k;
  }
  if (k >= 2) {
    const double den = k * sxx - sx * sx;
    prof.tail_slope = den != 0.0 ? (k * sxy - sx * sy) / den : 0.0;
  } else {
    prof.tail_slope = std::nan("");
  }
  return prof;
}

double aL_of(double beta_lo, int L) {
  if (L < 2) throw ParameterError("invalid parameter: L >= 2");
  return power_sum(L, beta_lo) / std::pow(static_cast<double>(L), 1.0 - beta_lo);
}

double aL_derivative(double beta_lo, int L) {
  if (L < 2) throw ParameterError("invalid parameter: L >= 2");
  double s = 0.0;
  for (int i = 1; i < L; ++i) {
    const double x = std::log(static_cast<double>(L) / i);
    s += x * std::exp(beta_lo * x);
  }
  return s / L;
}

double aL_ratio_h(double beta_lo, int L) {
  if (!(beta_lo > 0.0)) throw ParameterError("invalid parameter: beta_lo > 0");
  // a_L - 1 = (1/L) sum_i expm1(beta' log(L/i)), exact near beta' = 0.
  double excess = 0.0;
  for (int i = 1; i < L; ++i) excess += std::expm1(beta_lo * std::log(static_cast<double>(L) / i));
  excess /= L;
  return aL_of(beta_lo, L) * excess / aL_derivative(beta_lo, L);
}

ConditionalMeans conditional_mean_check(int L, double beta_lo, double t) {
  if (L < 2) throw ParameterError("invalid parameter: L >= 2");
  const double logL = std::log(static_cast<double>(L));
  if (!(t >= 0.0 && t < logL)) throw ParameterError("invalid parameter: 0 <= t < log L");
  double w_t = 0, m_t = 0, w_0 = 0, m_0 = 0;
  for (int i = 1; i <= L; ++i) {
    const double x = std::log(static_cast<double>(L) / i);
    const double w = std::pow(static_cast<double>(i), -beta_lo);
    if (x > t) {
      w_t += w;
      m_t += w * (x - t);
    }
    if (x > 0.0) {
      w_0 += w;
      m_0 += w * x;
    }
  }
  if (w_t == 0.0) throw DomainError("empty conditioning event X > t");
  return {m_t / w_t, m_0 / w_0};
}

}  // namespace e2h
