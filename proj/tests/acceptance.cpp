// Acceptance suite: one PASS/FAIL line per criterion.
//   e2h_acceptance              run all criteria
//   e2h_acceptance 3 10 16      run the listed criteria
// Exit status is 0 iff every selected criterion passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "e2h/cubic.hpp"
#include "e2h/dynamics.hpp"
#include "e2h/montecarlo.hpp"
#include "e2h/params.hpp"
#include "e2h/regions.hpp"
#include "e2h/stochastic_sim.hpp"
#include "oracles.hpp"

using namespace e2h;
using oracle::ld;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

const TheoryParams kP{};
const DerivedConstants kD = derive_constants(kP);
const oracle::Consts kK{kP.c, kP.gamma, kD.c_delta, kD.c_delta_prime};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

// Largest nu with sigma(a, nu) below sqrt(4/27), by long double bisection.
double nu_limit(double a) {
  auto below = [&](ld nu) {
    const ld rad = a * (1 - kK.gamma) - kK.cdp * nu;
    if (rad <= 0) return 1.0L;
    const ld s = a * kK.cd * nu / (kK.c * std::pow(rad, 1.5L));
    return s - std::sqrt(4.0L / 27);
  };
  return static_cast<double>(oracle::bisect(below, 0.0L, a * (1 - kK.gamma) / kK.cdp));
}

// ---------------------------------------------------------------------------

Outcome c1() {
  oracle::Rng r(101);
  const auto t0 = Clock::now();
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = r.uniform(1e-4, kSigmaMax - 1e-4);
    const CubicRoots got = cubic_roots(s);
    const auto [lo, hi] = oracle::cubic_roots(s);
    worst = std::max({worst, std::fabs(got.y_minus - static_cast<double>(lo)), std::fabs(got.y_plus - static_cast<double>(hi))});
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-10 && secs < 1.0, "max |root - bisection| = " + num(worst) + ", " + num(secs) + " s"};
}

Outcome c2() {
  double worst = 0, worst_oracle = 0;
  int cells = 0;
  for (double a : linspace(0.3, 1.5, 10)) {
    const double lim = nu_limit(a);
    for (double frac : linspace(0.02, 0.95, 10)) {
      const double nu = frac * lim;
      const DerivedConstants d = with_nu(kD, nu);
      const Interval iv = invariant_interval(a, kP, d);
      if (!iv.valid) return {false, "interval invalid at a=" + num(a) + " nu=" + num(nu)};
      const MapSpec s = MapSpec::make(a, kP, d);
      worst = std::max({worst, std::fabs(eval_map(s, iv.lo) - iv.lo), std::fabs(eval_map(s, iv.hi) - iv.hi)});
      const auto [xl, xh] = oracle::fixed_points(a, nu, kK);
      worst_oracle = std::max({worst_oracle, std::fabs(iv.lo - static_cast<double>(xl)), std::fabs(iv.hi - static_cast<double>(xh))});
      ++cells;
    }
  }
  return {worst < 1e-10 && cells == 100,
          "max residual " + num(worst) + " over " + std::to_string(cells) + " cells; max |x - direct fixed point| " + num(worst_oracle)};
}

Outcome c3() {
  oracle::Rng r(103);
  int viol = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = r.uniform(0.0, kSigmaMax);
    if (!(exact_gap(s) >= gap_lower_bound(s))) ++viol;
  }
  const double g = exact_gap(std::sqrt(2.0 / 27.0));
  const double err = std::fabs(g - oracle::kInvSqrt3);
  return {viol == 0 && err <= 1e-12, std::to_string(viol) + " bound violations; |gap(sqrt(2/27)) - 1/sqrt3| = " + num(err)};
}

Outcome c4() {
  oracle::Rng r(104);
  int va = 0, vn = 0, na = 0, nn = 0;
  while (na < 500) {
    const double a1 = r.uniform(0.2, 1.5), a2 = a1 + r.uniform(1e-3, 0.8);
    const double nu = r.uniform(0.0, 0.95) * nu_limit(a1);
    const Interval i1 = invariant_interval(a1, kP, with_nu(kD, nu));
    const Interval i2 = invariant_interval(a2, kP, with_nu(kD, nu));
    if (!i1.valid) continue;
    ++na;
    if (!(i2.valid && i2.lo <= i1.lo && i1.hi <= i2.hi && (nu == 0 || (i2.lo < i1.lo && i1.hi < i2.hi)))) ++va;
  }
  while (nn < 500) {
    const double a = r.uniform(0.2, 1.5), lim = nu_limit(a);
    const double nu1 = r.uniform(1e-4, 0.9) * lim, nu2 = nu1 + r.uniform(1e-4, 0.95 * lim - nu1 + 1e-4);
    if (!(nu2 > nu1) || nu2 >= 0.97 * lim) continue;
    const Interval i1 = invariant_interval(a, kP, with_nu(kD, nu1));
    const Interval i2 = invariant_interval(a, kP, with_nu(kD, nu2));
    if (!i1.valid || !i2.valid) continue;
    ++nn;
    if (!(i1.lo < i2.lo && i2.hi < i1.hi)) ++vn;
  }
  return {va == 0 && vn == 0, std::to_string(va) + " violations in a, " + std::to_string(vn) + " in nu (500 pairs each)"};
}

Outcome c5() {
  oracle::Rng r(105);
  int mis_in = 0, mis_out = 0;
  for (int i = 0; i < 200; ++i) {
    const double nu = r.uniform(1e-3, 0.9 * nu_limit(1.0));
    const DerivedConstants d = with_nu(kD, nu);
    const Interval iv = invariant_interval(1.0, kP, d);
    const double x0 = r.uniform(iv.lo, iv.hi);
    if (!(x0 > iv.lo && x0 < iv.hi)) continue;
    const Trajectory tr = iterate_baseline(kP, d, x0, 100);
    bool confined = true;
    for (double v : tr.values) confined = confined && v > iv.lo - kBoundaryTol && v < iv.hi + kBoundaryTol;
    if (!(tr.monotone() && tr.steps() == 100 && confined)) ++mis_in;
  }
  for (int i = 0; i < 200; ++i) {
    const double nu = r.uniform(1e-3, 0.9 * nu_limit(1.0));
    const DerivedConstants d = with_nu(kD, nu);
    const Interval iv = invariant_interval(1.0, kP, d);
    const double dom = kD.c_delta_prime * nu;
    // Half below x_-, half above x_+ (but inside the map's domain and below 1 - gamma).
    const double x0 = (i % 2 == 0) ? r.uniform(dom, iv.lo) : r.uniform(iv.hi, 1.0 - kP.gamma);
    if (!(x0 > dom) || x0 == iv.lo || x0 == iv.hi) continue;
    const Trajectory tr = iterate_baseline(kP, d, x0, 100);
    bool exits = !tr.stayed_in_domain;
    for (double v : tr.values) exits = exits || !(v > iv.lo && v < iv.hi);
    const bool fails_first = tr.steps() == 0 || !tr.increasing[0];
    if (!(fails_first || exits)) ++mis_out;
  }
  return {mis_in == 0 && mis_out == 0,
          std::to_string(mis_in) + " misclassified inside, " + std::to_string(mis_out) + " outside"};
}

Outcome c6() {
  oracle::Rng r(106);
  const double h = 1e-6, guard = 1e-9;
  int tested = 0, vn = 0, vx = 0, vb = 0;
  while (tested < 2000) {
    const double bl = r.uniform(0.01, 1.5), bh = bl + r.uniform(0.02, 2.0);
    const double nu = r.uniform(1e-4, 0.04), x0 = r.uniform(0.02, 1.0 - kP.gamma);
    auto E = [&](double b1, double b2, double n, double x) { return evaluate_error_terms({b1, b2, n, x}, kP, kD); };
    const auto e0 = E(bl, bh, nu, x0), en = E(bl, bh, nu + h, x0), ex = E(bl, bh, nu, x0 + h), eb = E(bl, bh + h, nu, x0);
    if (!e0.ok() || !en.ok() || !ex.ok() || !eb.ok()) continue;
    ++tested;
    if (en.terms.E - e0.terms.E > guard) ++vn;
    if (e0.terms.E - ex.terms.E > guard) ++vx;
    if (eb.terms.E - e0.terms.E > guard) ++vb;
  }
  return {vn + vx + vb == 0, "sign violations dE/dnu " + std::to_string(vn) + ", dE/dx0 " + std::to_string(vx) +
                                 ", dE/dbeta " + std::to_string(vb) + " over " + std::to_string(tested) + " tuples"};
}

Outcome c7() {
  const double bl = kP.beta_lo, bh = kP.beta_hi;
  const double nu = 1e-6, hstep = 1e-7;
  const double slope = (improvement_threshold_x(bl, bh, nu + hstep, kP, kD) -
                        improvement_threshold_x(bl, bh, nu - hstep, kP, kD)) / (2 * hstep);
  const double a0 = curriculum_coefficients(kP).a0;
  const double want = kD.c_delta_prime / a0;
  const double rel = std::fabs(slope / want - 1);

  const double nc = critical_nu_c(bl, bh, kP, kD).value;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = 40;
  for (int i = 0; i < n; ++i) {
    const double frac = 0.9 + (0.999 - 0.9) * i / (n - 1);
    const double v = frac * nc;
    const double x = improvement_threshold_x(bl, bh, v, kP, kD);
    const double lx = std::log(nc - v), ly = std::log(x);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  const double ll = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {rel < 0.01 && std::fabs(ll + 2) <= 0.15,
          "x'(1e-6) = " + num(slope, 8) + " vs c_delta'/a0 = " + num(want, 8) + " (rel " + num(rel) +
              "); log-log slope near nu_c = " + num(ll)};
}

struct Grid8 {
  std::vector<double> bl = linspace(0.05, 1.0, 20), bh = linspace(1.05, 3.0, 20);
  std::vector<std::vector<double>> ns;
};

const Grid8& grid8() {
  static const Grid8 g = [] {
    Grid8 g;
    const double x0 = 0.5 * (1 - kP.gamma);
    g.ns.assign(20, std::vector<double>(20));
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) g.ns[i][j] = nu_star(g.bl[i], g.bh[j], x0, kP, kD).value;
    return g;
  }();
  return g;
}

Outcome c8() {
  const Grid8& g = grid8();
  int vb = 0, vl = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j + 1 < 20; ++j)
      if (!(g.ns[i][j + 1] < g.ns[i][j])) ++vb;
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i + 1 < 20; ++i)
      if (!(g.ns[i + 1][j] > g.ns[i][j])) ++vl;
  return {vb == 0 && vl == 0, std::to_string(vb) + " violations along beta, " + std::to_string(vl) + " along beta'"};
}

Outcome c9() {
  bool ok = std::fabs(std::log(5.0) - std::log(120.0) / 5 - oracle::kLogFactorL5) < 1e-14;
  std::string det;
  for (double gap : {0.05, 0.1, 0.2}) {
    const double bl = 1e-3;
    const double ratio = nu_star(bl, bl + gap, 0.5 * (1 - kP.gamma), kP, kD).value / bl;
    const double coef = small_beta_lo_coefficient(gap, kP, kD);
    const double rel = std::fabs(ratio / coef - 1);
    ok = ok && rel < 0.05;
    det += "Delta=" + num(gap) + ": " + num(ratio) + " vs " + num(coef) + " (rel " + num(rel, 3) + "); ";
  }
  return {ok, det};
}

Outcome c10() {
  const auto grid = linspace(0.01, 12.0, 400);
  const NuStarProfile prof = nu_star_profile(0.1, grid, 0.5 * (1 - kP.gamma), kP, kD);
  double lo = INFINITY, hi = 0;
  for (const auto& pt : prof.points) {
    if (pt.beta_lo < 8.0) continue;
    const double scaled = pt.nu_star * std::exp2(pt.beta_lo / 2);
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  const double spread = hi / lo - 1;
  return {prof.local_maxima == 1 && spread < 0.10,
          std::to_string(prof.local_maxima) + " interior maxima (argmax beta'=" + num(prof.points[prof.argmax].beta_lo) +
              "); nu* 2^(beta'/2) on [8,12] spans " + num(lo) + ".." + num(hi) + " (" + num(100 * spread, 4) +
              "%); fitted tail slope " + num(prof.tail_slope) + " vs -ln2/2 = " + num(-std::numbers::ln2 / 2)};
}

Outcome c11() {
  const Grid8& g = grid8();
  const double nT = critical_nu_T(kP, kD);
  int v = 0;
  double mx = 0;
  for (const auto& row : g.ns)
    for (double x : row) {
      mx = std::max(mx, x);
      if (!(x < nT)) ++v;
    }
  return {v == 0, std::to_string(v) + " violations; max nu* " + num(mx) + " < nu_T " + num(nT)};
}

Outcome c12() {
  int viol = 0;
  double worst_oracle = 0;
  for (int L : {2, 3, 5, 10}) {
    double prev = -1;
    for (int k = 1; k <= 2000; ++k) {
      const double b = 0.01 * k;
      const double h = aL_ratio_h(b, L);
      if (!(h > prev)) ++viol;
      prev = h;
      if (k % 50 == 1) worst_oracle = std::max(worst_oracle, std::fabs(h / static_cast<double>(oracle::h_ratio(b, L)) - 1));
    }
  }
  double h_small = 0, h_large = INFINITY;
  for (int L : {2, 3, 5, 10}) {
    h_small = std::max(h_small, aL_ratio_h(0.01, L));
    h_large = std::min(h_large, aL_ratio_h(20.0, L));
  }
  return {viol == 0 && h_small < 0.05 && h_large > 1e5 && worst_oracle < 1e-6,
          std::to_string(viol) + " violations; max h(0.01) " + num(h_small) + ", min h(20) " + num(h_large) +
              "; max rel diff vs finite-difference oracle " + num(worst_oracle)};
}

Outcome c13() {
  const auto t0 = Clock::now();
  int viol = 0, n = 0;
  double worst = 0;
  for (int L = 2; L <= 12; ++L)
    for (int bi = 0; bi < 20; ++bi) {
      const double b = 0.05 + 4.95 * bi / 19;
      for (int ti = 0; ti < 50; ++ti) {
        const double t = std::log(static_cast<double>(L)) * (ti + 0.5) / 50;
        const ConditionalMeans cm = conditional_mean_check(L, b, t);
        const auto [ol, orr] = oracle::conditional_means(L, b, t);
        worst = std::max({worst, std::fabs(cm.lhs - static_cast<double>(ol)), std::fabs(cm.rhs - static_cast<double>(orr))});
        if (cm.lhs > cm.rhs + 1e-12) ++viol;
        ++n;
      }
    }
  const double secs = seconds_since(t0);
  return {viol == 0 && secs < 5 && worst < 1e-12,
          std::to_string(viol) + " violations in " + std::to_string(n) + " checks, " + num(secs) + " s, oracle diff " + num(worst)};
}

Outcome c14() {
  oracle::Rng r(114);
  int vmono = 0, vlim = 0, vhm = 0;
  for (int w = 0; w < 200; ++w) {
    SimWorld world;
    const int Q = 2 + static_cast<int>(r.next() % 500);
    double tot = 0;
    for (int q = 0; q < Q; ++q) {
      world.weights.push_back(r.uniform(0.01, 1.0));
      tot += world.weights.back();
      world.alpha.push_back(r.uniform(0.05, 1.0));
    }
    for (auto& x : world.weights) x /= tot;
    double prev = ratio_Zm_over_alpham(world, 1);
    for (int m = 2; m <= 64; ++m) {
      const double cur = ratio_Zm_over_alpham(world, m);
      if (cur > prev * (1 + 4 * 2.2e-16)) ++vmono;
      prev = cur;
    }
    if (std::fabs(ratio_Zm_over_alpham(world, 1024) - 1) > 1e-6) ++vlim;
  }
  for (int m = 1; m <= 50; ++m) {
    double prev = hm_ratio(0.0, m);
    for (int i = 1; i <= 999; ++i) {
      const double y = i / 1000.0, h = hm_ratio(y, m);
      // A tie is only acceptable where the true increment is below double resolution.
      const ld step = oracle::hm_excess(y, m) - oracle::hm_excess((i - 1) / 1000.0L, m);
      if (h < prev || (h == prev && step > 2.3e-16L * h)) ++vhm;
      prev = h;
    }
  }
  return {vmono == 0 && vlim == 0 && vhm == 0, std::to_string(vmono) + " monotonicity violations, " +
                                                   std::to_string(vlim) + " limit violations, " + std::to_string(vhm) +
                                                   " h_m violations"};
}

Outcome c15() {
  const auto t0 = Clock::now();
  TheoryParams p = kP;
  p.n = 2000;
  p.m = 4;
  p.delta = 0.05;
  SimulationConfig cfg;
  cfg.Q = 10000;
  cfg.V_target = 0.5;
  cfg.rounds = 5;
  cfg.replications = 500;
  cfg.seed = 2024;
  const SimulationReport rep = run_replications(cfg, p, derive_constants(p));
  const double secs = seconds_since(t0);
  return {rep.coverage() >= 0.95 && secs < 120,
          "bound held in " + std::to_string(rep.satisfied) + "/" + std::to_string(rep.scored) + " rounds (" +
              num(100 * rep.coverage(), 5) + "%), " + num(secs) + " s"};
}

Outcome c16() {
  const auto t0 = Clock::now();
  int cells = 0, agree = 0, lo_bad = 0, hi_bad = 0, mono_bad = 0;
  std::string det;
  for (Panel pn : {Panel::a, Panel::b, Panel::c, Panel::d}) {
    ScanConfig cfg = default_scan_config(pn);
    cfg.threads = 8;
    const ScanResult res = run_scan(cfg, kP, kD);
    int pa = 0;
    for (const auto& cell : res.cells) {
      ++cells;
      if (cell.agree) {
        ++agree;
        ++pa;
      } else if (cell.analytic.valid && cell.measured.valid) {
        if (std::fabs(cell.measured.lo - cell.analytic.lo) > res.grid_step) ++lo_bad;
        if (std::fabs(cell.measured.hi - cell.analytic.hi) > res.grid_step) ++hi_bad;
      }
    }
    for (std::size_t i = 0; i < res.n_axis1; ++i)
      for (std::size_t j = 0; j + 1 < res.n_nu; ++j)
        if (res.at(i, j + 1).measured.length() > res.at(i, j).measured.length()) ++mono_bad;
    det += std::string("panel ") + panel_letter(pn) + " " + std::to_string(pa) + "/" + std::to_string(res.cells.size()) + "; ";
  }
  const double secs = seconds_since(t0);
  return {agree == cells && mono_bad == 0 && secs < 600,
          "endpoints agree in " + std::to_string(agree) + "/" + std::to_string(cells) + " cells (" + det +
              "lower endpoint off in " + std::to_string(lo_bad) + ", upper in " + std::to_string(hi_bad) +
              "); length monotonicity violations " + std::to_string(mono_bad) + "; " + num(secs) + " s"};
}

Outcome c17() {
  const double bl = kP.beta_lo, bh = kP.beta_hi;
  const double nc = critical_nu_c(bl, bh, kP, kD).value;
  auto len = [&](double nu) { return improvement_cell(bl, bh, nu, 2000, kP, kD).measured.length(); };
  auto slope = [&](double nu) {
    const double h = 0.02 * nc;
    return std::fabs(len(nu + h) - len(nu - h)) / (2 * h);
  };
  const double s_lo = slope(0.1 * nc), s_hi = slope(0.95 * nc);
  const bool sharp = s_hi > 0 && s_hi >= 10 * s_lo;
  return {sharp, "|dlen/dnu| = " + num(s_lo) + " at 0.1 nu_c, " + num(s_hi) + " at 0.95 nu_c (measured length " +
                     num(len(0.1 * nc)) + " -> " + num(len(0.95 * nc)) + ", analytic |I_N| " +
                     num(improvement_interval(bl, bh, 0.1 * nc, kP, kD).length()) + " -> " +
                     num(improvement_interval(bl, bh, 0.95 * nc, kP, kD).length()) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> all = {
      {1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5}, {6, c6}, {7, c7}, {8, c8}, {9, c9},
      {10, c10}, {11, c11}, {12, c12}, {13, c13}, {14, c14}, {15, c15}, {16, c16}, {17, c17}};
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  if (pick.empty())
    for (const auto& [k, fn] : all) pick.push_back(k);

  int failed = 0;
  for (int k : pick) {
    const auto it = all.find(k);
    if (it == all.end()) {
      std::printf("criterion %d: unknown\n", k);
      return 2;
    }
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d %s  %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
