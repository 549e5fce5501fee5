#include "e2h/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "e2h/cubic.hpp"
#include "e2h/dynamics.hpp"
#include "e2h/kernels.hpp"
#include "e2h/montecarlo.hpp"
#include "e2h/regions.hpp"
#include "e2h/rng.hpp"
#include "e2h/stochastic_sim.hpp"

namespace e2h {

namespace {

struct Check {
  bool ok = true;
  std::ostringstream msg;
  int violations = 0;

  void fail(const std::string& what) {
    if (violations++ == 0) msg << what;
    ok = false;
  }
  std::string detail() const {
    if (ok) return "ok";
    std::ostringstream s;
    s << violations << " violation(s); first: " << msg.str();
    return s.str();
  }
};

struct Context {
  const TheoryParams& p;
  DerivedConstants d;
  VerifyOptions opt;
  int reps(int full, int fast) const { return opt.fast ? fast : full; }
  Substream rng(std::uint32_t stream) const { return Substream(opt.seed, 1000 + stream, 0, 0); }
};

using Property = std::pair<const char*, std::function<void(Context&, Check&)>>;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// y(1-y)^2 - sigma^2 root on (lo, hi) by plain bisection.
double bisect_cubic(double s2, double lo, double hi, bool increasing) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = mid * (1 - mid) * (1 - mid) - s2;
    if ((f < 0) == increasing) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double random_admissible_nu(Context& c, Substream& r, double a) {
  // nu small enough that sigma(a, nu) < 0.9 sigma_max.
  double hi = 0.2;
  for (int i = 0; i < 200; ++i) {
    const Interval iv = invariant_interval(a, c.p, with_nu(c.d, hi));
    if (iv.valid && sigma(a, c.p, with_nu(c.d, hi)) < 0.9 * kSigmaMax) break;
    hi *= 0.9;
  }
  return r.uniform(1e-4, hi);
}

std::vector<Property> properties() {
  std::vector<Property> v;

  v.emplace_back("params.derive_monotone", [](Context& c, Check& k) {
    TheoryParams q = c.p;
    q.nu.reset();
    double prev = 0;
    for (std::int64_t pi : {2, 10, 1000, 100000}) {
      q.pi_size = pi;
      const double cd = derive_constants(q).c_delta;
      if (!(cd > prev)) k.fail("c_delta not increasing in |Pi| at " + std::to_string(pi));
      prev = cd;
    }
    q = c.p;
    q.nu.reset();
    prev = 0;
    for (double dl : {0.5, 0.1, 0.01, 1e-4}) {
      q.delta = dl;
      const double cd = derive_constants(q).c_delta;
      if (!(cd > prev)) k.fail("c_delta not increasing in 1/delta");
      prev = cd;
    }
    prev = 2;
    for (std::int64_t n : {1, 2, 100, 12345, 1000000}) {
      q.n = n;
      const double nu = derive_constants(q).nu;
      if (!(nu < prev)) k.fail("nu not decreasing in n");
      if (std::fabs(nu * nu * static_cast<double>(n) - 1.0) > 1e-14) k.fail("nu^2 n != 1 at n=" + std::to_string(n));
      prev = nu;
    }
  });

  v.emplace_back("params.validate_domain_nu0", [](Context& c, Check& k) {
    Substream r = c.rng(1);
    for (int i = 0; i < c.reps(200, 50); ++i) {
      TheoryParams q = c.p;
      q.c = r.uniform(0.05, 0.99);
      q.gamma = r.uniform(0.0, 0.5);
      q.beta_lo = r.uniform(0.01, 3.0);
      q.beta_hi = q.beta_lo + r.uniform(0.01, 3.0);
      q.L = 2 + static_cast<int>(r.below(12));
      q.nu = 0.0;
      const ValidityReport rep = validate_domain(q, derive_constants(q));
      if (!rep.all_valid() || !rep.sigma_degenerate) k.fail("nu=0 report not fully valid");
    }
  });

  v.emplace_back("dynamics.map_monotone", [](Context& c, Check& k) {
    Substream r = c.rng(2);
    for (int i = 0; i < c.reps(2000, 300); ++i) {
      const double a = r.uniform(0.1, 2.0);
      const double nu = r.uniform(1e-4, 0.05);
      MapSpec s = MapSpec::make(a, c.p, with_nu(c.d, nu));
      const double x = s.domain_lower() + r.uniform(1e-3, 1.0);
      const double h = 1e-6;
      if (!(eval_map(s, x + h) > eval_map(s, x))) k.fail("not increasing in x at " + fmt(x));
      MapSpec s2 = s;
      s2.nu = nu * (1 + 1e-3);
      if (s2.in_domain(x) && !(eval_map(s2, x) < eval_map(s, x))) k.fail("not decreasing in nu");
      MapSpec s3 = s;
      s3.a = a * 1.01;
      if (!(eval_map(s3, x) > eval_map(s, x))) k.fail("not increasing in a");
    }
  });

  v.emplace_back("dynamics.reproducible", [](Context& c, Check& k) {
    const Interval iv = invariant_interval(1.0, c.p, c.d);
    const double x0 = iv.valid ? 0.5 * (iv.lo + iv.hi) : 0.5;
    const Trajectory a = iterate_baseline(c.p, c.d, x0, 100);
    const Trajectory b = iterate_baseline(c.p, c.d, x0, 100);
    if (a.values != b.values) k.fail("baseline trajectory differs between runs");
    const Trajectory e = iterate_curriculum(c.p, c.d, x0, true);
    const Trajectory f = iterate_curriculum(c.p, c.d, x0, true);
    if (e.values != f.values || e.final_value != f.final_value) k.fail("curriculum trajectory differs");
  });

  v.emplace_back("dynamics.a_mid_telescoping", [](Context& c, Check& k) {
    Substream r = c.rng(3);
    for (int i = 0; i < 200; ++i) {
      const int L = 2 + static_cast<int>(r.below(30));
      const double b = r.uniform(0.01, 5.0);
      const auto co = curriculum_coefficients(L, 0.5 * b, b);
      double prod = 1.0;
      for (double a : co.a_mid) prod *= a;
      const double want = std::pow(static_cast<double>(L), -b);
      if (std::fabs(prod / want - 1.0) > 1e-12) k.fail("prod a_mid != L^-beta at L=" + std::to_string(L));
    }
  });

  v.emplace_back("cubic.root_oracle", [](Context& c, Check& k) {
    Substream r = c.rng(4);
    for (int i = 0; i < c.reps(1000, 200); ++i) {
      const double s = r.uniform(1e-4, kSigmaMax - 1e-4);
      const CubicRoots cr = cubic_roots(s);
      const double lo = bisect_cubic(s * s, 0.0, 1.0 / 3.0, true);
      const double hi = bisect_cubic(s * s, 1.0 / 3.0, 1.0, false);
      if (std::fabs(cr.y_minus - lo) > 1e-10 || std::fabs(cr.y_plus - hi) > 1e-10) k.fail("root mismatch at sigma=" + fmt(s));
    }
  });

  v.emplace_back("cubic.inclusion_monotone", [](Context& c, Check& k) {
    Substream r = c.rng(5);
    for (int i = 0; i < c.reps(500, 100); ++i) {
      const double a1 = r.uniform(0.2, 1.5);
      const double a2 = a1 + r.uniform(1e-3, 0.5);
      const double nu = random_admissible_nu(c, r, a1);
      const Interval i1 = invariant_interval(a1, c.p, with_nu(c.d, nu));
      const Interval i2 = invariant_interval(a2, c.p, with_nu(c.d, nu));
      if (i1.valid && !(i2.valid && i2.lo < i1.lo && i1.hi < i2.hi)) k.fail("I(a1) not inside I(a2)");
      const double nu2 = nu * r.uniform(1.001, 1.5);
      const Interval j2 = invariant_interval(a1, c.p, with_nu(c.d, nu2));
      if (j2.valid && !(i1.lo < j2.lo && j2.hi < i1.hi)) k.fail("I(a, nu2) not inside I(a, nu1)");
    }
  });

  v.emplace_back("cubic.baseline_interval_in_nu", [](Context& c, Check& k) {
    Interval prev = invariant_interval(1.0, c.p, with_nu(c.d, 1e-5));
    for (double nu = 2e-5; nu < 0.1; nu *= 1.3) {
      const Interval cur = invariant_interval(1.0, c.p, with_nu(c.d, nu));
      if (!cur.valid) break;
      if (!(cur.lo > prev.lo && cur.hi < prev.hi && cur.length() < prev.length())) k.fail("not monotone at nu=" + fmt(nu));
      prev = cur;
    }
  });

  v.emplace_back("cubic.gap_identity", [](Context& c, Check& k) {
    Substream r = c.rng(6);
    for (int i = 0; i < c.reps(500, 100); ++i) {
      const double a = r.uniform(0.2, 1.5);
      const double nu = random_admissible_nu(c, r, a);
      const DerivedConstants d = with_nu(c.d, nu);
      const Interval iv = invariant_interval(a, c.p, d);
      if (!iv.valid) continue;
      const double s = sigma(a, c.p, d);
      const double want = (1 - c.p.gamma - d.c_delta_prime * nu / a) * exact_gap(s);
      if (std::fabs(iv.length() / want - 1) > 1e-12) k.fail("gap identity off at sigma=" + fmt(s));
      if (!(exact_gap(s) >= gap_lower_bound(s))) k.fail("gap below bound");
    }
  });

  v.emplace_back("cubic.fixed_point_derivatives", [](Context& c, Check& k) {
    Substream r = c.rng(7);
    for (int i = 0; i < 500; ++i) {
      const double s = r.uniform(1e-4, kSigmaMax - 1e-3);
      const CubicRoots cr = cubic_roots(s);
      auto gp = [](double y) { return (1 - y) / (2 * y); };
      if (!(gp(cr.y_minus) > 1.0 && gp(cr.y_plus) < 1.0)) k.fail("derivative classification at sigma=" + fmt(s));
    }
  });

  v.emplace_back("regions.E_monotone", [](Context& c, Check& k) {
    Substream r = c.rng(8);
    const double h = 1e-6, guard = 1e-9;
    int tested = 0;
    for (int i = 0; i < c.reps(2000, 300); ++i) {
      const double bl = r.uniform(0.01, 1.0);
      const double bh = bl + r.uniform(0.05, 1.5);
      const double nu = r.uniform(1e-4, 0.03);
      const double x0 = r.uniform(0.05, 1 - c.p.gamma);
      auto E = [&](double b1, double b2, double n, double x) { return evaluate_error_terms({b1, b2, n, x}, c.p, c.d); };
      const auto e0 = E(bl, bh, nu, x0);
      const auto en = E(bl, bh, nu + h, x0);
      const auto ex = E(bl, bh, nu, x0 + h);
      const auto eb = E(bl, bh + h, nu, x0);
      if (!e0.ok() || !en.ok() || !ex.ok() || !eb.ok()) continue;
      ++tested;
      const double E0 = e0.terms.E;
      if (en.terms.E - E0 > guard) k.fail("dE/dnu >= 0");
      if (E0 - ex.terms.E > guard) k.fail("dE/dx0 <= 0");
      if (eb.terms.E - E0 > guard) k.fail("dE/dbeta >= 0");
      if (!(e0.terms.T3 > e0.terms.T1)) k.fail("T3 <= T1 at nu=" + fmt(nu));
      const double q = e0.terms.q;
      double direct = 0, qp = 1;
      for (int j = 0; j <= c.p.L - 2; ++j, qp *= q) direct += qp;
      const double closed = (1 - std::pow(q, c.p.L - 1)) / (1 - q);
      if (std::fabs(closed / direct - 1) > 1e-12) k.fail("geometric identity");
    }
    if (tested < 10) k.fail("too few admissible tuples");
  });

  v.emplace_back("regions.coefficients_increasing", [](Context& c, Check& k) {
    double pa0 = 0, paL = 0;
    for (double b = 0.01; b < 5; b += 0.05) {
      const auto co = curriculum_coefficients(c.p.L, b, b + 1);
      if (!(co.a0 > pa0 && co.aL > paL && co.a0 >= 1 && co.aL >= 1)) k.fail("a0/aL not increasing at " + fmt(b));
      pa0 = co.a0;
      paL = co.aL;
    }
  });

  v.emplace_back("regions.threshold_equivalence", [](Context& c, Check& k) {
    Substream r = c.rng(9);
    const CriticalValue nc = critical_nu_c(c.p.beta_lo, c.p.beta_hi, c.p, c.d);
    for (int i = 0; i < c.reps(200, 40); ++i) {
      const double nu = r.uniform(1e-4, 0.95 * nc.value);
      const double x = improvement_threshold_x(c.p.beta_lo, c.p.beta_hi, nu, c.p, c.d);
      for (int j = 0; j < 5; ++j) {
        const double x0 = r.uniform(1e-3, 1 - c.p.gamma);
        if (std::fabs(x0 - x) < 1e-9) continue;
        const auto ev = evaluate_error_terms({c.p.beta_lo, c.p.beta_hi, nu, x0}, c.p, c.d);
        const bool neg = ev.ok() && -ev.terms.E - 0.5 * (ev.terms.aL - 1) * (1 - c.p.gamma) < 0;
        if (neg != (x0 > x)) k.fail("N<0 disagrees with x0 > x(nu) at nu=" + fmt(nu));
      }
    }
    double prev = 0;
    for (double nu = 1e-4; nu < nc.value; nu += nc.value / 50) {
      const double x = improvement_threshold_x(c.p.beta_lo, c.p.beta_hi, nu, c.p, c.d);
      if (!(x > prev)) k.fail("x(nu) not increasing at " + fmt(nu));
      prev = x;
    }
  });

  v.emplace_back("regions.nu_star_below_nu_T", [](Context& c, Check& k) {
    const double nT = critical_nu_T(c.p, c.d);
    const int n = c.reps(10, 4);
    const double x0 = 0.5 * (1 - c.p.gamma);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double bl = 0.05 + 0.95 * i / (n - 1);
        const double bh = 1.05 + 1.95 * j / (n - 1);
        const double ns = nu_star(bl, bh, x0, c.p, c.d).value;
        if (!(ns > 0 && ns < nT)) k.fail("nu* not in (0, nu_T) at beta'=" + fmt(bl));
      }
  });

  v.emplace_back("regions.h_increasing", [](Context&, Check& k) {
    for (int L : {2, 3, 5, 10}) {
      double prev = 0;
      for (double b = 0.01; b <= 20; b += 0.01) {
        const double h = aL_ratio_h(b, L);
        if (!(h > prev)) k.fail("h not increasing at L=" + std::to_string(L) + " beta'=" + fmt(b));
        prev = h;
      }
    }
  });

  v.emplace_back("regions.conditional_mean", [](Context&, Check& k) {
    for (int L = 2; L <= 12; ++L)
      for (int bi = 0; bi < 20; ++bi) {
        const double b = 0.05 + 4.9 * bi / 19;
        for (int ti = 0; ti < 50; ++ti) {
          const double t = std::log(static_cast<double>(L)) * ti / 50;
          const auto cm = conditional_mean_check(L, b, t);
          if (cm.lhs > cm.rhs * (1 + 1e-12)) k.fail("E[X-t|X>t] > E[X|X>0] at L=" + std::to_string(L));
        }
      }
  });

  v.emplace_back("montecarlo.deterministic", [](Context& c, Check& k) {
    ScanConfig cfg = default_scan_config(Panel::a, true);
    cfg.threads = c.opt.threads;
    const ScanResult a = run_scan(cfg, c.p, c.d);
    cfg.threads = 1;
    const ScanResult b = run_scan(cfg, c.p, c.d);
    for (std::size_t i = 0; i < a.cells.size(); ++i)
      if (a.cells[i].measured.lo != b.cells[i].measured.lo || a.cells[i].measured.hi != b.cells[i].measured.hi)
        k.fail("scan differs between runs");
  });

  v.emplace_back("montecarlo.measured_superset", [](Context& c, Check& k) {
    for (Panel pn : {Panel::c, Panel::d}) {
      ScanConfig cfg = default_scan_config(pn, c.opt.fast);
      cfg.threads = c.opt.threads;
      const ScanResult res = run_scan(cfg, c.p, c.d);
      for (const auto& cell : res.cells) {
        const Interval im = feasibility_interval(cell.beta_lo, cell.beta_hi, cell.nu, c.p, c.d);
        const Interval& in = cell.analytic;
        if (!im.valid || !in.valid) continue;
        const double lo = std::max(im.lo, in.lo), hi = std::min(im.hi, in.hi);
        if (!(lo < hi)) continue;
        if (!cell.measured.valid || cell.measured.lo > lo + res.grid_step || cell.measured.hi < hi - res.grid_step)
          k.fail(std::string("panel ") + panel_letter(pn) + " measured misses analytic at nu=" + fmt(cell.nu));
      }
    }
  });

  v.emplace_back("montecarlo.grid_refinement", [](Context& c, Check& k) {
    const double nu = 0.01;
    const ScanCell ref = feasible_cell(c.p.beta_lo, c.p.beta_hi, nu, 32000, c.p, c.d);
    for (int n : {2000, 4000, 8000}) {
      const ScanCell cell = feasible_cell(c.p.beta_lo, c.p.beta_hi, nu, n, c.p, c.d);
      const double step = (1 - c.p.gamma) / n + (1 - c.p.gamma) / 32000;
      if (std::fabs(cell.measured.lo - ref.measured.lo) > step || std::fabs(cell.measured.hi - ref.measured.hi) > step)
        k.fail("endpoint not within one cell of refined estimate at N=" + std::to_string(n));
    }
  });

  v.emplace_back("kernels.scalar_avx2_equivalence", [](Context& c, Check& k) {
    if (!kernels::isa_available(kernels::Isa::avx2)) return;
    Substream r = c.rng(10);
    for (int i = 0; i < c.reps(40, 10); ++i) {
      const double bl = r.uniform(0.01, 1.0), bh = bl + r.uniform(0.05, 1.5);
      const auto co = curriculum_coefficients(c.p.L, bl, bh);
      kernels::ChainSpec s{r.uniform(0, 0.05), c.p.c, c.p.gamma, c.d.c_delta, c.d.c_delta_prime,
                           co.a0, co.aL, co.a_mid.data(), c.p.L};
      const std::vector<double> g = x0_grid(1003, c.p.gamma);
      std::vector<std::uint8_t> f1(g.size()), f2(g.size());
      kernels::classify_x0_grid(kernels::Isa::scalar, s, g, f1);
      kernels::classify_x0_grid(kernels::Isa::avx2, s, g, f2);
      if (f1 != f2) k.fail("classification differs");
      std::vector<double> w(1001), al(1001);
      for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = r.uniform();
        al[j] = r.uniform(1e-3, 1.0);
      }
      const int m = 1 + static_cast<int>(r.below(64));
      const auto a1 = kernels::acceptance_stats(kernels::Isa::scalar, w, al, m);
      const auto a2 = kernels::acceptance_stats(kernels::Isa::avx2, w, al, m);
      if (a1.weighted_sum != a2.weighted_sum || a1.min_value != a2.min_value) k.fail("acceptance stats differ");
    }
  });

  v.emplace_back("sim.ratio_laws", [](Context& c, Check& k) {
    Substream r = c.rng(11);
    for (int i = 0; i < c.reps(200, 40); ++i) {
      SimWorld w;
      const int Q = 5 + static_cast<int>(r.below(200));
      double tot = 0;
      for (int q = 0; q < Q; ++q) {
        w.weights.push_back(r.uniform(0.01, 1.0));
        tot += w.weights.back();
        w.alpha.push_back(r.uniform(0.05, 1.0));
      }
      for (auto& x : w.weights) x /= tot;
      double prev = ratio_Zm_over_alpham(w, 1);
      if (prev < 1.0) k.fail("ratio below 1");
      for (int m = 2; m <= 64; ++m) {
        const double cur = ratio_Zm_over_alpham(w, m);
        if (cur > prev * (1 + 1e-12)) k.fail("ratio increases at m=" + std::to_string(m));
        if (cur < 1.0) k.fail("ratio below 1");
        prev = cur;
      }
      if (std::fabs(ratio_Zm_over_alpham(w, 1024) - 1) > 1e-6) k.fail("ratio not ~1 at m=1024");
    }
    for (int m = 1; m <= 50; ++m) {
      double prev = hm_ratio(0.0, m), prev_excess = 0.0;
      for (int i = 1; i <= 999; ++i) {
        const double y = i / 1000.0;
        const double h = hm_ratio(y, m);
        double denom = 0.0;
        for (int j = 0; j < m; ++j) denom += std::pow(y, j);
        const double excess = std::pow(y, m) / denom;
        if (h < prev || !(excess > prev_excess)) k.fail("h_m not increasing at m=" + std::to_string(m));
        prev = h;
        prev_excess = excess;
      }
    }
  });

  v.emplace_back("sim.acceptance_count_mean", [](Context& c, Check& k) {
    TheoryParams q = c.p;
    q.n = 500;
    q.m = 3;
    const SimWorld w = build_world(2000, 0.5, q, c.opt.seed);
    const int reps = c.reps(400, 100);
    double sum = 0;
    for (int r = 0; r < reps; ++r) sum += static_cast<double>(run_selfimprove(w, q, derive_constants(q), 1, c.opt.seed, r)[0].n_accept);
    const double Zm = kernels::acceptance_stats(w.weights, w.alpha, 3).weighted_sum;
    const double mean = sum / reps, expect = q.n * Zm;
    const double se = std::sqrt(q.n * Zm * (1 - Zm) / reps);
    if (std::fabs(mean - expect) > 3 * se) k.fail("mean n_accept " + fmt(mean) + " vs " + fmt(expect));
  });

  v.emplace_back("sim.update_invariants", [](Context& c, Check& k) {
    TheoryParams q = c.p;
    q.n = 1000;
    q.m = 2;
    const DerivedConstants d = derive_constants(q);
    const SimWorld w = build_world(3000, 0.5, q, c.opt.seed);
    if (!satisfies_coupling(w)) k.fail("built world violates coupling");
    SimWorld cur = w;
    for (int t = 0; t < 4; ++t) {
      SimWorld twin = cur;
      const RoundRecord rec = simulate_round(cur, q, d, t, c.opt.seed, 0);
      const RoundRecord rec2 = simulate_round(twin, q, d, t, c.opt.seed, 0);
      if (rec.V_realized != rec2.V_realized || cur.alpha != twin.alpha) k.fail("round not reproducible");
      if (rec.n_accept > q.n) k.fail("n_accept > n");
      if (expected_reward(cur) != rec.V_realized) k.fail("recomputed V differs from recorded V");
      for (double a : cur.alpha)
        if (!(a > 0.0 && a <= 1.0)) k.fail("alpha outside (0, 1]");
    }
  });

  return v;
}

}  // namespace

std::vector<PropertyResult> run_property_suite(const TheoryParams& p, const VerifyOptions& opt,
                                               const std::function<void(const PropertyResult&)>& on_result) {
  Context ctx{p, derive_constants(p), opt};
  std::vector<PropertyResult> out;
  for (auto& [name, fn] : properties()) {
    PropertyResult res;
    res.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    Check chk;
    try {
      fn(ctx, chk);
      res.passed = chk.ok;
      res.detail = chk.detail();
    } catch (const std::exception& e) {
      res.passed = false;
      res.detail = std::string("exception: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace e2h
