#include "e2h/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "e2h/csv.hpp"
#include "e2h/dynamics.hpp"
#include "e2h/error.hpp"
#include "e2h/kernels.hpp"
#include "e2h/regions.hpp"

namespace e2h {

char panel_letter(Panel panel) { return static_cast<char>('a' + static_cast<int>(panel)); }

Panel parse_panel(std::string_view s) {
  if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'd') return static_cast<Panel>(s[0] - 'a');
  throw ParameterError("invalid parameter: panel must be one of a, b, c, d");
}

bool is_improvement_panel(Panel panel) { return panel == Panel::c || panel == Panel::d; }

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

ScanConfig default_scan_config(Panel panel, bool fast) {
  ScanConfig cfg;
  cfg.panel = panel;
  const int na = fast ? 5 : 18;
  const int nn = fast ? 5 : 16;
  cfg.nus = linspace(0.0, 0.03, nn);
  switch (panel) {
    case Panel::a:
    case Panel::c:
      cfg.fixed = 0.1;
      cfg.axis1 = linspace(0.15, 1.0, na);
      break;
    case Panel::b:
      cfg.fixed = 0.4;
      cfg.axis1 = linspace(0.02, 0.38, na);
      break;
    case Panel::d:
      cfg.fixed = 0.1;
      cfg.axis1 = linspace(0.01, 3.0, na);
      break;
  }
  return cfg;
}

std::vector<double> x0_grid(int points, double gamma) {
  if (points < 1) throw ParameterError("invalid parameter: x0 grid needs at least one point");
  const double step = (1.0 - gamma) / points;
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = (k + 0.5) * step;
  return g;
}

Interval measured_run(std::span<const std::uint8_t> hit, double step, std::optional<double> anchor) {
  std::size_t best_lo = 0, best_len = 0;
  std::optional<std::pair<std::size_t, std::size_t>> anchored;
  const std::size_t n = hit.size();
  std::optional<std::size_t> anchor_idx;
  if (anchor && *anchor >= 0.0) {
    const auto k = static_cast<std::size_t>(std::floor(*anchor / step));
    if (k < n) anchor_idx = k;
  }
  for (std::size_t i = 0; i < n;) {
    if (!hit[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && hit[j]) ++j;
    if (j - i > best_len) {
      best_lo = i;
      best_len = j - i;
    }
    if (anchor_idx && *anchor_idx >= i && *anchor_idx < j) anchored = std::make_pair(i, j - i);
    i = j;
  }
  if (anchored) {
    best_lo = anchored->first;
    best_len = anchored->second;
  }
  Interval iv;
  if (best_len == 0) {
    iv.reason = "no grid point classified";
    return iv;
  }
  iv.lo = static_cast<double>(best_lo) * step;
  iv.hi = static_cast<double>(best_lo + best_len) * step;
  iv.valid = true;
  return iv;
}

namespace {

std::vector<std::uint8_t> classify(double beta_lo, double beta_hi, double nu, const std::vector<double>& grid,
                                   const TheoryParams& p, const DerivedConstants& d) {
  const CurriculumCoefficients k = curriculum_coefficients(p.L, beta_lo, beta_hi);
  kernels::ChainSpec spec;
  spec.nu = nu;
  spec.c = p.c;
  spec.gamma = p.gamma;
  spec.c_delta = d.c_delta;
  spec.c_delta_prime = d.c_delta_prime;
  spec.a0 = k.a0;
  spec.aL = k.aL;
  spec.a_mid = k.a_mid.data();
  spec.L = p.L;
  std::vector<std::uint8_t> flags(grid.size());
  kernels::classify_x0_grid(spec, grid, flags);
  return flags;
}

bool endpoints_agree(const Interval& measured, const Interval& analytic, double step) {
  if (!analytic.valid || !measured.valid) return analytic.valid == measured.valid;
  return std::fabs(measured.lo - analytic.lo) <= step && std::fabs(measured.hi - analytic.hi) <= step;
}

std::optional<double> midpoint(const Interval& iv) {
  if (!iv.valid) return std::nullopt;
  return 0.5 * (iv.lo + iv.hi);
}

ScanCell make_cell(bool improvement, double beta_lo, double beta_hi, double nu, int x0_points,
                   const TheoryParams& p, const DerivedConstants& d) {
  const std::vector<double> grid = x0_grid(x0_points, p.gamma);
  const double step = (1.0 - p.gamma) / x0_points;
  const std::vector<std::uint8_t> flags = classify(beta_lo, beta_hi, nu, grid, p, d);
  std::vector<std::uint8_t> hit(flags.size());
  const std::uint8_t want =
      improvement ? kernels::kImproves : (kernels::kBaselineMonotone | kernels::kCurriculumMonotone);
  for (std::size_t i = 0; i < flags.size(); ++i) hit[i] = (flags[i] & want) == want;

  ScanCell cell;
  cell.beta_lo = beta_lo;
  cell.beta_hi = beta_hi;
  cell.nu = nu;
  cell.analytic = improvement ? improvement_interval(beta_lo, beta_hi, nu, p, d)
                              : feasibility_interval(beta_lo, beta_hi, nu, p, d);
  cell.measured = measured_run(hit, step, midpoint(cell.analytic));
  cell.agree = endpoints_agree(cell.measured, cell.analytic, step);
  return cell;
}

}  // namespace

ScanCell feasible_cell(double beta_lo, double beta_hi, double nu, int x0_points, const TheoryParams& p,
                       const DerivedConstants& d) {
  return make_cell(false, beta_lo, beta_hi, nu, x0_points, p, d);
}

ScanCell improvement_cell(double beta_lo, double beta_hi, double nu, int x0_points, const TheoryParams& p,
                          const DerivedConstants& d) {
  return make_cell(true, beta_lo, beta_hi, nu, x0_points, p, d);
}

namespace {

void check_axis(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw ParameterError(std::string("invalid parameter: empty axis ") + name);
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw ParameterError(std::string("invalid parameter: axis ") + name + " strictly increasing");
}

ScanResult run(const ScanConfig& cfg, bool improvement, const TheoryParams& p, const DerivedConstants& d) {
  check_axis(cfg.axis1, "axis1");
  check_axis(cfg.nus, "nu");
  if (cfg.nus.front() < 0.0) throw ParameterError("invalid parameter: nu >= 0");
  if (cfg.x0_points < 2) throw ParameterError("invalid parameter: x0_points >= 2");

  ScanResult res;
  res.panel = cfg.panel;
  res.grid_step = (1.0 - p.gamma) / cfg.x0_points;
  res.n_axis1 = cfg.axis1.size();
  res.n_nu = cfg.nus.size();
  res.cells.resize(res.n_axis1 * res.n_nu);

  auto betas = [&](double v) -> std::pair<double, double> {
    switch (cfg.panel) {
      case Panel::a:
      case Panel::c:
        return {cfg.fixed, v};
      case Panel::b:
        return {v, cfg.fixed};
      case Panel::d:
        return {v, v + cfg.fixed};
    }
    return {0.0, 0.0};
  };
  for (double v : cfg.axis1) {
    const auto [lo, hi] = betas(v);
    if (!(lo > 0.0 && hi > lo)) throw ParameterError("invalid parameter: 0 < beta_lo < beta_hi on every scan cell");
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < res.cells.size(); idx = next++) {
      const std::size_t i = idx / res.n_nu;
      const std::size_t j = idx % res.n_nu;
      const auto [lo, hi] = betas(cfg.axis1[i]);
      ScanCell cell = make_cell(improvement, lo, hi, cfg.nus[j], cfg.x0_points, p, d);
      cell.axis1 = cfg.axis1[i];
      res.cells[idx] = std::move(cell);
    }
  };
  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return res;
}

}  // namespace

ScanResult scan_feasible_region(const ScanConfig& cfg, const TheoryParams& p, const DerivedConstants& d) {
  return run(cfg, false, p, d);
}

ScanResult scan_improvement_region(const ScanConfig& cfg, const TheoryParams& p, const DerivedConstants& d) {
  return run(cfg, true, p, d);
}

ScanResult run_scan(const ScanConfig& cfg, const TheoryParams& p, const DerivedConstants& d) {
  return is_improvement_panel(cfg.panel) ? scan_improvement_region(cfg, p, d) : scan_feasible_region(cfg, p, d);
}

void write_panel_csv(std::ostream& os, const ScanResult& r) {
  CsvWriter csv(os, {"axis1", "axis2", "measured_len", "analytic_len", "agree"});
  for (const auto& cell : r.cells) csv.row(cell.axis1, cell.nu, cell.measured.length(), cell.analytic.length(), cell.agree);
}

}  // namespace e2h
