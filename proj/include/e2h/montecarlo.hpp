#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "e2h/cubic.hpp"
#include "e2h/params.hpp"

namespace e2h {

/// Panels a-b scan the feasible region, c-d the improvement region.
/// a, c: beta' fixed, axis1 = beta.   b: beta fixed, axis1 = beta'.
/// d: Delta = beta - beta' fixed, axis1 = beta'.
enum class Panel { a, b, c, d };

char panel_letter(Panel panel);
Panel parse_panel(std::string_view s);  // "a".."d"; throws ParameterError
bool is_improvement_panel(Panel panel);

struct ScanConfig {
  Panel panel = Panel::a;
  int x0_points = 2000;        // cell centres (k + 1/2)(1 - gamma)/x0_points
  std::vector<double> axis1;   // beta or beta', strictly increasing
  std::vector<double> nus;     // axis2, strictly increasing, >= 0
  double fixed = 0.1;          // beta', beta or Delta depending on the panel
  int threads = 1;
};

/// Default axis ranges for each panel.
ScanConfig default_scan_config(Panel panel, bool fast = false);

struct ScanCell {
  double axis1 = 0.0;
  double nu = 0.0;
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  Interval measured;
  Interval analytic;
  bool agree = false;  // both endpoints within one grid cell, or both empty
};

struct ScanResult {
  Panel panel = Panel::a;
  double grid_step = 0.0;
  std::size_t n_axis1 = 0;
  std::size_t n_nu = 0;
  std::vector<ScanCell> cells;  // axis1-major: cells[i * n_nu + j]

  const ScanCell& at(std::size_t i, std::size_t j) const { return cells.at(i * n_nu + j); }
};

/// x0 grid of cell centres on (0, 1 - gamma).
std::vector<double> x0_grid(int points, double gamma);

/// Maximal run of set entries containing `anchor` when it is set, otherwise
/// the longest run (earliest on ties). Endpoints are the outer cell edges.
Interval measured_run(std::span<const std::uint8_t> hit, double step, std::optional<double> anchor);

/// One cell of a feasibility scan (both bound sequences monotone for L steps).
ScanCell feasible_cell(double beta_lo, double beta_hi, double nu, int x0_points, const TheoryParams& p,
                       const DerivedConstants& d);
/// One cell of an improvement scan (aL * H-chain > F^L at horizon L).
ScanCell improvement_cell(double beta_lo, double beta_hi, double nu, int x0_points, const TheoryParams& p,
                          const DerivedConstants& d);

ScanResult scan_feasible_region(const ScanConfig& cfg, const TheoryParams& p, const DerivedConstants& d);
ScanResult scan_improvement_region(const ScanConfig& cfg, const TheoryParams& p, const DerivedConstants& d);
/// Dispatches on the panel kind.
ScanResult run_scan(const ScanConfig& cfg, const TheoryParams& p, const DerivedConstants& d);

/// CSV: axis1,axis2,measured_len,analytic_len,agree.
void write_panel_csv(std::ostream& os, const ScanResult& r);

}  // namespace e2h
