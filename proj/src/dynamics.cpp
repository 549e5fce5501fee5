#include "e2h/dynamics.hpp"

#include <cmath>
#include <ostream>

#include "e2h/csv.hpp"
#include "e2h/error.hpp"

namespace e2h {

MapSpec MapSpec::make(double a, const TheoryParams& p, const DerivedConstants& d) {
  return MapSpec{a, d.nu, p.c, p.gamma, d.c_delta, d.c_delta_prime};
}

// The operation order here is mirrored by the batch kernels; keep them in sync.
std::optional<double> try_eval_map(const MapSpec& s, double x) {
  const double rad = s.a * x - s.c_delta_prime * s.nu;
  if (!(rad > 0.0)) return std::nullopt;
  return (1.0 - s.gamma) - (s.c_delta * s.nu) / (s.c * std::sqrt(rad));
}

double eval_map(const MapSpec& s, double x) {
  auto y = try_eval_map(s, x);
  if (!y) throw DomainError("map evaluated outside its domain: a x - c_delta' nu <= 0");
  return *y;
}

CurriculumCoefficients curriculum_coefficients(int L, double beta_lo, double beta_hi) {
  if (L < 2) throw ParameterError("invalid parameter: L >= 2");
  if (!(beta_lo >= 0.0)) throw ParameterError("invalid parameter: beta_lo >= 0");
  if (!(beta_hi > 0.0)) throw ParameterError("invalid parameter: beta_hi > 0");
  double sum = 0.0;
  for (int i = 1; i <= L; ++i) sum += std::pow(static_cast<double>(i), -beta_lo);
  CurriculumCoefficients k;
  k.a0 = L / sum;
  k.aL = sum / std::pow(static_cast<double>(L), 1.0 - beta_lo);
  k.a_mid.reserve(static_cast<std::size_t>(L - 1));
  for (int t = 1; t < L; ++t) k.a_mid.push_back(std::pow(1.0 + 1.0 / t, -beta_hi));
  return k;
}

CurriculumCoefficients curriculum_coefficients(const TheoryParams& p) {
  p.validate();
  return curriculum_coefficients(p.L, p.beta_lo, p.beta_hi);
}

Trajectory iterate_maps(std::span<const double> scales, const TheoryParams& p, const DerivedConstants& d,
                        double x0) {
  Trajectory tr;
  tr.values.reserve(scales.size() + 1);
  tr.values.push_back(x0);
  bool prefix_open = true;
  for (double a : scales) {
    const double x = tr.values.back();
    const auto y = try_eval_map(MapSpec::make(a, p, d), x);
    if (!y) {
      tr.stayed_in_domain = false;
      break;
    }
    const double delta = *y - x;
    const bool up = delta > 0.0;
    const bool flat = std::fabs(delta) < kPlateauTol;
    tr.values.push_back(*y);
    tr.increasing.push_back(up);
    tr.plateau.push_back(flat);
    if (prefix_open && (up || flat)) {
      ++tr.monotone_prefix;
    } else {
      prefix_open = false;
    }
  }
  return tr;
}

Trajectory iterate_baseline(const TheoryParams& p, const DerivedConstants& d, double x0, int steps) {
  if (steps < 0) throw ParameterError("invalid parameter: T >= 0");
  const std::vector<double> scales(static_cast<std::size_t>(steps), 1.0);
  return iterate_maps(scales, p, d, x0);
}

Trajectory iterate_curriculum(const TheoryParams& p, const DerivedConstants& d, double x0, bool with_final_G) {
  const CurriculumCoefficients k = curriculum_coefficients(p);
  std::vector<double> scales;
  scales.reserve(static_cast<std::size_t>(p.L));
  scales.push_back(k.a0);
  scales.insert(scales.end(), k.a_mid.begin(), k.a_mid.end());
  Trajectory tr = iterate_maps(scales, p, d, x0);
  if (with_final_G && tr.stayed_in_domain) {
    tr.final_value = k.aL * tr.values.back();
    tr.final_exceeds_one = *tr.final_value > 1.0;
  }
  return tr;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  CsvWriter csv(os, {"step", "value", "monotone_so_far", "in_domain"});
  bool so_far = true;
  for (std::size_t k = 0; k < tr.values.size(); ++k) {
    if (k > 0) so_far = so_far && (tr.increasing[k - 1] || tr.plateau[k - 1]);
    csv.row(static_cast<long long>(k), tr.values[k], so_far, true);
  }
  if (!tr.stayed_in_domain) {
    csv.row(static_cast<long long>(tr.values.size()), std::nan(""), false, false);
  }
}

}  // namespace e2h
