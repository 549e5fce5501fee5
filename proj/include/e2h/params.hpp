#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace e2h {

/// Absolute tolerance for comparisons against domain boundaries.
inline constexpr double kBoundaryTol = 1e-12;

/// Theory constants shared by every module.
///
/// Defaults are the artifact's reference configuration; `nu`, when set,
/// replaces sqrt(1/n) so that budget scans can treat it as a continuous axis.
struct TheoryParams {
  double c = 0.9;             // acceptance/reward coupling, (0,1)
  double gamma = 0.02;        // exceptional-question mass, [0,1)
  double delta = 0.05;        // MLE confidence, (0,1)
  double delta_prime = 0.05;  // acceptance-count confidence, (0,1]
  std::int64_t pi_size = 1000;
  double tau = 1.0;
  std::int64_t n = 10000;     // questions per iteration
  std::int64_t m = 1;         // answers per question
  int L = 5;                  // difficulty levels
  double beta_lo = 0.1;       // beta'
  double beta_hi = 0.4;       // beta
  std::optional<double> nu;

  /// Throws ParameterError naming the first violated invariant.
  void validate() const;
};

struct DerivedConstants {
  double c_delta = 0.0;        // sqrt(2 log(|Pi|/delta))
  double c_delta_prime = 0.0;  // sqrt(log(1/delta')/2)
  double nu = 0.0;             // sqrt(1/n) unless overridden
};

DerivedConstants derive_constants(const TheoryParams& p);

/// Same constants with a different budget parameter.
DerivedConstants with_nu(DerivedConstants d, double nu);

struct ValidityEntry {
  std::string computation;
  bool valid = true;
  std::string violated;  // empty when valid
};

/// Well-definedness of each downstream computation at (p, d).
struct ValidityReport {
  std::vector<ValidityEntry> entries;
  bool sigma_degenerate = false;  // nu == 0: every nu-term vanishes

  bool all_valid() const;
  const ValidityEntry& at(std::string_view computation) const;
};

/// Never throws. Computations reported: "baseline_interval" (I(1,nu)),
/// "curriculum_interval" (I(2^-beta,nu)), "curriculum_maps",
/// "error_functional" and "improvement_condition". Without x0 the functional
/// is checked in its x0 -> infinity limit.
ValidityReport validate_domain(const TheoryParams& p, const DerivedConstants& d,
                               std::optional<double> x0 = std::nullopt);

/// Field names accepted in config files (exactly the TheoryParams members).
const std::vector<std::string>& param_keys();

/// Applies the keys of a JSON object onto `base`. Unknown keys and wrong
/// types throw ParameterError. When both "n" and "nu" end up explicitly set,
/// nu wins and a warning is appended.
TheoryParams apply_params_json(TheoryParams base, const nlohmann::json& obj,
                               std::vector<std::string>* warnings = nullptr);

nlohmann::json params_to_json(const TheoryParams& p);

}  // namespace e2h
