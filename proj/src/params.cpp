#include "e2h/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "e2h/cubic.hpp"
#include "e2h/error.hpp"
#include "e2h/regions.hpp"

namespace e2h {

namespace {

void require(bool ok, const char* invariant) {
  if (!ok) throw ParameterError(std::string("invalid parameter: ") + invariant);
}

}  // namespace

void TheoryParams::validate() const {
  require(std::isfinite(c) && c > 0.0 && c < 1.0, "0 < c < 1");
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma < 1.0, "0 <= gamma < 1");
  require(std::isfinite(delta) && delta > 0.0 && delta < 1.0, "0 < delta < 1");
  require(std::isfinite(delta_prime) && delta_prime > 0.0 && delta_prime <= 1.0, "0 < delta_prime <= 1");
  require(pi_size >= 2, "pi_size >= 2");
  require(std::isfinite(tau) && tau > 0.0 && tau <= 1.0, "0 < tau <= 1");
  require(n >= 1, "n >= 1");
  require(m >= 1, "m >= 1");
  require(L >= 2, "L >= 2");
  require(std::isfinite(beta_lo) && beta_lo > 0.0, "beta_lo > 0");
  require(std::isfinite(beta_hi) && beta_hi > beta_lo, "beta_hi > beta_lo");
  if (nu) require(std::isfinite(*nu) && *nu >= 0.0 && *nu <= 1.0, "0 <= nu <= 1");
}

DerivedConstants derive_constants(const TheoryParams& p) {
  p.validate();
  DerivedConstants d;
  d.c_delta = std::sqrt(2.0 * std::log(static_cast<double>(p.pi_size) / p.delta));
  d.c_delta_prime = std::sqrt(std::log(1.0 / p.delta_prime) / 2.0);
  d.nu = p.nu ? *p.nu : std::sqrt(1.0 / static_cast<double>(p.n));
  return d;
}

DerivedConstants with_nu(DerivedConstants d, double nu) {
  d.nu = nu;
  return d;
}

bool ValidityReport::all_valid() const {
  return std::all_of(entries.begin(), entries.end(), [](const ValidityEntry& e) { return e.valid; });
}

const ValidityEntry& ValidityReport::at(std::string_view computation) const {
  for (const auto& e : entries)
    if (e.computation == computation) return e;
  throw ParameterError("unknown computation: " + std::string(computation));
}

ValidityReport validate_domain(const TheoryParams& p, const DerivedConstants& d, std::optional<double> x0) {
  ValidityReport report;
  report.sigma_degenerate = d.nu == 0.0;

  auto interval_entry = [&](const char* name, double a) {
    ValidityEntry e{name, true, {}};
    try {
      const Interval iv = invariant_interval(a, p, d);
      if (!iv.valid) {
        e.valid = false;
        e.violated = iv.reason;
      }
    } catch (const std::exception& ex) {
      e.valid = false;
      e.violated = ex.what();
    }
    report.entries.push_back(std::move(e));
  };
  interval_entry("baseline_interval", 1.0);
  interval_entry("curriculum_interval", std::exp2(-p.beta_hi));

  {
    ValidityEntry e{"curriculum_maps", true, {}};
    if (std::exp2(-p.beta_hi) * (1.0 - p.gamma) <= d.c_delta_prime * d.nu + kBoundaryTol) {
      e.valid = false;
      e.violated = "2^-beta (1 - gamma) > c_delta' nu";
    }
    report.entries.push_back(std::move(e));
  }

  ErrorFunctionalInputs in{p.beta_lo, p.beta_hi, d.nu,
                           x0.value_or(std::numeric_limits<double>::infinity())};
  const ErrorEvaluation ev = evaluate_error_terms(in, p, d);
  for (const char* name : {"error_functional", "improvement_condition"}) {
    ValidityEntry e{name, ev.ok(), ev.ok() ? std::string{} : std::string(ev.violated)};
    report.entries.push_back(std::move(e));
  }
  return report;
}

const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> keys = {"c",   "gamma", "delta", "delta_prime", "pi_size", "tau",
                                                "n",   "m",     "L",     "beta_lo",     "beta_hi", "nu"};
  return keys;
}

TheoryParams apply_params_json(TheoryParams base, const nlohmann::json& obj, std::vector<std::string>* warnings) {
  if (!obj.is_object()) throw ParameterError("config must be a JSON object");
  const auto& keys = param_keys();
  for (const auto& [key, value] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ParameterError("unknown config key: " + key);
    if (!value.is_number()) throw ParameterError("config key '" + key + "' must be a number");
    const bool integral = key == "pi_size" || key == "n" || key == "m" || key == "L";
    if (integral && !value.is_number_integer()) throw ParameterError("config key '" + key + "' must be an integer");
  }
  auto get = [&](const char* k, auto& field) {
    if (obj.contains(k)) field = obj.at(k).get<std::decay_t<decltype(field)>>();
  };
  get("c", base.c);
  get("gamma", base.gamma);
  get("delta", base.delta);
  get("delta_prime", base.delta_prime);
  get("pi_size", base.pi_size);
  get("tau", base.tau);
  get("n", base.n);
  get("m", base.m);
  get("L", base.L);
  get("beta_lo", base.beta_lo);
  get("beta_hi", base.beta_hi);
  if (obj.contains("nu")) {
    base.nu = obj.at("nu").get<double>();
    if (obj.contains("n") && warnings) warnings->push_back("both n and nu given; nu overrides sqrt(1/n)");
  }
  return base;
}

nlohmann::json params_to_json(const TheoryParams& p) {
  nlohmann::json j = {{"c", p.c},     {"gamma", p.gamma}, {"delta", p.delta},     {"delta_prime", p.delta_prime},
                      {"pi_size", p.pi_size}, {"tau", p.tau}, {"n", p.n},         {"m", p.m},
                      {"L", p.L},     {"beta_lo", p.beta_lo}, {"beta_hi", p.beta_hi}};
  if (p.nu) j["nu"] = *p.nu;
  return j;
}

}  // namespace e2h
