#include <doctest.h>

#include <cmath>
#include <sstream>

#include "e2h/error.hpp"
#include "e2h/stochastic_sim.hpp"
#include "../oracles.hpp"

using namespace e2h;

TEST_CASE("built world satisfies the coupling assumption") {
  const TheoryParams p;
  const SimWorld w = build_world(10000, 0.5, p, 3);
  CHECK(w.size() == 10000);
  CHECK(satisfies_coupling(w));
  CHECK(expected_reward(w) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(low_acceptance_mass(w) <= p.gamma);
}

TEST_CASE("trivial coupling cases") {
  SimWorld w;
  w.weights.assign(4, 0.25);
  w.alpha.assign(4, 0.5);
  w.gamma = 0.0;
  CHECK(satisfies_coupling(w));
  w.alpha = {0.01, 0.2, 0.9, 1.0};
  w.c = 0.0;
  CHECK(satisfies_coupling(w));
}

TEST_CASE("build_world rejects impossible targets") {
  const TheoryParams p;
  CHECK_THROWS_AS(build_world(1000, 1.5, p, 1), ParameterError);
}

TEST_CASE("ratio laws") {
  SimWorld w;
  w.weights.assign(3, 1.0 / 3);
  w.alpha.assign(3, 0.4);
  for (int m : {1, 2, 7, 64}) CHECK(ratio_Zm_over_alpham(w, m) == doctest::Approx(1.0).epsilon(1e-15));
  w.alpha = {0.05, 0.5, 0.9};
  double prev = ratio_Zm_over_alpham(w, 1);
  for (int m = 2; m <= 64; ++m) {
    const double r = ratio_Zm_over_alpham(w, m);
    CHECK(r <= prev);
    prev = r;
  }
  CHECK(std::fabs(ratio_Zm_over_alpham(w, 1024) - 1) < 1e-6);
  w.alpha[0] = 0.0;
  CHECK_THROWS_AS(ratio_Zm_over_alpham(w, 2), DomainError);
}

TEST_CASE("acceptance with m tries") {
  CHECK(acceptance_m(0.3, 1) == doctest::Approx(0.3));
  CHECK(acceptance_m(0.3, 3) == doctest::Approx(1 - 0.7 * 0.7 * 0.7).epsilon(1e-15));
}

TEST_CASE("h_m") {
  for (double y : {0.0, 0.3, 0.9}) CHECK(hm_ratio(y, 1) == doctest::Approx(1 + y).epsilon(1e-15));
  for (int m : {1, 5, 40}) CHECK(hm_ratio(0.0, m) == 1.0);
  for (double y : {0.2, 0.6, 0.95})
    for (int m : {2, 9, 30})
      CHECK(hm_ratio(y, m) - 1 == doctest::Approx(static_cast<double>(oracle::hm_excess(y, m))).epsilon(1e-12));
  CHECK_THROWS_AS(hm_ratio(1.0, 3), DomainError);
}

TEST_CASE("simulation determinism and bound") {
  TheoryParams p;
  p.n = 2000;
  p.m = 4;
  const DerivedConstants d = derive_constants(p);
  const SimWorld w = build_world(2000, 0.5, p, 11);
  const auto a = run_selfimprove(w, p, d, 3, 99);
  const auto b = run_selfimprove(w, p, d, 3, 99);
  REQUIRE(a.size() == 3);
  std::ostringstream sa, sb;
  write_simulation_csv(sa, a);
  write_simulation_csv(sb, b);
  CHECK(sa.str() == sb.str());
  for (const auto& r : a) {
    CHECK_FALSE(r.collapsed);
    CHECK(r.bound_satisfied);
    CHECK(r.V_realized >= r.bound);
  }
}

TEST_CASE("slack shrinks with the budget") {
  TheoryParams p;
  p.m = 4;
  SimulationConfig cfg;
  cfg.Q = 2000;
  cfg.rounds = 1;
  cfg.replications = 100;
  cfg.seed = 5;
  p.n = 1000;
  const double s1 = run_replications(cfg, p, derive_constants(p)).mean_slack;
  p.n = 4000;
  const double s4 = run_replications(cfg, p, derive_constants(p)).mean_slack;
  CHECK(s1 / s4 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("larger m raises the bound") {
  TheoryParams p;
  p.n = 2000;
  SimulationConfig cfg;
  cfg.Q = 2000;
  cfg.rounds = 1;
  cfg.replications = 100;
  cfg.seed = 8;
  auto mean_bound = [&](int m) {
    p.m = m;
    const SimulationReport r = run_replications(cfg, p, derive_constants(p));
    double s = 0;
    for (const auto& rec : r.records) s += rec.bound;
    return s / r.records.size();
  };
  CHECK(mean_bound(4) >= mean_bound(1));
}
