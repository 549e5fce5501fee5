#include <doctest.h>

#include <cmath>
#include <sstream>

#include "e2h/cubic.hpp"
#include "e2h/dynamics.hpp"
#include "e2h/error.hpp"
#include "e2h/regions.hpp"
#include "../oracles.hpp"

using namespace e2h;

TEST_CASE("curriculum coefficients") {
  const CurriculumCoefficients k = curriculum_coefficients(5, 0.1, 0.4);
  CHECK(k.aL == doctest::Approx(oracle::kAL_L5_01).epsilon(1e-14));
  CHECK(k.a0 == doctest::Approx(oracle::kA0_L5_01).epsilon(1e-14));
  REQUIRE(k.a_mid.size() == 4);
  CHECK(k.mid(1) == doctest::Approx(oracle::kTwoPowMinus04).epsilon(1e-15));
  CHECK(k.mid(3) == doctest::Approx(std::pow(4.0 / 3.0, -0.4)).epsilon(1e-15));
  const CurriculumCoefficients z = curriculum_coefficients(9, 0.0, 0.4);
  CHECK(z.a0 == 1.0);
  CHECK(z.aL == 1.0);
  CHECK_THROWS_AS(curriculum_coefficients(1, 0.1, 0.4), ParameterError);
  CHECK_THROWS_AS(curriculum_coefficients(5, -0.1, 0.4), ParameterError);
}

TEST_CASE("map evaluation") {
  TheoryParams p;
  SUBCASE("nu = 0 gives 1 - gamma") {
    const MapSpec s = MapSpec::make(1.0, p, with_nu(derive_constants(p), 0.0));
    for (double x : {1e-6, 0.3, 0.97}) CHECK(eval_map(s, x) == doctest::Approx(1 - p.gamma).epsilon(1e-15));
  }
  SUBCASE("diverges towards the domain boundary") {
    const MapSpec s = MapSpec::make(1.0, p, derive_constants(p));
    const double b = s.domain_lower();
    double prev = eval_map(s, b + 1e-2);
    for (double eps : {1e-4, 1e-6, 1e-8, 1e-10}) {
      const double v = eval_map(s, b + eps);
      CHECK(v < prev);
      prev = v;
    }
    CHECK(prev < -10);
    CHECK_THROWS_AS(eval_map(s, b), DomainError);
    CHECK_FALSE(try_eval_map(s, b * 0.5).has_value());
  }
  SUBCASE("fixed point residual") {
    const DerivedConstants d = derive_constants(p);
    const Interval iv = invariant_interval(1.0, p, d);
    const MapSpec s = MapSpec::make(1.0, p, d);
    CHECK(std::fabs(eval_map(s, iv.hi) - iv.hi) < 1e-10);
    CHECK(std::fabs(eval_map(s, iv.lo) - iv.lo) < 1e-10);
  }
  SUBCASE("matches the long double map") {
    const DerivedConstants d = derive_constants(p);
    const oracle::Consts k{p.c, p.gamma, d.c_delta, d.c_delta_prime};
    const MapSpec s = MapSpec::make(0.8, p, d);
    for (double x : {0.05, 0.2, 0.6, 0.9})
      CHECK(eval_map(s, x) == doctest::Approx(static_cast<double>(oracle::map(0.8, d.nu, x, k))).epsilon(1e-14));
  }
}

TEST_CASE("baseline trajectories") {
  const TheoryParams p;
  const DerivedConstants d = derive_constants(p);
  const Interval iv = invariant_interval(1.0, p, d);
  SUBCASE("inside the interval") {
    const Trajectory tr = iterate_baseline(p, d, 0.5 * (iv.lo + iv.hi), 100);
    CHECK(tr.steps() == 100);
    CHECK(tr.monotone());
    for (double v : tr.values) CHECK((v > iv.lo && v < iv.hi + kBoundaryTol));
  }
  SUBCASE("at the lower fixed point") {
    const Trajectory tr = iterate_baseline(p, d, iv.lo, 1);
    CHECK(std::fabs(tr.values[1] - iv.lo) < 1e-10);
  }
  SUBCASE("just below the lower fixed point") {
    const Trajectory tr = iterate_baseline(p, d, iv.lo - 1e-4, 50);
    CHECK(tr.monotone_prefix == 0);
    CHECK_FALSE(tr.stayed_in_domain);
    for (std::size_t k = 0; k + 1 < tr.values.size(); ++k) CHECK(tr.values[k + 1] < tr.values[k]);
  }
}

TEST_CASE("curriculum trajectories") {
  TheoryParams p;
  SUBCASE("nu = 0") {
    const DerivedConstants d = with_nu(derive_constants(p), 0.0);
    const Trajectory tr = iterate_curriculum(p, d, 0.3, true);
    REQUIRE(tr.final_value.has_value());
    CHECK(*tr.final_value == doctest::Approx(curriculum_coefficients(p).aL * (1 - p.gamma)).epsilon(1e-15));
    for (std::size_t k = 1; k < tr.values.size(); ++k) CHECK(tr.values[k] == doctest::Approx(1 - p.gamma));
    p.beta_lo = 1e-12;
    CHECK(*iterate_curriculum(p, d, 0.3, true).final_value == doctest::Approx(1 - p.gamma).epsilon(1e-11));
  }
  SUBCASE("curriculum beats baseline inside the improvement interval") {
    const DerivedConstants d = derive_constants(p);
    const Interval in = improvement_interval(p.beta_lo, p.beta_hi, d.nu, p, d);
    REQUIRE(in.valid);
    for (double f : {0.1, 0.5, 0.9}) {
      const double x0 = in.lo + f * (in.hi - in.lo);
      const Trajectory c = iterate_curriculum(p, d, x0, true);
      const Trajectory b = iterate_baseline(p, d, x0, p.L);
      REQUIRE(c.final_value.has_value());
      CHECK(*c.final_value > b.values.back());
    }
  }
}

TEST_CASE("trajectory CSV") {
  const TheoryParams p;
  const DerivedConstants d = derive_constants(p);
  std::ostringstream os;
  write_trajectory_csv(os, iterate_baseline(p, d, 0.5, 3));
  const std::string s = os.str();
  CHECK(s.rfind("step,value,monotone_so_far,in_domain\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 5);
}
