#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "e2h/params.hpp"

namespace e2h {

/// Synthetic question universe: a distribution over Q questions and the
/// current per-question acceptance probabilities.
struct SimWorld {
  std::vector<double> weights;  // sums to 1
  std::vector<double> alpha;    // in (0, 1]
  double c = 0.9;
  double gamma = 0.0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr double kAlphaFloor = 1e-4;

/// V = sum_q w_q alpha_q, summed in index order.
double expected_reward(const SimWorld& w);

/// Pr_{q ~ w}[alpha_q < c V].
double low_acceptance_mass(const SimWorld& w);

/// Weights sum to 1, alpha in (0, 1], and the low-acceptance mass is at most gamma.
bool satisfies_coupling(const SimWorld& w);

/// Uniform weights; floor(gamma Q) questions receive alpha in c V (0.2, 0.9),
/// the rest c V + (1 - c V) lambda u_q with u_q ~ U(0.01, 1) and lambda set so
/// that V equals V_target. Throws ParameterError when no such vector exists.
SimWorld build_world(std::int64_t Q, double V_target, const TheoryParams& p, std::uint64_t seed);

/// 1 - (1 - alpha)^m by repeated squaring.
double acceptance_m(double alpha, int m);

/// E_w[alpha^(m)] / min_q alpha^(m). Throws DomainError when min alpha is 0.
double ratio_Zm_over_alpham(const SimWorld& w, int m);

/// (1 - y^(m+1)) / (1 - y^m); h_m(0) = 1. Throws DomainError unless y in [0, 1).
double hm_ratio(double y, int m);

struct RoundRecord {
  int replication = 0;
  int round = 0;
  std::int64_t n_accept = 0;
  double Z_m = 0.0;          // E_w[alpha^(m)] before the update
  double alpha_m_min = 0.0;  // min_q alpha^(m) before the update
  double V_before = 0.0;
  double V_realized = 0.0;   // after the update
  double bound = 0.0;        // tau (1 - (Z_m / alpha_m_min) c_delta / sqrt(n_accept))
  bool bound_satisfied = false;
  bool collapsed = false;    // n_accept == 0; alpha left unchanged
};

/// One round applied to `world` in place, drawing from the Philox substream
/// (seed, 1, replication, round).
RoundRecord simulate_round(SimWorld& world, const TheoryParams& p, const DerivedConstants& d, int round,
                           std::uint64_t seed, int replication = 0);

/// Rounds of sample n questions, keep those with an accepted answer among m
/// tries, update alpha by the surrogate rule.
std::vector<RoundRecord> run_selfimprove(SimWorld world, const TheoryParams& p, const DerivedConstants& d,
                                         int rounds, std::uint64_t seed, int replication = 0);

struct SimulationConfig {
  std::int64_t Q = 10000;
  double V_target = 0.5;
  int rounds = 5;
  int replications = 500;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SimulationReport {
  std::vector<RoundRecord> records;  // replication-major
  std::size_t satisfied = 0;
  std::size_t scored = 0;            // rounds that did not collapse
  double coverage() const { return scored ? static_cast<double>(satisfied) / scored : 1.0; }
  double mean_slack = 0.0;           // mean of V_realized - bound over scored rounds
  double mean_n_accept = 0.0;
};

/// One world built from cfg.seed; replications differ only in their substreams.
SimulationReport run_replications(const SimulationConfig& cfg, const TheoryParams& p, const DerivedConstants& d);

/// CSV: replication,round,n_accept,Z_m,alpha_m_min,V_realized,bound,bound_satisfied.
void write_simulation_csv(std::ostream& os, const std::vector<RoundRecord>& records);

}  // namespace e2h
