#include "e2h/stochastic_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "e2h/csv.hpp"
#include "e2h/error.hpp"
#include "e2h/kernels.hpp"
#include "e2h/rng.hpp"

namespace e2h {

namespace {

constexpr std::uint32_t kWorldStream = 0;
constexpr std::uint32_t kSampleStream = 1;

}  // namespace

double expected_reward(const SimWorld& w) {
  double v = 0.0;
  for (std::size_t q = 0; q < w.size(); ++q) v += w.weights[q] * w.alpha[q];
  return v;
}

double low_acceptance_mass(const SimWorld& w) {
  const double cut = w.c * expected_reward(w);
  double mass = 0.0;
  for (std::size_t q = 0; q < w.size(); ++q)
    if (w.alpha[q] < cut) mass += w.weights[q];
  return mass;
}

bool satisfies_coupling(const SimWorld& w) {
  if (w.weights.size() != w.alpha.size() || w.weights.empty()) return false;
  double total = 0.0;
  for (double x : w.weights) {
    if (!(x >= 0.0)) return false;
    total += x;
  }
  if (std::fabs(total - 1.0) > 1e-9) return false;
  for (double a : w.alpha)
    if (!(a > 0.0 && a <= 1.0)) return false;
  return low_acceptance_mass(w) <= w.gamma + 1e-12;
}

SimWorld build_world(std::int64_t Q, double V_target, const TheoryParams& p, std::uint64_t seed) {
  p.validate();
  if (Q < 1) throw ParameterError("invalid parameter: Q >= 1");
  if (!(V_target > 0.0 && V_target < 1.0)) throw ParameterError("invalid parameter: 0 < V_target < 1");
  SimWorld w;
  w.c = p.c;
  w.gamma = p.gamma;
  const auto n = static_cast<std::size_t>(Q);
  w.weights.assign(n, 1.0 / static_cast<double>(Q));
  w.alpha.assign(n, 0.0);

  const auto n_low = static_cast<std::size_t>(std::floor(p.gamma * static_cast<double>(Q)));
  const double cut = p.c * V_target;
  Substream rng(seed, kWorldStream, 0, 0);
  double low_sum = 0.0;
  for (std::size_t q = 0; q < n_low; ++q) {
    w.alpha[q] = cut * rng.uniform(0.2, 0.9);
    low_sum += w.alpha[q];
  }
  std::vector<double> u(n - n_low);
  double u_sum = 0.0;
  for (auto& x : u) {
    x = rng.uniform(0.01, 1.0);
    u_sum += x;
  }
  const double n_high = static_cast<double>(n - n_low);
  const double need = V_target * static_cast<double>(Q) - low_sum - n_high * cut;
  const double lambda = u_sum > 0.0 ? need / ((1.0 - cut) * u_sum) : -1.0;
  if (n_low == n || !(lambda >= 0.0 && lambda <= 1.0))
    throw ParameterError("infeasible world: no alpha vector meets V_target under the (c, gamma) coupling");
  for (std::size_t k = 0; k < u.size(); ++k) w.alpha[n_low + k] = cut + (1.0 - cut) * lambda * u[k];

  if (std::fabs(expected_reward(w) - V_target) > 1e-3 || !satisfies_coupling(w))
    throw ParameterError("infeasible world: constructed vector violates the coupling assumption");
  return w;
}

double acceptance_m(double alpha, int m) {
  double b = 1.0 - alpha;
  double r = 1.0;
  for (int e = m; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return 1.0 - r;
}

double ratio_Zm_over_alpham(const SimWorld& w, int m) {
  if (m < 1) throw ParameterError("invalid parameter: m >= 1");
  const kernels::AcceptStats st = kernels::acceptance_stats(w.weights, w.alpha, m);
  if (!(st.min_value > 0.0)) throw DomainError("degenerate world: min alpha^(m) is 0");
  return st.weighted_sum / st.min_value;
}

double hm_ratio(double y, int m) {
  if (m < 1) throw ParameterError("invalid parameter: m >= 1");
  if (!(y >= 0.0 && y < 1.0)) throw DomainError("h_m needs y in [0, 1)");
  if (y == 0.0) return 1.0;
  // 1 + y^m (1 - y) / (1 - y^m), with 1 - y^m from expm1 for y near 1.
  const double ly = std::log(y);
  return 1.0 + std::exp(m * ly) * (1.0 - y) / -std::expm1(m * ly);
}

RoundRecord simulate_round(SimWorld& world, const TheoryParams& p, const DerivedConstants& d, int round,
                           std::uint64_t seed, int replication) {
  const int m = static_cast<int>(p.m);
  const std::size_t Q = world.size();
  if (Q == 0) throw ParameterError("invalid parameter: empty world");
  if (m < 1) throw ParameterError("invalid parameter: m >= 1");

  RoundRecord rec;
  rec.replication = replication;
  rec.round = round;
  rec.V_before = expected_reward(world);
  const kernels::AcceptStats st = kernels::acceptance_stats(world.weights, world.alpha, m);
  rec.Z_m = st.weighted_sum;
  rec.alpha_m_min = st.min_value;

  std::vector<double> am(Q);
  for (std::size_t q = 0; q < Q; ++q) am[q] = acceptance_m(world.alpha[q], m);
  const bool uniform = std::all_of(world.weights.begin(), world.weights.end(),
                                   [&](double x) { return x == world.weights.front(); });
  std::vector<double> cdf;
  if (!uniform) {
    cdf.resize(Q);
    std::partial_sum(world.weights.begin(), world.weights.end(), cdf.begin());
  }

  Substream rng(seed, kSampleStream, static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(round));
  std::vector<std::int64_t> hits(Q, 0);
  for (std::int64_t i = 0; i < p.n; ++i) {
    std::size_t q;
    if (uniform) {
      q = static_cast<std::size_t>(rng.below(Q));
    } else {
      const double u = rng.uniform() * cdf.back();
      q = std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
                                Q - 1);
    }
    if (rng.uniform() < am[q]) {
      ++hits[q];
      ++rec.n_accept;
    }
  }

  if (rec.n_accept == 0) {
    rec.collapsed = true;
    rec.V_realized = rec.V_before;
    rec.bound = -std::numeric_limits<double>::infinity();
    rec.bound_satisfied = true;
    return rec;
  }

  const double eps = d.c_delta / std::sqrt(static_cast<double>(rec.n_accept));
  // Error budget eps spread over the filtered marginal w alpha^(m) / Z,
  // with questions seen k times receiving weight (1 + k)^(-1/2).
  std::vector<double> share(Q);
  double norm = 0.0;
  for (std::size_t q = 0; q < Q; ++q) {
    share[q] = 1.0 / std::sqrt(1.0 + static_cast<double>(hits[q]));
    norm += world.weights[q] * am[q] / rec.Z_m * share[q];
  }
  for (std::size_t q = 0; q < Q; ++q) world.alpha[q] = std::max(kAlphaFloor, 1.0 - eps * share[q] / norm);

  rec.V_realized = expected_reward(world);
  rec.bound = p.tau * (1.0 - rec.Z_m / rec.alpha_m_min * eps);
  rec.bound_satisfied = rec.V_realized >= rec.bound;
  return rec;
}

std::vector<RoundRecord> run_selfimprove(SimWorld world, const TheoryParams& p, const DerivedConstants& d, int rounds,
                                         std::uint64_t seed, int replication) {
  if (rounds < 1) throw ParameterError("invalid parameter: rounds >= 1");
  p.validate();
  std::vector<RoundRecord> out;
  out.reserve(static_cast<std::size_t>(rounds));
  for (int t = 0; t < rounds; ++t) out.push_back(simulate_round(world, p, d, t, seed, replication));
  return out;
}

SimulationReport run_replications(const SimulationConfig& cfg, const TheoryParams& p, const DerivedConstants& d) {
  if (cfg.replications < 1) throw ParameterError("invalid parameter: replications >= 1");
  const SimWorld world = build_world(cfg.Q, cfg.V_target, p, cfg.seed);
  std::vector<std::vector<RoundRecord>> per(static_cast<std::size_t>(cfg.replications));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < cfg.replications; r = next++)
      per[static_cast<std::size_t>(r)] = run_selfimprove(world, p, d, cfg.rounds, cfg.seed, r);
  };
  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SimulationReport rep;
  double slack = 0.0, acc = 0.0;
  for (auto& v : per) {
    for (auto& rec : v) {
      acc += static_cast<double>(rec.n_accept);
      if (!rec.collapsed) {
        ++rep.scored;
        if (rec.bound_satisfied) ++rep.satisfied;
        slack += rec.V_realized - rec.bound;
      }
      rep.records.push_back(rec);
    }
  }
  if (rep.scored) rep.mean_slack = slack / static_cast<double>(rep.scored);
  if (!rep.records.empty()) rep.mean_n_accept = acc / static_cast<double>(rep.records.size());
  return rep;
}

void write_simulation_csv(std::ostream& os, const std::vector<RoundRecord>& records) {
  CsvWriter csv(os, {"replication", "round", "n_accept", "Z_m", "alpha_m_min", "V_realized", "bound",
                     "bound_satisfied"});
  for (const auto& r : records)
    csv.row(r.replication, r.round, static_cast<long long>(r.n_accept), r.Z_m, r.alpha_m_min, r.V_realized, r.bound,
            r.bound_satisfied);
}

}  // namespace e2h
