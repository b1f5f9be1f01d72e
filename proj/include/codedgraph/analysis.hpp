#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "allocation.hpp"
#include "error.hpp"
#include "generators.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "shuffle.hpp"

namespace codedgraph {

/// Closed-form loads for one parameter point. For the power-law model the
/// values are n * L rather than L.
struct BoundSet {
  double uncoded = 0.0;
  double coded_upper = 0.0;
  std::optional<double> lower;
};

namespace detail {

inline void check_kr(std::size_t K, std::size_t r) {
  if (K < 1) throw ParameterError("K must be at least 1");
  if (r < 1 || r > K) throw ParameterError("computation load r must satisfy 1 <= r <= K");
}

inline double tradeoff(std::size_t K, std::size_t r) { return (1.0 - double(r) / double(K)) / double(r); }

}  // namespace detail

/// Erdos-Renyi: uncoded p(1 - r/K); coded and converse (1/r) p (1 - r/K).
inline BoundSet er_bounds(double p, std::size_t K, std::size_t r) {
  detail::check_probability(p, "p");
  detail::check_kr(K, r);
  const double coded = p * detail::tradeoff(K, r);
  return {p * (1.0 - double(r) / double(K)), coded, coded};
}

/// Converse for a given Map multiplicity profile: p * sum_j (a_j / n) (K - j) / (K j).
inline double allocation_lower_bound(const MultiplicityProfile& profile, double p, std::size_t K, std::size_t n) {
  detail::check_probability(p, "p");
  if (profile.workers() != K) throw ParameterError("profile has " + std::to_string(profile.workers()) + " entries, expected K");
  if (profile.counts[0] != 0) throw ParameterError("profile counts unmapped vertices");
  if (profile.total() != n)
    throw ParameterError("profile sums to " + std::to_string(profile.total()) + ", expected n = " + std::to_string(n));
  double s = 0.0;
  for (std::size_t j = 1; j <= K; ++j)
    s += double(profile.counts[j]) / double(n) * double(K - j) / (double(K) * double(j));
  return p * s;
}

/// Random bipartite, balanced clusters: uncoded (q/2)(1 - 2r/K), coded
/// (q/(2r))(1 - 2r/K), converse (q/(8r))(1 - 2r/K). Needs 2r <= K.
inline BoundSet rb_bounds(double q, std::size_t K, std::size_t r) {
  detail::check_probability(q, "q");
  detail::check_kr(K, r);
  if (2 * r > K) throw ParameterError("two-cluster bounds need 2r <= K");
  const double f = 1.0 - 2.0 * double(r) / double(K);
  return {q / 2.0 * f, q / (2.0 * double(r)) * f, q / (8.0 * double(r)) * f};
}

/// Stochastic block model: coded (1/r)(1 - r/K)(p n1^2 + p n2^2 + 2 q n1 n2)/n^2,
/// uncoded r times that, converse (q/r)(1 - r/K).
inline BoundSet sbm_bounds(std::size_t n1, std::size_t n2, double p, double q, std::size_t K, std::size_t r) {
  if (n1 < 1 || n2 < 1) throw ParameterError("cluster sizes must be at least 1");
  detail::check_probability(p, "p");
  detail::check_probability(q, "q");
  if (q > p) throw ParameterError("SBM requires q <= p");
  detail::check_kr(K, r);
  const double a = double(n1), b = double(n2), n = a + b;
  const double density = (p * a * a + p * b * b + 2.0 * q * a * b) / (n * n);
  const double t = detail::tradeoff(K, r);
  return {density * t * double(r), density * t, q * t};
}

/// Power law, as n * L: coded (1/r)(1 - r/K)(gamma - 1)/(gamma - 2); uncoded r times that.
inline BoundSet pl_bound(double gamma, std::size_t K, std::size_t r) {
  if (!(gamma > 2.0)) throw ParameterError("power-law exponent gamma must exceed 2");
  detail::check_kr(K, r);
  const double coded = detail::tradeoff(K, r) * (gamma - 1.0) / (gamma - 2.0);
  return {coded * double(r), coded, std::nullopt};
}

/// g~ = n^2 / (K C(K, r)): the largest possible Z-set.
inline double g_tilde(std::size_t n, std::size_t K, std::size_t r) {
  return double(n) * double(n) / (double(K) * double(binomial(K, r)));
}

/// Upper edge of the finite-n window for E[Q] / (p g~): 1 + 3 sqrt(log r / (g~ p)).
inline double q_ratio_window(double gt, double p, std::size_t r) {
  return 1.0 + 3.0 * std::sqrt(std::log(double(r)) / (gt * p));
}

struct QEstimate {
  double mean_q = 0.0;
  double stderr_q = 0.0;
  double g_tilde = 0.0;
  double ratio = 0.0;         // mean_q / (p g~)
  double ratio_stderr = 0.0;
  std::size_t trials = 0;
};

/// Samples ER(n, p) graphs under er_allocate(n, K, r) and measures
/// Q = max_{k in S\{1}} |Z^k| for group S = {1..r+1}, sender 1.
inline QEstimate expected_q_monte_carlo(std::size_t n, double p, std::size_t K, std::size_t r, std::size_t trials,
                                        std::uint64_t seed, unsigned threads = 1) {
  if (trials < 1) throw ParameterError("trials must be at least 1");
  detail::check_kr(K, r);
  if (r == K) throw ParameterError("r = K leaves no multicast group");
  const Allocation a = er_allocate(n, K, r);
  const WorkerSet group = WorkerSet::range(1, static_cast<WorkerId>(r + 1));
  std::vector<double> q(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    const std::uint64_t graph_seed = Stream(seed, StreamDomain::kTrials, t).next();
    const Graph g = gen_er(n, p, graph_seed);
    std::size_t best = 0;
    for (WorkerId k = 2; k <= r + 1; ++k) best = std::max(best, build_z_set(a, g, group, k).size());
    q[t] = double(best);
  });
  QEstimate e;
  e.trials = trials;
  for (double x : q) e.mean_q += x;
  e.mean_q /= double(trials);
  if (trials > 1) {
    double ss = 0.0;
    for (double x : q) ss += (x - e.mean_q) * (x - e.mean_q);
    e.stderr_q = std::sqrt(ss / double(trials - 1) / double(trials));
  }
  e.g_tilde = g_tilde(a.vertex_count(), K, r);
  e.ratio = e.mean_q / (p * e.g_tilde);
  e.ratio_stderr = e.stderr_q / (p * e.g_tilde);
  return e;
}

/// Load that balances Map time against Shuffle time: sqrt(t_shuffle / t_map).
inline double r_star(double t_map, double t_shuffle) {
  if (!(t_map > 0.0)) throw ParameterError("t_map must be positive");
  if (!(t_shuffle >= 0.0)) throw ParameterError("t_shuffle must be non-negative");
  return std::sqrt(t_shuffle / t_map);
}

}  // namespace codedgraph
