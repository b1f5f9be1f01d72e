#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include <json.hpp>

#include "error.hpp"
#include "graph.hpp"
#include "worker_set.hpp"

namespace codedgraph {

using Rational = boost::rational<std::int64_t>;

/// Map sets M_k and disjoint Reduce sets R_k for K workers over vertices
/// 1..n. Vertices above `real_vertices()` are isolated padding.
class Allocation {
 public:
  /// Validates and indexes explicit sets. Every vertex must be mapped at least
  /// once and reduced exactly once.
  static Allocation from_sets(std::size_t workers, std::size_t n, std::vector<std::vector<Vertex>> map_sets,
                              std::vector<std::vector<Vertex>> reduce_sets, std::size_t real_vertices = 0) {
    if (workers < 1 || workers > kMaxWorkers)
      throw ParameterError("worker count must lie in 1.." + std::to_string(kMaxWorkers));
    if (map_sets.size() != workers || reduce_sets.size() != workers)
      throw ParameterError("expected one map set and one reduce set per worker");
    Allocation a;
    a.workers_ = workers;
    a.n_ = n;
    a.real_ = real_vertices ? real_vertices : n;
    if (a.real_ > n) throw ParameterError("real vertex count exceeds allocation size");
    a.mask_.assign(n, WorkerSet{});
    a.owner_.assign(n, 0);
    for (WorkerId k = 1; k <= workers; ++k) {
      auto& m = map_sets[k - 1];
      std::sort(m.begin(), m.end());
      if (std::adjacent_find(m.begin(), m.end()) != m.end())
        throw ParameterError("duplicate vertex in M_" + std::to_string(k));
      for (Vertex v : m) {
        if (v < 1 || v > n) throw ParameterError("vertex " + std::to_string(v) + " outside 1.." + std::to_string(n));
        a.mask_[v - 1].insert(k);
      }
      auto& red = reduce_sets[k - 1];
      std::sort(red.begin(), red.end());
      for (Vertex v : red) {
        if (v < 1 || v > n) throw ParameterError("vertex " + std::to_string(v) + " outside 1.." + std::to_string(n));
        if (a.owner_[v - 1] != 0) throw ParameterError("vertex " + std::to_string(v) + " reduced twice");
        a.owner_[v - 1] = k;
      }
    }
    for (Vertex v = 1; v <= n; ++v) {
      if (a.mask_[v - 1].empty()) throw ParameterError("vertex " + std::to_string(v) + " is not mapped");
      if (a.owner_[v - 1] == 0) throw ParameterError("vertex " + std::to_string(v) + " has no reducer");
      a.batches_[a.mask_[v - 1].bits()].push_back(v);
    }
    a.map_sets_ = std::move(map_sets);
    a.reduce_sets_ = std::move(reduce_sets);
    return a;
  }

  std::size_t workers() const { return workers_; }
  std::size_t vertex_count() const { return n_; }
  std::size_t real_vertices() const { return real_; }

  std::span<const Vertex> map_set(WorkerId k) const { return map_sets_.at(k - 1); }
  std::span<const Vertex> reduce_set(WorkerId k) const { return reduce_sets_.at(k - 1); }

  /// Workers that map v (its batch subset T(v)).
  WorkerSet mask(Vertex v) const { return mask_[v - 1]; }
  WorkerId owner(Vertex v) const { return owner_[v - 1]; }
  bool maps(WorkerId k, Vertex v) const { return mask_[v - 1].contains(k); }

  /// Vertices whose mapping set is exactly `s`, ascending.
  std::span<const Vertex> batch(WorkerSet s) const {
    auto it = batches_.find(s.bits());
    if (it == batches_.end()) return {};
    return it->second;
  }

  const std::map<std::uint32_t, std::vector<Vertex>>& batches() const { return batches_; }

  /// Computation load r = sum_k |M_k| / n as an exact fraction.
  Rational computation_load() const {
    std::int64_t total = 0;
    for (const auto& m : map_sets_) total += static_cast<std::int64_t>(m.size());
    return Rational(total, static_cast<std::int64_t>(n_));
  }

  /// r when every vertex is mapped by exactly r workers.
  std::optional<std::size_t> batch_load() const {
    if (n_ == 0) return std::nullopt;
    const std::size_t r = mask_[0].size();
    for (const auto& m : mask_)
      if (m.size() != r) return std::nullopt;
    return r;
  }

  friend bool operator==(const Allocation& a, const Allocation& b) {
    return a.workers_ == b.workers_ && a.n_ == b.n_ && a.real_ == b.real_ && a.map_sets_ == b.map_sets_ &&
           a.reduce_sets_ == b.reduce_sets_;
  }

 private:
  std::size_t workers_ = 0;
  std::size_t n_ = 0;
  std::size_t real_ = 0;
  std::vector<std::vector<Vertex>> map_sets_;
  std::vector<std::vector<Vertex>> reduce_sets_;
  std::vector<WorkerSet> mask_;
  std::vector<WorkerId> owner_;
  std::map<std::uint32_t, std::vector<Vertex>> batches_;
};

namespace detail {

inline void check_load(std::size_t workers, std::size_t r) {
  if (workers < 1 || workers > kMaxWorkers)
    throw ParameterError("worker count must lie in 1.." + std::to_string(kMaxWorkers));
  if (r < 1 || r > workers) throw ParameterError("computation load r must satisfy 1 <= r <= K");
}

/// Splits `count` items into `parts` contiguous chunk sizes differing by at most one; larger chunks first.
inline std::vector<std::size_t> balanced_sizes(std::size_t count, std::size_t parts) {
  std::vector<std::size_t> sizes(parts, count / parts);
  for (std::size_t i = 0; i < count % parts; ++i) ++sizes[i];
  return sizes;
}

/// Assigns `vertices` in order to `subsets` as balanced contiguous batches, appending to map_sets.
inline void assign_batches(std::span<const Vertex> vertices, const std::vector<WorkerSet>& subsets,
                           std::vector<std::vector<Vertex>>& map_sets) {
  const auto sizes = balanced_sizes(vertices.size(), subsets.size());
  std::size_t pos = 0;
  for (std::size_t b = 0; b < subsets.size(); ++b) {
    for (std::size_t c = 0; c < sizes[b]; ++c, ++pos)
      for (WorkerId k : subsets[b].members()) map_sets[k - 1].push_back(vertices[pos]);
  }
}

}  // namespace detail

/// Batch allocation over an arbitrary vertex order: the order is cut into
/// C(K, r) contiguous batches (subsets in lexicographic order) and K
/// contiguous reduce ranges, sizes balanced to within one.
inline Allocation batch_allocate(std::span<const Vertex> order, std::size_t workers, std::size_t r,
                                 std::size_t real_vertices = 0) {
  detail::check_load(workers, r);
  std::vector<std::vector<Vertex>> map_sets(workers), reduce_sets(workers);
  detail::assign_batches(order, subsets_of_size(static_cast<WorkerId>(workers), r), map_sets);
  const auto sizes = detail::balanced_sizes(order.size(), workers);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < workers; ++k)
    for (std::size_t c = 0; c < sizes[k]; ++c) reduce_sets[k].push_back(order[pos++]);
  return Allocation::from_sets(workers, order.size(), std::move(map_sets), std::move(reduce_sets), real_vertices);
}

/// Padded vertex count used by er_allocate: next multiple of lcm(K, C(K, r)).
inline std::size_t padded_vertex_count(std::size_t n, std::size_t workers, std::size_t r) {
  detail::check_load(workers, r);
  const std::size_t unit = std::lcm(workers, static_cast<std::size_t>(binomial(workers, r)));
  return (n + unit - 1) / unit * unit;
}

/// The symmetric batch scheme: g = n / C(K, r) vertices per batch, contiguous
/// blocks, subsets in lexicographic order; R_k = ((k-1)n/K, kn/K]. Pads with
/// isolated virtual vertices when lcm(K, C(K, r)) does not divide n.
inline Allocation er_allocate(std::size_t n, std::size_t workers, std::size_t r) {
  if (n < 1) throw ParameterError("n must be at least 1");
  const std::size_t total = padded_vertex_count(n, workers, r);
  std::vector<Vertex> order(total);
  std::iota(order.begin(), order.end(), Vertex{1});
  return batch_allocate(order, workers, r, n);
}

/// Which servers hold which cluster in the two-cluster scheme, and which
/// phase each Reducer belongs to.
struct PhasePlan {
  Vertex big_first = 0, big_last = 0;      // larger cluster (first one on ties)
  Vertex small_first = 0, small_last = 0;
  WorkerSet big_servers;                   // K1 servers: map the larger cluster
  WorkerSet small_servers;                 // K2 servers: map the smaller cluster
  std::vector<std::uint8_t> reducer_phase; // 1, 2 or 3, indexed by vertex - 1

  bool in_big(Vertex v) const { return v >= big_first && v <= big_last; }
  int phase(Vertex v) const { return reducer_phase.at(v - 1); }
};

struct RbAllocation {
  Allocation allocation;
  PhasePlan plan;
};

/// Two-cluster allocation for clusters {1..n1} and {n1+1..n1+n2}.
///
/// K1 = round(n_big K / n) servers map the larger cluster and reduce the
/// smaller one (phase I); the other K2 servers map the smaller cluster and
/// reduce n_small of the larger cluster's vertices (phase II); the remaining
/// n_big - n_small larger-cluster Reducers fill the K1 servers (phase III).
inline RbAllocation rb_allocate(std::size_t n1, std::size_t n2, std::size_t workers, std::size_t r) {
  if (n1 < 1 || n2 < 1) throw ParameterError("cluster sizes must be at least 1");
  detail::check_load(workers, r);
  if (workers < 2) throw ParameterError("two-cluster allocation needs at least two workers");
  const std::size_t n = n1 + n2;
  const bool first_big = n1 >= n2;
  const std::size_t nb = first_big ? n1 : n2, ns = first_big ? n2 : n1;
  std::size_t k1 = static_cast<std::size_t>(std::llround(double(nb) * double(workers) / double(n)));
  k1 = std::clamp<std::size_t>(k1, 1, workers - 1);
  const std::size_t k2 = workers - k1;
  if (r > std::min(k1, k2))
    throw ParameterError("two-cluster allocation splits K=" + std::to_string(workers) + " into K1=" +
                         std::to_string(k1) + " and K2=" + std::to_string(k2) +
                         "; each side maps its cluster with load r, so r <= min(K1, K2) is required");

  PhasePlan plan;
  plan.big_first = first_big ? 1 : static_cast<Vertex>(n1 + 1);
  plan.big_last = static_cast<Vertex>(plan.big_first + nb - 1);
  plan.small_first = first_big ? static_cast<Vertex>(n1 + 1) : 1;
  plan.small_last = static_cast<Vertex>(plan.small_first + ns - 1);
  plan.big_servers = WorkerSet::range(1, static_cast<WorkerId>(k1));
  plan.small_servers = WorkerSet::range(static_cast<WorkerId>(k1 + 1), static_cast<WorkerId>(workers));
  plan.reducer_phase.assign(n, 0);

  std::vector<Vertex> big(nb), small(ns);
  std::iota(big.begin(), big.end(), plan.big_first);
  std::iota(small.begin(), small.end(), plan.small_first);

  std::vector<std::vector<Vertex>> map_sets(workers), reduce_sets(workers);
  detail::assign_batches(big, subsets_of_size(plan.big_servers.members(), r), map_sets);
  detail::assign_batches(small, subsets_of_size(plan.small_servers.members(), r), map_sets);

  // Phase I: smaller-cluster Reducers across the K1 servers.
  const auto small_sizes = detail::balanced_sizes(ns, k1);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < k1; ++k)
    for (std::size_t c = 0; c < small_sizes[k]; ++c) {
      reduce_sets[k].push_back(small[pos]);
      plan.reducer_phase[small[pos] - 1] = 1;
      ++pos;
    }
  // Phase II: n_small larger-cluster Reducers across the K2 servers.
  const auto phase2_sizes = detail::balanced_sizes(ns, k2);
  pos = 0;
  for (std::size_t k = 0; k < k2; ++k)
    for (std::size_t c = 0; c < phase2_sizes[k]; ++c) {
      reduce_sets[k1 + k].push_back(big[pos]);
      plan.reducer_phase[big[pos] - 1] = 2;
      ++pos;
    }
  // Phase III: the rest of the larger cluster tops the K1 servers up to a balanced share of n_big.
  const auto target = detail::balanced_sizes(nb, k1);
  for (std::size_t k = 0; k < k1; ++k)
    for (std::size_t c = small_sizes[k]; c < target[k] && pos < nb; ++c) {
      reduce_sets[k].push_back(big[pos]);
      plan.reducer_phase[big[pos] - 1] = 3;
      ++pos;
    }
  return {Allocation::from_sets(workers, n, std::move(map_sets), std::move(reduce_sets)), std::move(plan)};
}

/// Vertex order that interleaves clusters {1..n1} and {n1+1..n1+n2} in
/// proportion, so every contiguous block holds about n1/n of the first cluster.
inline std::vector<Vertex> interleaved_order(std::size_t n1, std::size_t n2) {
  std::vector<std::pair<double, Vertex>> keyed;
  keyed.reserve(n1 + n2);
  for (std::size_t a = 0; a < n1; ++a) keyed.emplace_back((double(a) + 0.5) / double(n1), static_cast<Vertex>(a + 1));
  for (std::size_t b = 0; b < n2; ++b)
    keyed.emplace_back((double(b) + 0.5) / double(n2), static_cast<Vertex>(n1 + b + 1));
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Vertex> order;
  order.reserve(keyed.size());
  for (const auto& kv : keyed) order.push_back(kv.second);
  return order;
}

/// Batch allocation for two-cluster graphs with both clusters spread evenly
/// over every batch and every reduce set, so each coded table row sees the
/// same mix of intra- and cross-cluster pairs.
inline Allocation sbm_allocate(std::size_t n1, std::size_t n2, std::size_t workers, std::size_t r) {
  if (n1 < 1 || n2 < 1) throw ParameterError("cluster sizes must be at least 1");
  const auto order = interleaved_order(n1, n2);
  return batch_allocate(order, workers, r);
}

/// a[j] = number of vertices mapped at exactly j workers, j = 1..K (a[0] unused).
struct MultiplicityProfile {
  std::vector<std::size_t> counts;

  std::size_t workers() const { return counts.empty() ? 0 : counts.size() - 1; }
  std::size_t operator[](std::size_t j) const { return counts.at(j); }
  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
  std::size_t weighted_total() const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < counts.size(); ++j) s += j * counts[j];
    return s;
  }
};

inline MultiplicityProfile multiplicity_profile(const Allocation& a) {
  MultiplicityProfile p{std::vector<std::size_t>(a.workers() + 1, 0)};
  for (Vertex v = 1; v <= a.vertex_count(); ++v) ++p.counts[a.mask(v).size()];
  return p;
}

inline Rational computation_load(const Allocation& a) { return a.computation_load(); }

inline nlohmann::json to_json(const Allocation& a) {
  nlohmann::json j;
  j["K"] = a.workers();
  j["n"] = a.vertex_count();
  j["n_real"] = a.real_vertices();
  auto& m = j["map_sets"] = nlohmann::json::array();
  auto& red = j["reduce_sets"] = nlohmann::json::array();
  for (WorkerId k = 1; k <= a.workers(); ++k) {
    m.push_back(std::vector<Vertex>(a.map_set(k).begin(), a.map_set(k).end()));
    red.push_back(std::vector<Vertex>(a.reduce_set(k).begin(), a.reduce_set(k).end()));
  }
  return j;
}

inline Allocation allocation_from_json(const nlohmann::json& j) {
  try {
    const std::size_t n = j.at("n").get<std::size_t>();
    return Allocation::from_sets(j.at("K").get<std::size_t>(), n,
                                 j.at("map_sets").get<std::vector<std::vector<Vertex>>>(),
                                 j.at("reduce_sets").get<std::vector<std::vector<Vertex>>>(),
                                 j.value("n_real", n));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed allocation JSON: ") + e.what());
  }
}

}  // namespace codedgraph
