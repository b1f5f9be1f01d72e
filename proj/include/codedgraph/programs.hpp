#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace codedgraph {

/// One scalar file w_i per vertex, indexed by vertex id - 1.
using VertexState = std::vector<double>;

/// Intermediate value v_{i,j} together with its mapper id. Reducers receive
/// these sorted by ascending mapper.
struct MappedValue {
  Vertex mapper = 0;
  double value = 0.0;
};

/// Map g_{i,j} and Reduce h_i over a graph.
///
/// `reduce` receives exactly {v_{i,j} : j in N(i)} in ascending mapper order
/// together with the reducer's previous state. Implementations must be
/// insensitive to the order of that collection up to the fixed summation order.
template <typename P>
concept VertexProgram = requires(const P& p, const Graph& g, Vertex v, double x, std::span<const MappedValue> vals) {
  { p.name() } -> std::convertible_to<std::string>;
  { p.initial_state(g) } -> std::same_as<VertexState>;
  { p.map(g, v, x, v) } -> std::same_as<double>;
  { p.reduce(g, v, vals, x) } -> std::same_as<double>;
};

/// PageRank with uniform transition P(j -> i) = 1 / deg(j).
/// Dangling vertices emit nothing, so their mass is not redistributed.
class PageRank {
 public:
  explicit PageRank(double damping = 0.15, std::size_t vertex_count = 0)
      : damping_(damping), vertex_count_(vertex_count) {
    if (!(damping >= 0.0 && damping <= 1.0)) throw ParameterError("damping must lie in [0, 1]");
  }

  std::string name() const { return "pagerank"; }
  double damping() const { return damping_; }

  /// |V| used by the d/|V| term; defaults to the graph's vertex count.
  std::size_t vertex_count(const Graph& g) const { return vertex_count_ ? vertex_count_ : g.vertex_count(); }

  VertexState initial_state(const Graph& g) const {
    const std::size_t nv = vertex_count(g);
    VertexState s(g.vertex_count(), 0.0);
    std::fill(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(std::min(nv, s.size())), 1.0 / double(nv));
    return s;
  }

  static double map_value(double rank, std::size_t degree) { return rank / static_cast<double>(degree); }

  double map(const Graph& g, Vertex mapper, double rank, Vertex /*reducer*/) const {
    return map_value(rank, g.degree(mapper));
  }

  /// (1 - d) * sum + d / |V|. The sum always runs in ascending mapper order,
  /// so any permutation of `values` gives the same bits.
  static double reduce_values(std::span<const MappedValue> values, double damping, std::size_t nv) {
    const auto by_mapper = [](const MappedValue& a, const MappedValue& b) { return a.mapper < b.mapper; };
    double sum = 0.0;
    if (std::is_sorted(values.begin(), values.end(), by_mapper)) {
      for (const auto& v : values) sum += v.value;
    } else {
      std::vector<MappedValue> sorted(values.begin(), values.end());
      std::sort(sorted.begin(), sorted.end(), by_mapper);
      for (const auto& v : sorted) sum += v.value;
    }
    return (1.0 - damping) * sum + damping / static_cast<double>(nv);
  }

  double reduce(const Graph& g, Vertex /*reducer*/, std::span<const MappedValue> values, double /*prev*/) const {
    return reduce_values(values, damping_, vertex_count(g));
  }

 private:
  double damping_;
  std::size_t vertex_count_;
};

/// Single-source shortest path: v_{i,j} = D(j) + t(j, i); D(i) = min over
/// values and the reducer's own previous distance.
class ShortestPath {
 public:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  explicit ShortestPath(Vertex source = 1) : source_(source) {
    if (source < 1) throw ParameterError("source vertex ids are 1-based");
  }

  std::string name() const { return "sssp"; }
  Vertex source() const { return source_; }

  VertexState initial_state(const Graph& g) const {
    if (source_ > g.vertex_count()) throw ParameterError("source vertex outside the graph");
    VertexState s(g.vertex_count(), kInfinity);
    s[source_ - 1] = 0.0;
    return s;
  }

  static double map_value(double dist, double weight) { return dist + weight; }  // inf absorbs

  double map(const Graph& g, Vertex mapper, double dist, Vertex reducer) const {
    return map_value(dist, g.weight(mapper, reducer));
  }

  static double reduce_values(std::span<const MappedValue> values, double prev) {
    double best = prev;
    for (const auto& v : values) best = std::min(best, v.value);
    return best;
  }

  double reduce(const Graph& /*g*/, Vertex /*reducer*/, std::span<const MappedValue> values, double prev) const {
    return reduce_values(values, prev);
  }

 private:
  Vertex source_;
};

static_assert(VertexProgram<PageRank>);
static_assert(VertexProgram<ShortestPath>);

/// One Map+Reduce round on a single machine over vertices 1..active (all when 0).
template <VertexProgram P>
VertexState reference_step(const Graph& g, const P& program, const VertexState& state, std::size_t active = 0) {
  if (state.size() != g.vertex_count()) throw UsageError("state size does not match the graph");
  const std::size_t n = active ? active : g.vertex_count();
  VertexState next = state;
  std::vector<MappedValue> values;
  for (Vertex i = 1; i <= n; ++i) {
    values.clear();
    for (Vertex j : g.neighbors(i)) values.push_back({j, program.map(g, j, state[j - 1], i)});
    next[i - 1] = program.reduce(g, i, values, state[i - 1]);
  }
  return next;
}

/// Applies `iterations` undistributed rounds; ground truth for the engine.
template <VertexProgram P>
VertexState reference_execute(const Graph& g, const P& program, VertexState state, std::size_t iterations) {
  for (std::size_t it = 0; it < iterations; ++it) state = reference_step(g, program, state);
  return state;
}

}  // namespace codedgraph
