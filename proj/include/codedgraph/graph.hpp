#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"

namespace codedgraph {

using Vertex = std::uint32_t;  // 1-based

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double weight = 1.0;
};

/// Generation provenance carried alongside a graph. Not part of graph equality.
struct GraphMetadata {
  std::string model;                        // "er", "rb", "sbm", "pl", or empty
  std::map<std::string, double> params;     // p, q, n1, n2, gamma, rho, seed, ...
  std::uint64_t clamped_pairs = 0;          // PL pairs whose probability was clamped to 1

  /// Size of the first cluster for two-cluster models.
  std::optional<std::size_t> first_cluster() const {
    auto it = params.find("n1");
    if (it == params.end()) return std::nullopt;
    return static_cast<std::size_t>(it->second);
  }
};

/// Undirected graph on vertices 1..n with sorted, duplicate-free neighbor lists
/// and optional non-negative edge weights. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Builds from an edge list. Duplicate edges are merged when their weights
  /// agree; conflicting duplicates and out-of-range ids throw ParameterError.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges, bool weighted = false,
                          GraphMetadata metadata = {}) {
    Graph g;
    g.adjacency_.assign(n, {});
    g.metadata_ = std::move(metadata);
    std::vector<std::vector<std::pair<Vertex, double>>> tmp(n);
    for (const Edge& e : edges) {
      if (e.u < 1 || e.u > n || e.v < 1 || e.v > n)
        throw ParameterError("edge {" + std::to_string(e.u) + "," + std::to_string(e.v) + "} outside 1.." +
                             std::to_string(n));
      if (weighted && !(e.weight >= 0.0)) throw ParameterError("negative or NaN edge weight");
      tmp[e.u - 1].emplace_back(e.v, e.weight);
      if (e.u != e.v) tmp[e.v - 1].emplace_back(e.u, e.weight);
    }
    if (weighted) g.weights_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      auto& row = tmp[i];
      std::sort(row.begin(), row.end());
      auto& adj = g.adjacency_[i];
      adj.reserve(row.size());
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k > 0 && row[k].first == row[k - 1].first) {
          if (weighted && row[k].second != row[k - 1].second)
            throw ParameterError("conflicting weights for edge {" + std::to_string(i + 1) + "," +
                                 std::to_string(row[k].first) + "}");
          continue;
        }
        adj.push_back(row[k].first);
        if (weighted) g.weights_[i].push_back(row[k].second);
      }
      g.edge_endpoints_ += adj.size();
      if (std::binary_search(adj.begin(), adj.end(), static_cast<Vertex>(i + 1))) ++g.self_loops_;
    }
    return g;
  }

  /// Builds directly from sorted neighbor lists (generators use this; symmetry is the caller's job).
  static Graph from_adjacency(std::vector<std::vector<Vertex>> adjacency,
                              std::vector<std::vector<double>> weights, GraphMetadata metadata) {
    Graph g;
    g.adjacency_ = std::move(adjacency);
    g.weights_ = std::move(weights);
    g.metadata_ = std::move(metadata);
    for (std::size_t i = 0; i < g.adjacency_.size(); ++i) {
      g.edge_endpoints_ += g.adjacency_[i].size();
      if (std::binary_search(g.adjacency_[i].begin(), g.adjacency_[i].end(), static_cast<Vertex>(i + 1)))
        ++g.self_loops_;
    }
    return g;
  }

  std::size_t vertex_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return (edge_endpoints_ + self_loops_) / 2; }
  bool weighted() const { return !weights_.empty(); }
  const GraphMetadata& metadata() const { return metadata_; }

  std::span<const Vertex> neighbors(Vertex v) const { return adjacency_[v - 1]; }
  std::size_t degree(Vertex v) const { return adjacency_[v - 1].size(); }

  bool has_edge(Vertex u, Vertex v) const {
    const auto& adj = adjacency_[u - 1];
    return std::binary_search(adj.begin(), adj.end(), v);
  }

  /// Weight t(u, v); 1 for unweighted graphs. Precondition: the edge exists.
  double weight(Vertex u, Vertex v) const {
    if (!weighted()) return 1.0;
    const auto& adj = adjacency_[u - 1];
    auto it = std::lower_bound(adj.begin(), adj.end(), v);
    if (it == adj.end() || *it != v)
      throw UsageError("no edge {" + std::to_string(u) + "," + std::to_string(v) + "}");
    return weights_[u - 1][static_cast<std::size_t>(it - adj.begin())];
  }

  Graph with_metadata(GraphMetadata metadata) && {
    metadata_ = std::move(metadata);
    return std::move(*this);
  }

  /// Same graph with isolated vertices appended up to `n` vertices.
  Graph padded(std::size_t n) const {
    if (n < vertex_count()) throw UsageError("cannot pad a graph to fewer vertices");
    Graph g = *this;
    g.adjacency_.resize(n);
    if (weighted()) g.weights_.resize(n);
    return g;
  }

  /// Edges {u, v} with u <= v in ascending order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (Vertex u = 1; u <= vertex_count(); ++u) {
      const auto& adj = adjacency_[u - 1];
      for (std::size_t k = 0; k < adj.size(); ++k)
        if (adj[k] >= u) out.push_back({u, adj[k], weighted() ? weights_[u - 1][k] : 1.0});
    }
    return out;
  }

  /// Symmetry, range, ordering and weight-sign checks. Returns the first violation, if any.
  std::optional<std::string> check_invariants(bool allow_self_loops = true) const {
    const std::size_t n = vertex_count();
    for (Vertex i = 1; i <= n; ++i) {
      const auto& adj = adjacency_[i - 1];
      for (std::size_t k = 0; k < adj.size(); ++k) {
        const Vertex j = adj[k];
        if (j < 1 || j > n) return "vertex id out of range in N(" + std::to_string(i) + ")";
        if (k > 0 && adj[k - 1] >= j) return "N(" + std::to_string(i) + ") not strictly sorted";
        if (j == i && !allow_self_loops) return "self-loop at " + std::to_string(i);
        if (!has_edge(j, i)) return "asymmetric edge " + std::to_string(i) + "->" + std::to_string(j);
        if (weighted()) {
          if (!(weights_[i - 1][k] >= 0.0)) return "negative weight";
          if (weight(j, i) != weights_[i - 1][k]) return "asymmetric weight";
        }
      }
    }
    return std::nullopt;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.adjacency_ == b.adjacency_ && a.weights_ == b.weights_;
  }

 private:
  std::vector<std::vector<Vertex>> adjacency_;
  std::vector<std::vector<double>> weights_;
  GraphMetadata metadata_;
  std::size_t edge_endpoints_ = 0;
  std::size_t self_loops_ = 0;
};

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

constexpr std::string_view kMetaPrefix = "# codedgraph";

}  // namespace detail

/// Writes the edge-list format: optional "# codedgraph key=value ..." metadata
/// comment, an "n=<count>" line, then one "u v" or "u v w" line per edge (u <= v).
inline void save_edgelist(const Graph& g, std::ostream& out) {
  const auto& meta = g.metadata();
  if (!meta.model.empty() || !meta.params.empty()) {
    out << detail::kMetaPrefix;
    if (!meta.model.empty()) out << " model=" << meta.model;
    for (const auto& [k, v] : meta.params) out << ' ' << k << '=' << detail::format_double(v);
    if (meta.clamped_pairs > 0) out << " clamped=" << meta.clamped_pairs;
    out << '\n';
  }
  out << "n=" << g.vertex_count() << '\n';
  for (const Edge& e : g.edges()) {
    out << e.u << ' ' << e.v;
    if (g.weighted()) out << ' ' << detail::format_double(e.weight);
    out << '\n';
  }
}

inline void save_edgelist(const Graph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_edgelist(g, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Parses the edge-list format. Without an "n=" header the vertex count is the
/// largest id seen. Weighted and unweighted edge lines cannot be mixed.
inline Graph load_edgelist(std::istream& in) {
  std::optional<std::size_t> declared_n;
  std::vector<Edge> edges;
  std::optional<bool> weighted;
  GraphMetadata meta;
  Vertex max_id = 0;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::size_t> edge_lines;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (text.starts_with(detail::kMetaPrefix)) {
        for (auto tok : detail::split_ws(text.substr(detail::kMetaPrefix.size()))) {
          const auto eq = tok.find('=');
          if (eq == std::string_view::npos) continue;
          const std::string key(tok.substr(0, eq));
          const auto val = tok.substr(eq + 1);
          if (key == "model") {
            meta.model = std::string(val);
          } else if (key == "clamped") {
            meta.clamped_pairs = detail::parse_number<std::uint64_t>(val).value_or(0);
          } else if (auto d = detail::parse_number<double>(val)) {
            meta.params[key] = *d;
          }
        }
      }
      continue;
    }
    if (text.starts_with("n=")) {
      if (declared_n || !edges.empty()) throw ParseError(lineno, "\"n=\" header must come first and only once");
      auto n = detail::parse_number<std::size_t>(text.substr(2));
      if (!n) throw ParseError(lineno, "malformed vertex count");
      declared_n = *n;
      continue;
    }
    const auto tokens = detail::split_ws(text);
    if (tokens.size() != 2 && tokens.size() != 3) throw ParseError(lineno, "expected \"u v [w]\"");
    auto u = detail::parse_number<Vertex>(tokens[0]);
    auto v = detail::parse_number<Vertex>(tokens[1]);
    if (!u || !v) throw ParseError(lineno, "malformed vertex id");
    if (*u < 1 || *v < 1) throw ParseError(lineno, "vertex ids are 1-based");
    if (declared_n && (*u > *declared_n || *v > *declared_n))
      throw ParseError(lineno, "vertex id exceeds n=" + std::to_string(*declared_n));
    const bool has_weight = tokens.size() == 3;
    if (weighted && *weighted != has_weight) throw ParseError(lineno, "mixed weighted and unweighted edges");
    weighted = has_weight;
    double w = 1.0;
    if (has_weight) {
      auto parsed = detail::parse_number<double>(tokens[2]);
      if (!parsed || !(*parsed >= 0.0) || !std::isfinite(*parsed))
        throw ParseError(lineno, "weight must be a finite non-negative number");
      w = *parsed;
    }
    edges.push_back({*u, *v, w});
    edge_lines.push_back(lineno);
    max_id = std::max({max_id, *u, *v});
  }
  const std::size_t n = declared_n.value_or(max_id);
  // Conflicting duplicates are reported against the later line.
  if (weighted.value_or(false)) {
    std::map<std::pair<Vertex, Vertex>, double> seen;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto key = std::minmax(edges[e].u, edges[e].v);
      auto [it, inserted] = seen.emplace(key, edges[e].weight);
      if (!inserted && it->second != edges[e].weight)
        throw ParseError(edge_lines[e], "duplicate edge with conflicting weight");
    }
  }
  return Graph::from_edges(n, edges, weighted.value_or(false), std::move(meta));
}

inline Graph load_edgelist(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_edgelist(in);
}

}  // namespace codedgraph
