#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace codedgraph {

enum class WeightMode { kUnit, kUniform };

struct ErParams {
  std::size_t n = 0;
  double p = 0.0;
};
struct RbParams {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double q = 0.0;
};
struct SbmParams {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double p = 0.0;
  double q = 0.0;
};
struct PlParams {
  std::size_t n = 0;
  double gamma = 0.0;
  std::optional<double> rho;  // nullopt: rho = 1 / sum of drawn degrees
};

using ModelParams = std::variant<ErParams, RbParams, SbmParams, PlParams>;

struct GenerateOptions {
  WeightMode weights = WeightMode::kUnit;
  unsigned threads = 1;
};

namespace detail {

inline void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(std::string(name) + " must lie in [0, 1]");
}

/// Samples every unordered pair {i, j}, i < j, with probability prob(i, j).
/// Row i draws from its own stream, so results do not depend on thread count.
template <typename Prob>
Graph sample_pairs(std::size_t n, std::uint64_t seed, const GenerateOptions& opts, GraphMetadata meta,
                   Prob&& prob) {
  std::vector<std::vector<Vertex>> upper(n);
  std::vector<std::vector<double>> upper_w(opts.weights == WeightMode::kUniform ? n : 0);
  parallel_for(n, opts.threads, [&](std::size_t row) {
    const Vertex i = static_cast<Vertex>(row + 1);
    Stream edges(seed, StreamDomain::kEdges, i);
    std::optional<Stream> weights;
    if (opts.weights == WeightMode::kUniform) weights.emplace(seed, StreamDomain::kWeights, i);
    for (Vertex j = i + 1; j <= n; ++j) {
      const double pr = prob(i, j);
      if (pr <= 0.0) continue;
      if (edges.bernoulli(pr)) {
        upper[row].push_back(j);
        if (weights) upper_w[row].push_back(1.0 - weights->uniform());  // (0, 1]
      }
    }
  });
  std::vector<std::vector<Vertex>> adj(n);
  std::vector<std::vector<double>> w(upper_w.empty() ? 0 : n);
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t k = 0; k < upper[row].size(); ++k) {
      const Vertex j = upper[row][k];
      adj[j - 1].push_back(static_cast<Vertex>(row + 1));
      if (!w.empty()) w[j - 1].push_back(upper_w[row][k]);
    }
  }
  // Lower neighbors were appended in ascending order; upper ones are ascending and larger.
  for (std::size_t row = 0; row < n; ++row) {
    adj[row].insert(adj[row].end(), upper[row].begin(), upper[row].end());
    if (!w.empty()) w[row].insert(w[row].end(), upper_w[row].begin(), upper_w[row].end());
  }
  return Graph::from_adjacency(std::move(adj), std::move(w), std::move(meta));
}

}  // namespace detail

/// Erdos-Renyi ER(n, p). p = 0 yields the empty graph.
inline Graph gen_er(std::size_t n, double p, std::uint64_t seed, const GenerateOptions& opts = {}) {
  if (n < 1) throw ParameterError("n must be at least 1");
  detail::check_probability(p, "p");
  GraphMetadata meta{"er", {{"n", double(n)}, {"p", p}, {"seed", double(seed)}}, 0};
  return detail::sample_pairs(n, seed, opts, std::move(meta), [p](Vertex, Vertex) { return p; });
}

/// Random bipartite RB(n1, n2, q): clusters {1..n1} and {n1+1..n1+n2}, cross edges only.
inline Graph gen_rb(std::size_t n1, std::size_t n2, double q, std::uint64_t seed,
                    const GenerateOptions& opts = {}) {
  if (n1 < 1 || n2 < 1) throw ParameterError("cluster sizes must be at least 1");
  detail::check_probability(q, "q");
  GraphMetadata meta{"rb", {{"n1", double(n1)}, {"n2", double(n2)}, {"q", q}, {"seed", double(seed)}}, 0};
  const Vertex split = static_cast<Vertex>(n1);
  return detail::sample_pairs(n1 + n2, seed, opts, std::move(meta),
                              [=](Vertex i, Vertex j) { return (i <= split) != (j <= split) ? q : 0.0; });
}

/// Stochastic block model SBM(n1, n2, p, q) with 0 <= q < p <= 1.
inline Graph gen_sbm(std::size_t n1, std::size_t n2, double p, double q, std::uint64_t seed,
                     const GenerateOptions& opts = {}) {
  if (n1 < 1 || n2 < 1) throw ParameterError("cluster sizes must be at least 1");
  detail::check_probability(p, "p");
  detail::check_probability(q, "q");
  if (!(q < p)) throw ParameterError("SBM requires q < p");
  GraphMetadata meta{
      "sbm", {{"n1", double(n1)}, {"n2", double(n2)}, {"p", p}, {"q", q}, {"seed", double(seed)}}, 0};
  const Vertex split = static_cast<Vertex>(n1);
  return detail::sample_pairs(n1 + n2, seed, opts, std::move(meta),
                              [=](Vertex i, Vertex j) { return (i <= split) == (j <= split) ? p : q; });
}

/// Truncated power law Pr[d] proportional to d^-gamma on d = 1..dmax.
class PowerLawDegrees {
 public:
  PowerLawDegrees(std::size_t dmax, double gamma) : cumulative_(dmax) {
    if (!(gamma > 2.0)) throw ParameterError("power-law exponent gamma must exceed 2");
    if (dmax < 1) throw ParameterError("degree support must be non-empty");
    double acc = 0.0;
    for (std::size_t d = 1; d <= dmax; ++d) {
      acc += std::pow(static_cast<double>(d), -gamma);
      cumulative_[d - 1] = acc;
    }
  }

  std::size_t sample(Stream& s) const {
    const double u = s.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()) + 1, cumulative_.size());
  }

  /// Sum of d * Pr[d] over the truncated support.
  double mean() const {
    double m = 0.0, prev = 0.0;
    for (std::size_t d = 1; d <= cumulative_.size(); ++d) {
      m += static_cast<double>(d) * (cumulative_[d - 1] - prev);
      prev = cumulative_[d - 1];
    }
    return m / cumulative_.back();
  }

 private:
  std::vector<double> cumulative_;
};

/// Draws the i.i.d. expected-degree sequence used by gen_pl.
inline std::vector<double> draw_pl_degrees(std::size_t n, double gamma, std::uint64_t seed) {
  PowerLawDegrees law(n, gamma);
  Stream s(seed, StreamDomain::kDegrees, 0);
  std::vector<double> d(n);
  for (auto& x : d) x = static_cast<double>(law.sample(s));
  return d;
}

/// Power-law model PL(n, gamma, rho): expected degrees d_i i.i.d. from the
/// truncated law (support 1..n), edge {i, j} present with probability
/// min(1, rho d_i d_j). Clamped pairs are counted in the metadata.
inline Graph gen_pl(std::size_t n, double gamma, std::optional<double> rho, std::uint64_t seed,
                    const GenerateOptions& opts = {}) {
  if (n < 1) throw ParameterError("n must be at least 1");
  if (!(gamma > 2.0)) throw ParameterError("power-law exponent gamma must exceed 2");
  if (rho && !(*rho > 0.0)) throw ParameterError("rho must be positive");
  const std::vector<double> d = draw_pl_degrees(n, gamma, seed);
  const double scale = rho.value_or(1.0 / std::accumulate(d.begin(), d.end(), 0.0));
  GraphMetadata meta{"pl", {{"n", double(n)}, {"gamma", gamma}, {"rho", scale}, {"seed", double(seed)}}, 0};
  std::vector<std::uint64_t> clamped(n, 0);
  Graph g = detail::sample_pairs(n, seed, opts, meta, [&](Vertex i, Vertex j) {
    const double pr = scale * d[i - 1] * d[j - 1];
    if (pr > 1.0) {
      ++clamped[i - 1];  // row i is visited by exactly one thread
      return 1.0;
    }
    return pr;
  });
  meta.clamped_pairs = std::accumulate(clamped.begin(), clamped.end(), std::uint64_t{0});
  return std::move(g).with_metadata(std::move(meta));
}

/// Dispatches on the model variant.
inline Graph generate(const ModelParams& model, std::uint64_t seed, const GenerateOptions& opts = {}) {
  return std::visit(
      [&](const auto& m) -> Graph {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ErParams>) return gen_er(m.n, m.p, seed, opts);
        else if constexpr (std::is_same_v<T, RbParams>) return gen_rb(m.n1, m.n2, m.q, seed, opts);
        else if constexpr (std::is_same_v<T, SbmParams>) return gen_sbm(m.n1, m.n2, m.p, m.q, seed, opts);
        else return gen_pl(m.n, m.gamma, m.rho, seed, opts);
      },
      model);
}

inline std::string model_name(const ModelParams& model) {
  static constexpr const char* names[] = {"er", "rb", "sbm", "pl"};
  return names[model.index()];
}

inline std::size_t model_vertex_count(const ModelParams& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ErParams> || std::is_same_v<T, PlParams>) return m.n;
        else return m.n1 + m.n2;
      },
      model);
}

}  // namespace codedgraph
