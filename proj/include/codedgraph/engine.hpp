#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "allocation.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "programs.hpp"
#include "shuffle.hpp"

namespace codedgraph {

enum class Mode { kCoded, kUncoded };

inline std::string to_string(Mode m) { return m == Mode::kCoded ? "coded" : "uncoded"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "coded") return Mode::kCoded;
  if (s == "uncoded") return Mode::kUncoded;
  throw ParameterError("mode must be 'coded' or 'uncoded', got '" + s + "'");
}

struct JobConfig {
  Mode mode = Mode::kCoded;
  std::size_t workers = 0;          // K; 0 takes it from the allocation
  std::size_t load = 0;             // r; 0 takes it from the allocation
  std::size_t iterations = 1;
  std::optional<double> tolerance;  // stop early once no state moves by more than this
  std::uint64_t value_bits = 64;    // T, used for accounting only
  unsigned threads = 1;
  ShufflePlan plan = er_plan();
  bool capture_messages = false;
};

struct ComponentLoad {
  std::string name;
  Rational bits{0};
  Rational load{0};
  std::size_t messages = 0;
  std::size_t unicasts = 0;
};

/// Communication accounting for one Shuffle phase.
struct LoadReport {
  std::string mode;
  std::string plan;
  std::size_t workers = 0;
  Rational computation_load{0};
  std::size_t vertices = 0;            // n used for normalization (padding excluded)
  std::size_t padded_vertices = 0;
  std::uint64_t value_bits = 64;

  std::vector<Rational> worker_bits;   // c_k
  Rational total_bits{0};
  Rational load{0};                    // L = sum c_k / (n^2 T)
  Rational uncoded_equivalent_bits{0}; // what the same deliveries cost as unicasts

  std::size_t map_evaluations = 0;
  std::size_t coded_messages = 0;
  std::size_t unicasts = 0;
  std::size_t decode_ops = 0;
  std::size_t groups = 0;
  std::size_t dominance_violations = 0;

  std::vector<ComponentLoad> components;
  Rational feedback_bits{0};           // state redistribution, outside L

  double load_value() const { return boost::rational_cast<double>(load); }
};

inline std::string to_string(const Rational& x) {
  return x.denominator() == 1 ? std::to_string(x.numerator())
                              : std::to_string(x.numerator()) + "/" + std::to_string(x.denominator());
}

/// "L = m/n^2" when the load is a whole number of values, the reduced fraction otherwise, "L = 0" for zero.
inline std::string format_load(const LoadReport& rep) {
  if (rep.total_bits.numerator() == 0) return "L = 0";
  const Rational values = rep.total_bits / Rational(static_cast<std::int64_t>(rep.value_bits));
  if (values.denominator() == 1)
    return "L = " + std::to_string(values.numerator()) + "/" + std::to_string(rep.vertices * rep.vertices);
  return "L = " + to_string(rep.load);
}

inline nlohmann::json to_json(const LoadReport& rep) {
  nlohmann::json j;
  j["mode"] = rep.mode;
  j["plan"] = rep.plan;
  j["K"] = rep.workers;
  j["r"] = to_string(rep.computation_load);
  j["n"] = rep.vertices;
  j["n_padded"] = rep.padded_vertices;
  j["T"] = rep.value_bits;
  auto& wb = j["worker_bits"] = nlohmann::json::array();
  for (const auto& b : rep.worker_bits) wb.push_back(to_string(b));
  j["total_bits"] = to_string(rep.total_bits);
  j["L"] = to_string(rep.load);
  j["L_decimal"] = rep.load_value();
  j["uncoded_equivalent_bits"] = to_string(rep.uncoded_equivalent_bits);
  j["counters"] = {{"map_evaluations", rep.map_evaluations}, {"coded_messages", rep.coded_messages},
                   {"unicasts", rep.unicasts},             {"decode_ops", rep.decode_ops},
                   {"groups", rep.groups},                 {"dominance_violations", rep.dominance_violations}};
  auto& comps = j["components"] = nlohmann::json::array();
  for (const auto& c : rep.components)
    comps.push_back({{"name", c.name},
                     {"bits", to_string(c.bits)},
                     {"L", to_string(c.load)},
                     {"L_decimal", boost::rational_cast<double>(c.load)},
                     {"messages", c.messages},
                     {"unicasts", c.unicasts}});
  j["feedback_bits"] = to_string(rep.feedback_bits);
  return j;
}

struct JobResult {
  VertexState state;                  // one entry per real vertex
  LoadReport report;
  std::vector<CodedMessage> messages; // filled when capture_messages is set
};

struct IterationsResult {
  VertexState state;
  std::vector<LoadReport> reports;    // one per executed iteration
  bool converged = false;
};

namespace detail {

inline std::uint64_t pack(const RecordKey& k) { return (std::uint64_t{k.reducer} << 32) | k.mapper; }

/// What a worker has received for one record: either the whole value or some segments.
struct Inbox {
  std::uint64_t bits = 0;
  std::uint64_t segments = 0;  // bit t set once segment t arrived
  bool whole = false;
};

struct Delivery {
  WorkerId to = 0;
  RecordKey key;
  std::size_t index = 0;       // segment index; ignored for whole values
  std::uint64_t payload = 0;
  bool whole = false;
};

/// Shuffle traffic of one multicast group, merged in group order afterwards.
struct GroupOutcome {
  std::vector<std::size_t> sent_messages;  // per worker
  std::vector<std::size_t> sent_unicasts;  // per worker
  std::vector<std::size_t> comp_messages;
  std::vector<std::size_t> comp_unicasts;
  std::size_t decode_ops = 0;
  std::size_t uncoded_records = 0;
  std::size_t violations = 0;
  std::vector<Delivery> deliveries;
  std::vector<CodedMessage> messages;
};

inline double state_delta(double a, double b) { return a == b ? 0.0 : std::abs(a - b); }

}  // namespace detail

/// Computes the bits spent sending each updated state o_i to the other workers mapping i.
inline Rational feedback_bits(const Allocation& a, std::size_t real_vertices, std::uint64_t value_bits) {
  std::int64_t copies = 0;
  for (Vertex i = 1; i <= real_vertices; ++i)
    copies += static_cast<std::int64_t>(a.mask(i).without(a.owner(i)).size());
  return Rational(copies * static_cast<std::int64_t>(value_bits));
}

/// One Map, Shuffle, Reduce round over the K workers of `a`, starting from `state`.
template <VertexProgram P>
JobResult run_round(const Graph& g, const Allocation& a, const P& program, const VertexState& state,
                    const JobConfig& cfg) {
  const std::size_t n = g.vertex_count();
  const std::size_t K = a.workers();
  if (a.real_vertices() != n)
    throw UsageError("allocation covers " + std::to_string(a.real_vertices()) + " real vertices, graph has " +
                     std::to_string(n));
  if (cfg.workers && cfg.workers != K)
    throw UsageError("config K=" + std::to_string(cfg.workers) + " but allocation has " + std::to_string(K));
  if (state.size() != n) throw UsageError("state size does not match the graph");
  if (cfg.value_bits < 1) throw ParameterError("T must be positive");
  const auto batch_r = a.batch_load();
  if (cfg.mode == Mode::kCoded && !batch_r) throw UsageError("coded mode needs a batch allocation");
  if (cfg.load && (!batch_r || *batch_r != cfg.load))
    throw UsageError("config r=" + std::to_string(cfg.load) + " does not match the allocation");
  const std::size_t r = batch_r.value_or(1);
  const ShufflePlan& plan = cfg.plan;
  const std::size_t ncomp = plan.components.size();

  // Map.
  std::vector<LocalValues> local(K, LocalValues(n));
  std::vector<std::size_t> map_evals(K, 0);
  parallel_for(K, cfg.threads, [&](std::size_t kk) {
    for (Vertex j : a.map_set(static_cast<WorkerId>(kk + 1))) {
      if (j > n) continue;
      const auto nb = g.neighbors(j);
      std::vector<double> vals(nb.size());
      for (std::size_t t = 0; t < nb.size(); ++t) vals[t] = program.map(g, j, state[j - 1], nb[t]);
      map_evals[kk] += nb.size();
      local[kk].put(j, std::move(vals));
    }
  });

  const auto fresh = [&] {
    detail::GroupOutcome o;
    o.sent_messages.assign(K, 0);
    o.sent_unicasts.assign(K, 0);
    o.comp_messages.assign(ncomp, 0);
    o.comp_unicasts.assign(ncomp, 0);
    return o;
  };
  const auto unicast = [&](detail::GroupOutcome& o, const RecordKey& key, WorkerId to, std::size_t comp) {
    const WorkerId src = uncoded_source(a, key.mapper);
    const auto v = local[src - 1].get(g, key);
    if (!v) throw ConsistencyError("worker " + std::to_string(src) + " lacks map output " + to_string(key));
    ++o.sent_unicasts[src - 1];
    ++o.comp_unicasts[comp];
    ++o.uncoded_records;
    o.deliveries.push_back({to, key, 0, to_word(*v), true});
  };

  // Shuffle.
  std::vector<detail::GroupOutcome> outcomes;
  if (cfg.mode == Mode::kUncoded) {
    outcomes.resize(K);
    parallel_for(K, cfg.threads, [&](std::size_t kk) {
      auto o = fresh();
      const WorkerId k = static_cast<WorkerId>(kk + 1);
      for (const RecordKey& key : needed_records(a, g, k)) unicast(o, key, k, plan.component_of(key));
      outcomes[kk] = std::move(o);
    });
  } else {
    const auto groups = r < K ? subsets_of_size(static_cast<WorkerId>(K), r + 1) : std::vector<WorkerSet>{};
    outcomes.resize(groups.size());
    const auto coded = plan.coded_components();
    parallel_for(groups.size(), cfg.threads, [&](std::size_t gi) {
      auto o = fresh();
      const WorkerSet S = groups[gi];
      if (!plan.admits(S)) {
        for (WorkerId k : S.members())
          for (const RecordKey& key : build_z_set(a, g, S, k)) unicast(o, key, k, plan.uncoded_component(key));
        outcomes[gi] = std::move(o);
        return;
      }
      for (std::size_t comp : coded) {
        RecordFilter filter;
        if (ncomp > 1) filter = [&plan, comp](const RecordKey& key) { return plan.component_of(key) == comp; };
        std::size_t columns = 0, cells = 0;
        for (WorkerId k : S.members()) cells += build_z_set(a, g, S, k, filter).size();
        for (WorkerId s : S.members()) {
          auto msgs = encode_group(a, g, S, s, local[s - 1], filter);
          columns += msgs.size();
          o.sent_messages[s - 1] += msgs.size();
          o.comp_messages[comp] += msgs.size();
          for (WorkerId k : S.without(s).members()) {
            o.decode_ops += msgs.size();
            for (const Segment& seg : decode(k, S, s, msgs, a, g, local[k - 1], filter))
              o.deliveries.push_back({k, seg.key, seg.index, seg.payload, false});
          }
          if (cfg.capture_messages) o.messages.insert(o.messages.end(), msgs.begin(), msgs.end());
        }
        o.uncoded_records += cells;
        if (columns > r * cells) ++o.violations;  // sum_s Q_s T/r > sum_k |Z^k| T
      }
      outcomes[gi] = std::move(o);
    });
  }

  // Merge in group order and assemble inboxes.
  JobResult result;
  LoadReport& rep = result.report;
  rep.mode = to_string(cfg.mode);
  rep.plan = plan.name;
  rep.workers = K;
  rep.computation_load = a.computation_load();
  rep.vertices = n;
  rep.padded_vertices = a.vertex_count();
  rep.value_bits = cfg.value_bits;
  rep.groups = cfg.mode == Mode::kCoded ? outcomes.size() : 0;
  for (auto e : map_evals) rep.map_evaluations += e;

  const auto T = static_cast<std::int64_t>(cfg.value_bits);
  const Rational seg_bits(T, static_cast<std::int64_t>(r));
  std::vector<std::size_t> sent_msgs(K, 0), sent_uni(K, 0), comp_msgs(ncomp, 0), comp_uni(ncomp, 0);
  std::size_t uncoded_records = 0;
  std::vector<std::unordered_map<std::uint64_t, detail::Inbox>> inbox(K);
  for (auto& o : outcomes) {
    for (std::size_t k = 0; k < K; ++k) {
      sent_msgs[k] += o.sent_messages[k];
      sent_uni[k] += o.sent_unicasts[k];
    }
    for (std::size_t c = 0; c < ncomp; ++c) {
      comp_msgs[c] += o.comp_messages[c];
      comp_uni[c] += o.comp_unicasts[c];
    }
    rep.decode_ops += o.decode_ops;
    rep.dominance_violations += o.violations;
    uncoded_records += o.uncoded_records;
    for (const auto& d : o.deliveries) {
      auto& box = inbox[d.to - 1][detail::pack(d.key)];
      if (d.whole) {
        if (box.whole || box.segments) throw ConsistencyError(to_string(d.key) + " delivered twice");
        box.whole = true;
        box.bits = d.payload;
      } else {
        const std::uint64_t bit = std::uint64_t{1} << d.index;
        if (box.whole || (box.segments & bit)) throw ConsistencyError(to_string(d.key) + " segment delivered twice");
        box.segments |= bit;
        box.bits |= place_segment(d.payload, r, d.index);
      }
    }
    if (cfg.capture_messages) result.messages.insert(result.messages.end(), o.messages.begin(), o.messages.end());
  }

  rep.worker_bits.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    rep.worker_bits[k] = seg_bits * static_cast<std::int64_t>(sent_msgs[k]) + Rational(T * static_cast<std::int64_t>(sent_uni[k]));
    rep.total_bits += rep.worker_bits[k];
    rep.coded_messages += sent_msgs[k];
    rep.unicasts += sent_uni[k];
  }
  const Rational norm(static_cast<std::int64_t>(n * n) * T);
  rep.load = rep.total_bits / norm;
  rep.uncoded_equivalent_bits = Rational(T * static_cast<std::int64_t>(uncoded_records));
  for (std::size_t c = 0; c < ncomp; ++c) {
    ComponentLoad cl;
    cl.name = plan.components[c];
    cl.bits = seg_bits * static_cast<std::int64_t>(comp_msgs[c]) + Rational(T * static_cast<std::int64_t>(comp_uni[c]));
    cl.load = cl.bits / norm;
    cl.messages = comp_msgs[c];
    cl.unicasts = comp_uni[c];
    rep.components.push_back(std::move(cl));
  }

  // Reduce.
  const std::uint64_t full = r >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << r) - 1;
  result.state = state;
  parallel_for(K, cfg.threads, [&](std::size_t kk) {
    const WorkerId k = static_cast<WorkerId>(kk + 1);
    std::vector<MappedValue> values;
    for (Vertex i : a.reduce_set(k)) {
      if (i > n) continue;
      values.clear();
      for (Vertex j : g.neighbors(i)) {
        const RecordKey key{i, j};
        if (a.maps(k, j)) {
          values.push_back({j, *local[kk].get(g, key)});
          continue;
        }
        auto it = inbox[kk].find(detail::pack(key));
        if (it == inbox[kk].end() || !(it->second.whole || it->second.segments == full))
          throw DecodeError("worker " + std::to_string(k) + " could not assemble " + to_string(key));
        values.push_back({j, from_word(it->second.bits)});
      }
      result.state[i - 1] = program.reduce(g, i, values, state[i - 1]);
    }
  });
  return result;
}

/// Single round from the program's initial state.
template <VertexProgram P>
JobResult run_job(const Graph& g, const Allocation& a, const P& program, const JobConfig& cfg) {
  return run_round(g, a, program, program.initial_state(g), cfg);
}

/// Repeats rounds, charging each updated state's redistribution to the
/// workers that map it as feedback load.
template <VertexProgram P>
IterationsResult run_iterations(const Graph& g, const Allocation& a, const P& program, const JobConfig& cfg,
                                std::optional<VertexState> initial = std::nullopt) {
  if (cfg.iterations < 1) throw ParameterError("iterations must be at least 1");
  IterationsResult out;
  out.state = initial ? std::move(*initial) : program.initial_state(g);
  const Rational feedback = feedback_bits(a, g.vertex_count(), cfg.value_bits);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    JobResult step = run_round(g, a, program, out.state, cfg);
    step.report.feedback_bits = feedback;
    out.reports.push_back(std::move(step.report));
    double delta = 0.0;
    for (std::size_t v = 0; v < out.state.size(); ++v) delta = std::max(delta, detail::state_delta(out.state[v], step.state[v]));
    out.state = std::move(step.state);
    if (cfg.tolerance && delta <= *cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace codedgraph
