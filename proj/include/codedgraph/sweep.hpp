#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "allocation.hpp"
#include "analysis.hpp"
#include "engine.hpp"
#include "generators.hpp"
#include "graph.hpp"
#include "programs.hpp"
#include "shuffle.hpp"

namespace codedgraph {

/// How two-cluster SBM graphs are allocated.
enum class SbmLayout {
  kInterleaved,  // sbm_allocate: both clusters spread over every batch
  kTwoCluster,   // rb_allocate: each cluster on its own server set
};

struct Scheme {
  Allocation allocation;
  ShufflePlan plan;
};

/// Allocation and plan used for a model: batch scheme for ER and PL, the
/// three-phase scheme for RB, the component scheme for SBM.
inline Scheme make_scheme(const ModelParams& model, std::size_t K, std::size_t r,
                          SbmLayout layout = SbmLayout::kInterleaved) {
  return std::visit(
      [&](const auto& m) -> Scheme {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ErParams> || std::is_same_v<T, PlParams>) {
          return {er_allocate(m.n, K, r), er_plan()};
        } else if constexpr (std::is_same_v<T, RbParams>) {
          auto rb = rb_allocate(m.n1, m.n2, K, r);
          return {std::move(rb.allocation), rb_plan(rb.plan)};
        } else {
          if (layout == SbmLayout::kTwoCluster) {
            auto rb = rb_allocate(m.n1, m.n2, K, r);
            return {std::move(rb.allocation), sbm_plan(m.n1, rb.plan)};
          }
          return {sbm_allocate(m.n1, m.n2, K, r), sbm_plan(m.n1)};
        }
      },
      model);
}

/// Theory columns for a sweep row, in units of L.
inline BoundSet model_bounds(const ModelParams& model, std::size_t K, std::size_t r) {
  return std::visit(
      [&](const auto& m) -> BoundSet {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ErParams>) {
          return er_bounds(m.p, K, r);
        } else if constexpr (std::is_same_v<T, RbParams>) {
          return rb_bounds(m.q, K, r);
        } else if constexpr (std::is_same_v<T, SbmParams>) {
          return sbm_bounds(m.n1, m.n2, m.p, m.q, K, r);
        } else {
          BoundSet b = pl_bound(m.gamma, K, r);
          b.uncoded /= double(m.n);
          b.coded_upper /= double(m.n);
          return b;
        }
      },
      model);
}

/// Value reported in the p_or_q column: p for ER, q for RB and SBM, gamma for PL.
inline double model_probability(const ModelParams& model) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ErParams>) return m.p;
        else if constexpr (std::is_same_v<T, PlParams>) return m.gamma;
        else return m.q;
      },
      model);
}

struct SweepConfig {
  ModelParams model = ErParams{300, 0.1};
  std::size_t workers = 5;
  std::vector<std::size_t> r_values{1};
  std::size_t seeds = 1;
  std::uint64_t base_seed = 1;
  std::vector<Mode> modes{Mode::kCoded, Mode::kUncoded};
  SbmLayout sbm_layout = SbmLayout::kInterleaved;
  unsigned threads = 1;
};

struct SweepRow {
  std::size_t r = 0;
  Mode mode = Mode::kCoded;
  std::string model;
  std::size_t n = 0;
  double p_or_q = 0.0;
  std::size_t workers = 0;
  std::size_t seed_count = 0;
  double mean_load = 0.0;
  double stderr_load = 0.0;
  double theory_load = 0.0;
  std::optional<double> lower_bound;
};

/// One realization: the graph seed, r, and the report for each requested mode.
struct SweepSample {
  std::uint64_t seed = 0;
  std::size_t r = 0;
  std::vector<LoadReport> reports;  // aligned with SweepConfig::modes
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<SweepSample> samples;
};

inline std::pair<double, double> mean_stderr(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= double(xs.size());
  if (xs.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / double(xs.size() - 1) / double(xs.size()))};
}

/// Mean normalized load and its standard error per (r, mode) over graphs
/// drawn with seeds base_seed .. base_seed + seeds - 1. Each realization runs
/// one PageRank round; the load does not depend on the program.
inline SweepTable measure_sweep(const SweepConfig& cfg) {
  if (cfg.seeds < 1) throw ParameterError("at least one seed is required");
  if (cfg.r_values.empty()) throw ParameterError("at least one r value is required");
  std::vector<Scheme> schemes;
  for (std::size_t r : cfg.r_values) schemes.push_back(make_scheme(cfg.model, cfg.workers, r, cfg.sbm_layout));

  SweepTable table;
  table.samples.resize(cfg.seeds * cfg.r_values.size());
  parallel_for(cfg.seeds, cfg.threads, [&](std::size_t s) {
    const std::uint64_t seed = cfg.base_seed + s;
    const Graph g = generate(cfg.model, seed);
    const PageRank program;
    for (std::size_t ri = 0; ri < cfg.r_values.size(); ++ri) {
      SweepSample& sample = table.samples[s * cfg.r_values.size() + ri];
      sample.seed = seed;
      sample.r = cfg.r_values[ri];
      for (Mode mode : cfg.modes) {
        JobConfig jc;
        jc.mode = mode;
        jc.plan = schemes[ri].plan;
        sample.reports.push_back(run_job(g, schemes[ri].allocation, program, jc).report);
      }
    }
  });

  for (std::size_t ri = 0; ri < cfg.r_values.size(); ++ri) {
    const std::size_t r = cfg.r_values[ri];
    const BoundSet b = model_bounds(cfg.model, cfg.workers, r);
    for (std::size_t mi = 0; mi < cfg.modes.size(); ++mi) {
      std::vector<double> xs;
      for (std::size_t s = 0; s < cfg.seeds; ++s)
        xs.push_back(table.samples[s * cfg.r_values.size() + ri].reports[mi].load_value());
      const auto [m, se] = mean_stderr(xs);
      SweepRow row;
      row.r = r;
      row.mode = cfg.modes[mi];
      row.model = model_name(cfg.model);
      row.n = model_vertex_count(cfg.model);
      row.p_or_q = model_probability(cfg.model);
      row.workers = cfg.workers;
      row.seed_count = cfg.seeds;
      row.mean_load = m;
      row.stderr_load = se;
      row.theory_load = row.mode == Mode::kCoded ? b.coded_upper : b.uncoded;
      row.lower_bound = b.lower;
      table.rows.push_back(row);
    }
  }
  return table;
}

inline constexpr const char* kSweepHeader = "r,mode,model,n,p_or_q,K,seed_count,mean_L,stderr_L,theory_L,lower_bound_L";

inline void write_csv(const SweepTable& table, std::ostream& out) {
  out << kSweepHeader << '\n';
  for (const auto& row : table.rows) {
    out << row.r << ',' << to_string(row.mode) << ',' << row.model << ',' << row.n << ','
        << detail::format_double(row.p_or_q) << ',' << row.workers << ',' << row.seed_count << ','
        << detail::format_double(row.mean_load) << ',' << detail::format_double(row.stderr_load) << ','
        << detail::format_double(row.theory_load) << ','
        << (row.lower_bound ? detail::format_double(*row.lower_bound) : std::string()) << '\n';
  }
}

}  // namespace codedgraph
