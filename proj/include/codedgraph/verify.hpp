#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "allocation.hpp"
#include "analysis.hpp"
#include "engine.hpp"
#include "generators.hpp"
#include "programs.hpp"
#include "shuffle.hpp"
#include "sweep.hpp"

namespace codedgraph {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

inline std::string format_result(const CriterionResult& c) {
  std::ostringstream os;
  os << (c.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << c.id << "  " << c.title << "  ["
     << std::fixed << std::setprecision(2) << c.seconds << " s]  " << c.detail;
  return os.str();
}

/// The six-vertex instance: edges {1,5}, {2,6}, {3,4}.
inline Graph worked_example_graph() {
  const std::vector<Edge> edges{{1, 5}, {2, 6}, {3, 4}};
  return Graph::from_edges(6, edges);
}

/// Runs the acceptance checks. Criteria 5 and 9 reuse realizations gathered
/// by earlier criteria, so run_all runs them in order.
class Acceptance {
 public:
  explicit Acceptance(unsigned threads = 1) : threads_(threads) {}

  std::vector<CriterionResult> run_all(std::ostream* progress = nullptr) {
    std::vector<CriterionResult> out;
    const std::vector<std::function<CriterionResult()>> steps{
        [&] { return worked_example(); }, [&] { return decode_correctness(); }, [&] { return er_sweep(); },
        [&] { return q_window(); },       [&] { return lower_bound(); },        [&] { return rb_scheme(); },
        [&] { return sbm_scheme(); },     [&] { return pl_scheme(); },          [&] { return dominance(); },
        [&] { return r_star_value(); }};
    for (const auto& step : steps) {
      out.push_back(step());
      if (progress) *progress << format_result(out.back()) << std::endl;
    }
    return out;
  }

  CriterionResult worked_example() {
    return timed(1, "worked example: L = 6/36 uncoded, 3/36 coded, messages X1..X3", [&](std::ostream& d) {
      const Graph g = worked_example_graph();
      const Allocation a = er_allocate(6, 3, 2);
      bool ok = a.batch(WorkerSet{1, 2}).size() == 2 && a.batch(WorkerSet{1, 2})[0] == 1 &&
                a.batch(WorkerSet{1, 3})[0] == 3 && a.batch(WorkerSet{2, 3})[0] == 5 && a.reduce_set(1)[0] == 1 &&
                a.reduce_set(2)[0] == 3 && a.reduce_set(3)[0] == 5;
      JobConfig cfg;
      cfg.mode = Mode::kUncoded;
      const PageRank pr;
      const auto unc = run_job(g, a, pr, cfg);
      cfg.mode = Mode::kCoded;
      const auto cod = run_job(g, a, pr, cfg);
      ok = ok && unc.report.load == Rational(6, 36) && cod.report.load == Rational(3, 36);
      d << "uncoded " << format_load(unc.report) << ", coded " << format_load(cod.report);

      using Col = std::vector<std::tuple<Vertex, Vertex, std::size_t>>;  // (i, j, segment 1-based)
      const std::vector<std::vector<Col>> expected{
          {{{5, 1, 1}, {4, 3, 1}}, {{3, 4, 1}, {6, 2, 1}}},
          {{{5, 1, 2}, {1, 5, 1}}, {{6, 2, 2}, {2, 6, 1}}},
          {{{4, 3, 2}, {1, 5, 2}}, {{3, 4, 2}, {2, 6, 2}}},
      };
      const WorkerSet all{1, 2, 3};
      for (WorkerId s = 1; s <= 3; ++s) {
        const GroupTable t = GroupTable::build(a, g, all, s);
        bool match = t.width() == expected[s - 1].size();
        for (std::size_t c = 1; match && c <= t.width(); ++c) {
          Col got;
          for (const auto& cell : t.column(c)) got.emplace_back(cell.key.reducer, cell.key.mapper, cell.index + 1);
          Col want = expected[s - 1][c - 1];
          std::sort(got.begin(), got.end());
          std::sort(want.begin(), want.end());
          match = got == want;
        }
        d << "; X" << s << (match ? " matches" : " differs");
        ok = ok && match;
      }
      const auto ref = reference_step(g, pr, pr.initial_state(g));
      ok = ok && cod.state == ref && unc.state == ref;
      return ok;
    }, 1.0);
  }

  CriterionResult decode_correctness() {
    return timed(2, "decode correctness on 100 ER instances (PageRank, SSSP)", [&](std::ostream& d) {
      std::size_t passed = 0;
      std::string first_failure;
      for (std::size_t idx = 0; idx < 100; ++idx) {
        const std::size_t n = idx % 2 ? 60 : 30;
        const double p = (idx / 2) % 2 ? 0.3 : 0.1;
        const std::size_t K = 3 + (idx / 4) % 3;
        const std::size_t r = 1 + (idx / 12) % K;
        const Graph g = gen_er(n, p, 1000 + idx, {WeightMode::kUniform, 1});
        const std::string err = check_instance(g, er_allocate(n, K, r), er_plan());
        if (err.empty()) ++passed;
        else if (first_failure.empty())
          first_failure = "instance n=" + std::to_string(n) + " K=" + std::to_string(K) + " r=" + std::to_string(r) + ": " + err;
      }
      d << passed << "/100 instances match the reference";
      if (!first_failure.empty()) d << "; " << first_failure;
      return passed == 100;
    }, 60.0);
  }

  CriterionResult er_sweep() {
    return timed(3, "ER(300, 0.1), K=5, 100 seeds, r=1..4 against the closed forms", [&](std::ostream& d) {
      SweepConfig cfg;
      cfg.model = ErParams{300, 0.1};
      cfg.workers = 5;
      cfg.r_values = {1, 2, 3, 4};
      cfg.seeds = 100;
      cfg.threads = threads_;
      er_table_ = measure_sweep(cfg);
      tally_sweep(*er_table_);
      bool ok = true;
      d << std::setprecision(5);
      for (std::size_t r = 1; r <= 4; ++r) {
        const SweepRow& cod = row(*er_table_, r, Mode::kCoded);
        const SweepRow& unc = row(*er_table_, r, Mode::kUncoded);
        const double target_unc = 0.1 * (1.0 - double(r) / 5.0);
        const double lo = target_unc / double(r);
        const double hi = lo * q_ratio_window(g_tilde(300, 5, r), 0.1, r);
        const bool unc_ok = std::abs(unc.mean_load - target_unc) <= 0.02 * target_unc;
        // At r = 1 the window collapses to a point; the mean is then held to it within 3 standard errors.
        const bool cod_ok = r == 1 ? std::abs(cod.mean_load - lo) <= 3.0 * cod.stderr_load
                                   : cod.mean_load >= lo && cod.mean_load <= hi;
        const double gain = unc.mean_load / cod.mean_load;
        const bool gain_ok = r == 1 || gain >= 0.9 * double(r);
        d << (r > 1 ? "; " : "") << "r=" << r << ": uncoded " << unc.mean_load << " (target " << target_unc
          << "), coded " << cod.mean_load << " +- " << cod.stderr_load << " in [" << lo << ", " << hi << "]";
        if (r > 1) d << ", gain " << gain;
        if (!unc_ok) d << " UNCODED-OUT";
        if (!cod_ok) d << " CODED-OUT";
        if (!gain_ok) d << " GAIN-LOW";
        ok = ok && unc_ok && cod_ok && gain_ok;
      }
      return ok;
    }, 600.0);
  }

  CriterionResult q_window() {
    return timed(4, "E[Q]/(p g~) window at n=150,300,600 (p=0.1, K=5, r=2, 400 trials)", [&](std::ostream& d) {
      bool ok = true;
      double prev = std::numeric_limits<double>::infinity();
      d << std::setprecision(5);
      for (std::size_t n : {150u, 300u, 600u}) {
        const QEstimate e = expected_q_monte_carlo(n, 0.1, 5, 2, 400, 4242, threads_);
        const double hi = q_ratio_window(e.g_tilde, 0.1, 2);
        const double lo = 1.0 - 3.0 * e.ratio_stderr;
        const double dist = std::abs(e.ratio - 1.0);
        const bool in = e.ratio >= lo && e.ratio <= hi;
        const bool closer = dist < prev;
        d << (n > 150 ? "; " : "") << "n=" << n << ": ratio " << e.ratio << " +- " << e.ratio_stderr << " in [" << lo
          << ", " << hi << "]";
        if (!in) d << " OUT";
        if (!closer) d << " NOT-CLOSER";
        ok = ok && in && closer;
        prev = dist;
      }
      return ok;
    }, 0.0);
  }

  CriterionResult lower_bound() {
    return timed(5, "lower bound: a[r]=n gives (1/r)p(1-r/K); coded means stay above it", [&](std::ostream& d) {
      bool ok = true;
      double worst = 0.0;
      for (std::size_t K = 1; K <= 8; ++K)
        for (std::size_t r = 1; r <= K; ++r) {
          const Allocation a = er_allocate(K * binomial(K, r), K, r);
          const double got = allocation_lower_bound(multiplicity_profile(a), 0.1, K, a.vertex_count());
          const double want = 0.1 / double(r) * (1.0 - double(r) / double(K));
          const double err = std::abs(got - want);
          worst = std::max(worst, err);
          if (err > 4.0 * std::numeric_limits<double>::epsilon() * std::max(want, 1e-300) && err != 0.0) ok = false;
        }
      d << std::setprecision(3) << "max |profile bound - closed form| over K<=8: " << worst;
      if (!er_table_) {
        d << "; criterion 3 data unavailable";
        return false;
      }
      d << std::setprecision(5);
      for (std::size_t r = 1; r <= 4; ++r) {
        const SweepRow& cod = row(*er_table_, r, Mode::kCoded);
        const double bound = 0.1 / double(r) * (1.0 - double(r) / 5.0);
        const bool above = cod.mean_load >= bound - 3.0 * cod.stderr_load;
        d << "; r=" << r << " coded " << cod.mean_load << " vs " << bound << (above ? "" : " BELOW");
        ok = ok && above;
      }
      return ok;
    }, 0.0);
  }

  CriterionResult rb_scheme() {
    return timed(6, "RB(150,150,0.1), K=6, r=1,2: three-phase scheme", [&](std::ostream& d) {
      SweepConfig cfg;
      cfg.model = RbParams{150, 150, 0.1};
      cfg.workers = 6;
      cfg.r_values = {1, 2};
      cfg.seeds = 100;
      cfg.threads = threads_;
      const SweepTable t = measure_sweep(cfg);
      tally_sweep(t);
      bool ok = true;
      bool phase3_zero = true;
      for (const auto& s : t.samples)
        for (const auto& rep : s.reports)
          if (rep.components.at(2).bits.numerator() != 0) phase3_zero = false;
      d << std::setprecision(5);
      for (std::size_t r = 1; r <= 2; ++r) {
        const SweepRow& cod = row(t, r, Mode::kCoded);
        const double target = 0.1 / (2.0 * double(r)) * (1.0 - 2.0 * double(r) / 6.0);
        const double rel = std::abs(cod.mean_load - target) / target;
        d << (r > 1 ? "; " : "") << "r=" << r << ": coded " << cod.mean_load << " vs " << target << " ("
          << 100.0 * rel << "%)";
        ok = ok && rel <= 0.15;
      }
      d << "; phase III load " << (phase3_zero ? "0 on every run" : "NONZERO");
      std::size_t passed = 0, total = 0;
      for (std::size_t r = 1; r <= 2; ++r) {
        const auto rb = rb_allocate(150, 150, 6, r);
        for (std::uint64_t seed = 500; seed < 510; ++seed, ++total) {
          const Graph g = gen_rb(150, 150, 0.1, seed, {WeightMode::kUniform, 1});
          if (check_instance(g, rb.allocation, rb_plan(rb.plan)).empty()) ++passed;
        }
      }
      d << "; decode " << passed << "/" << total;
      return ok && phase3_zero && passed == total;
    }, 0.0);
  }

  CriterionResult sbm_scheme() {
    return timed(7, "SBM(100,100,0.2,0.05), K=6, r=2: component scheme", [&](std::ostream& d) {
      SweepConfig cfg;
      cfg.model = SbmParams{100, 100, 0.2, 0.05};
      cfg.workers = 6;
      cfg.r_values = {2};
      cfg.seeds = 100;
      cfg.threads = threads_;
      const SweepTable t = measure_sweep(cfg);
      tally_sweep(t);
      bool sums = true;
      for (const auto& s : t.samples)
        for (const auto& rep : s.reports) {
          Rational acc{0};
          for (const auto& c : rep.components) acc += c.bits;
          if (acc != rep.total_bits) sums = false;
        }
      const BoundSet b = sbm_bounds(100, 100, 0.2, 0.05, 6, 2);
      const SweepRow& cod = row(t, 2, Mode::kCoded);
      const bool upper_ok = cod.mean_load <= b.coded_upper * 1.15;
      const bool lower_ok = cod.mean_load >= *b.lower - 3.0 * cod.stderr_load;
      d << std::setprecision(5) << "coded " << cod.mean_load << " +- " << cod.stderr_load << ", upper "
        << b.coded_upper << " (x1.15 = " << b.coded_upper * 1.15 << "), converse " << *b.lower
        << "; components " << (sums ? "sum exactly to total" : "DO NOT SUM");
      std::size_t passed = 0, total = 0;
      const Scheme scheme = make_scheme(cfg.model, 6, 2);
      for (std::uint64_t seed = 700; seed < 705; ++seed, ++total) {
        const Graph g = gen_sbm(100, 100, 0.2, 0.05, seed, {WeightMode::kUniform, 1});
        if (check_instance(g, scheme.allocation, scheme.plan).empty()) ++passed;
      }
      d << "; decode " << passed << "/" << total;
      return sums && upper_ok && lower_ok && passed == total;
    }, 0.0);
  }

  CriterionResult pl_scheme() {
    return timed(8, "PL(2000, 2.5, rho auto), K=5, r=2,3, 50 seeds: gain near r", [&](std::ostream& d) {
      SweepConfig cfg;
      cfg.model = PlParams{2000, 2.5, std::nullopt};
      cfg.workers = 5;
      cfg.r_values = {2, 3};
      cfg.seeds = 50;
      cfg.threads = threads_;
      const SweepTable t = measure_sweep(cfg);
      tally_sweep(t);
      bool ok = true;
      d << std::setprecision(4);
      for (std::size_t r = 2; r <= 3; ++r) {
        const double gain = row(t, r, Mode::kUncoded).mean_load / row(t, r, Mode::kCoded).mean_load;
        const double rel = std::abs(gain - double(r)) / double(r);
        d << (r > 2 ? "; " : "") << "r=" << r << ": gain " << gain << " (" << 100.0 * rel << "% from r)";
        ok = ok && rel <= 0.20;
      }
      std::size_t passed = 0, total = 0;
      for (std::size_t r = 2; r <= 3; ++r) {
        const Allocation a = er_allocate(2000, 5, r);
        for (std::uint64_t seed = 900; seed < 903; ++seed, ++total) {
          const Graph g = gen_pl(2000, 2.5, std::nullopt, seed, {WeightMode::kUniform, 1});
          if (check_instance(g, a, er_plan()).empty()) ++passed;
        }
      }
      d << "; decode " << passed << "/" << total;
      return ok && passed == total;
    }, 0.0);
  }

  CriterionResult dominance() {
    return timed(9, "per-realization dominance: coded L <= uncoded L", [&](std::ostream& d) {
      d << realizations_ << " realizations from criteria 2-8, " << dominance_failures_ << " with coded > uncoded, "
        << group_violations_ << " group-level violations";
      return realizations_ > 0 && dominance_failures_ == 0 && group_violations_ == 0;
    }, 0.0);
  }

  CriterionResult r_star_value() {
    return timed(10, "r* for T_map=1.649, T_shuffle=43.78", [&](std::ostream& d) {
      const double v = r_star(1.649, 43.78);
      d << std::setprecision(6) << "r* = " << v << " (expected 5.15 +- 0.005)";
      return std::abs(v - 5.15) <= 0.005;
    }, 0.0);
  }

  /// Checks one instance end to end; returns an empty string on success.
  /// PageRank: one coded and one uncoded round against the reference.
  /// SSSP: coded rounds to a fixed point against the same number of reference rounds.
  std::string check_instance(const Graph& g, const Allocation& a, const ShufflePlan& plan) {
    try {
      const PageRank pr;
      JobConfig cfg;
      cfg.plan = plan;
      cfg.threads = threads_;
      const auto cod = run_job(g, a, pr, cfg);
      cfg.mode = Mode::kUncoded;
      const auto unc = run_job(g, a, pr, cfg);
      tally(cod.report, unc.report);
      const VertexState ref = reference_step(g, pr, pr.initial_state(g));
      for (std::size_t v = 0; v < ref.size(); ++v) {
        const double tol = 1e-12 * std::abs(ref[v]);
        if (std::abs(cod.state[v] - ref[v]) > tol || std::abs(unc.state[v] - ref[v]) > tol)
          return "PageRank differs at vertex " + std::to_string(v + 1);
      }
      const ShortestPath sp(1);
      cfg.mode = Mode::kCoded;
      cfg.iterations = g.vertex_count();
      cfg.tolerance = 0.0;
      const auto it = run_iterations(g, a, sp, cfg);
      const VertexState sref = reference_execute(g, sp, sp.initial_state(g), it.reports.size());
      if (it.state != sref) return "SSSP differs from the reference";
      if (!it.converged) return "SSSP did not reach a fixed point";
      return {};
    } catch (const std::exception& e) {
      return e.what();
    }
  }

 private:
  template <typename Body>
  CriterionResult timed(int id, std::string title, Body&& body, double limit_seconds) {
    CriterionResult res;
    res.id = id;
    res.title = std::move(title);
    std::ostringstream d;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      res.pass = body(d);
    } catch (const std::exception& e) {
      d << " error: " << e.what();
      res.pass = false;
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_seconds > 0.0) {
      d << "; runtime limit " << limit_seconds << " s";
      if (res.seconds >= limit_seconds) {
        d << " EXCEEDED";
        res.pass = false;
      }
    }
    res.detail = d.str();
    return res;
  }

  static const SweepRow& row(const SweepTable& t, std::size_t r, Mode mode) {
    for (const auto& x : t.rows)
      if (x.r == r && x.mode == mode) return x;
    throw UsageError("sweep row missing");
  }

  void tally(const LoadReport& coded, const LoadReport& uncoded) {
    ++realizations_;
    if (coded.load > uncoded.load) ++dominance_failures_;
    group_violations_ += coded.dominance_violations;
  }

  void tally_sweep(const SweepTable& t) {
    for (const auto& s : t.samples) {
      const LoadReport *cod = nullptr, *unc = nullptr;
      for (const auto& rep : s.reports) (rep.mode == "coded" ? cod : unc) = &rep;
      if (cod && unc) tally(*cod, *unc);
    }
  }

  unsigned threads_;
  std::optional<SweepTable> er_table_;
  std::size_t realizations_ = 0;
  std::size_t dominance_failures_ = 0;
  std::size_t group_violations_ = 0;
};

}  // namespace codedgraph
