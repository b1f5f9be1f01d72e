// Command-line front end: generate, run, sweep, bounds, verify.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <codedgraph/codedgraph.hpp>

namespace cg = codedgraph;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct ModelFlags {
  std::string model = "er";
  std::size_t n = 0, n1 = 0, n2 = 0;
  std::optional<double> p, q, rho;
  double gamma = 2.5;

  void add(CLI::App* app) {
    app->add_option("--model", model, "er | rb | sbm | pl")->check(CLI::IsMember({"er", "rb", "sbm", "pl"}));
    app->add_option("--n", n, "vertex count (er, pl)");
    app->add_option("--n1", n1, "first cluster size (rb, sbm)");
    app->add_option("--n2", n2, "second cluster size (rb, sbm)");
    app->add_option("--p", p, "edge probability (er) or intra-cluster probability (sbm)");
    app->add_option("--q", q, "cross-cluster probability (rb, sbm)");
    app->add_option("--gamma", gamma, "power-law exponent (pl)");
    app->add_option("--rho", rho, "power-law scale (pl); default 1/sum of degrees");
  }

  static double need(const std::optional<double>& v, const char* flag) {
    if (!v) throw cg::ParameterError(std::string("missing ") + flag);
    return *v;
  }

  cg::ModelParams params() const {
    if (model == "er") {
      if (!n) throw cg::ParameterError("missing --n");
      return cg::ErParams{n, need(p, "--p")};
    }
    if (model == "pl") {
      if (!n) throw cg::ParameterError("missing --n");
      return cg::PlParams{n, gamma, rho};
    }
    if (!n1 || !n2) throw cg::ParameterError("missing --n1/--n2");
    if (model == "rb") return cg::RbParams{n1, n2, need(q, "--q")};
    return cg::SbmParams{n1, n2, need(p, "--p"), need(q, "--q")};
  }
};

/// "3", "1..4" or "1,2,5".
std::vector<std::size_t> parse_r_values(const std::string& text) {
  std::vector<std::size_t> out;
  const auto num = [&](const std::string& s) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) throw cg::ParameterError("bad r value '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const std::size_t a = num(text.substr(0, dots)), b = num(text.substr(dots + 2));
    if (a > b) throw cg::ParameterError("empty r range '" + text + "'");
    for (std::size_t r = a; r <= b; ++r) out.push_back(r);
    return out;
  }
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(num(item));
  return out;
}

cg::SbmLayout parse_layout(const std::string& s) {
  return s == "two-cluster" ? cg::SbmLayout::kTwoCluster : cg::SbmLayout::kInterleaved;
}

std::size_t cluster_split(const cg::Graph& g, std::size_t flag) {
  if (flag) return flag;
  if (auto n1 = g.metadata().first_cluster()) return *n1;
  throw cg::ParameterError("two-cluster plans need --n1 or a graph file with n1 metadata");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded shuffling for distributed graph analytics"};
  app.require_subcommand(1);
  unsigned threads = cg::default_threads();
  app.add_option("--threads", threads, "worker threads (default: CODEDGRAPH_THREADS or hardware)")->check(CLI::PositiveNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "sample a random graph and write it as an edge list");
  ModelFlags gen_model;
  gen_model.add(gen);
  std::uint64_t gen_seed = 1;
  std::string gen_out, gen_weights = "unit";
  gen->add_option("--seed", gen_seed, "PRNG seed");
  gen->add_option("--out", gen_out, "output path")->required();
  gen->add_option("--weights", gen_weights, "unit | uniform")->check(CLI::IsMember({"unit", "uniform"}));

  // run
  auto* run = app.add_subcommand("run", "execute a job on K logical workers and report the shuffle load");
  std::string run_graph, run_program = "pagerank", run_mode = "coded", run_plan = "er", run_layout = "interleaved";
  std::string run_alloc_in, run_alloc_out, run_dump, run_outputs;
  std::size_t run_k = 0, run_r = 0, run_iters = 1, run_n1 = 0;
  std::uint64_t run_bits = 64;
  double damping = 0.15;
  std::optional<double> tolerance;
  cg::Vertex source = 1;
  bool run_json = false;
  run->add_option("--graph", run_graph, "edge-list file")->required();
  run->add_option("--program", run_program, "pagerank | sssp")->check(CLI::IsMember({"pagerank", "sssp"}));
  run->add_option("--damping", damping, "PageRank d");
  run->add_option("--source", source, "SSSP source vertex");
  run->add_option("--k", run_k, "worker count K");
  run->add_option("--r", run_r, "computation load r");
  run->add_option("--mode", run_mode, "coded | uncoded")->check(CLI::IsMember({"coded", "uncoded"}));
  run->add_option("--iters", run_iters, "maximum iterations")->check(CLI::PositiveNumber);
  run->add_option("--tolerance", tolerance, "stop once no state moves by more than this");
  run->add_option("--plan", run_plan, "er | rb | sbm")->check(CLI::IsMember({"er", "rb", "sbm"}));
  run->add_option("--n1", run_n1, "first cluster size for rb/sbm plans (default: graph metadata)");
  run->add_option("--sbm-layout", run_layout, "interleaved | two-cluster")
      ->check(CLI::IsMember({"interleaved", "two-cluster"}));
  run->add_option("--allocation", run_alloc_in, "load the allocation from JSON instead of building one");
  run->add_option("--save-allocation", run_alloc_out, "write the allocation as JSON");
  run->add_option("--dump-messages", run_dump, "write coded messages of the first iteration (binary)");
  run->add_option("--outputs", run_outputs, "write final vertex states, one 'vertex value' line each");
  run->add_option("--T", run_bits, "intermediate value width in bits for accounting")->check(CLI::PositiveNumber);
  run->add_flag("--json", run_json, "print the full report as JSON");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "mean normalized loads over seeds, both modes, as CSV");
  ModelFlags sweep_model;
  sweep_model.add(sweep);
  std::size_t sweep_k = 0, sweep_seeds = 1;
  std::uint64_t sweep_seed = 1;
  std::string sweep_r = "1", sweep_out, sweep_layout = "interleaved";
  sweep->add_option("--k", sweep_k, "worker count K")->required();
  sweep->add_option("--r", sweep_r, "r values: 3, 1..4 or 1,2,5");
  sweep->add_option("--seeds", sweep_seeds, "number of graphs per r")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_seed, "first seed");
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");
  sweep->add_option("--sbm-layout", sweep_layout, "interleaved | two-cluster")
      ->check(CLI::IsMember({"interleaved", "two-cluster"}));

  // bounds
  auto* bounds = app.add_subcommand("bounds", "closed-form loads for a model, or r* from phase times");
  ModelFlags bounds_model;
  bounds_model.add(bounds);
  std::size_t bounds_k = 0;
  std::string bounds_r = "1";
  std::optional<double> t_map, t_shuffle;
  bounds->add_option("--k", bounds_k, "worker count K");
  bounds->add_option("--r", bounds_r, "r values: 3, 1..4 or 1,2,5");
  bounds->add_option("--t-map", t_map, "Map phase time for r*");
  bounds->add_option("--t-shuffle", t_shuffle, "Shuffle phase time for r*");

  // verify
  auto* verify = app.add_subcommand("verify", "run the acceptance checks; nonzero exit on failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      cg::GenerateOptions opts{gen_weights == "uniform" ? cg::WeightMode::kUniform : cg::WeightMode::kUnit, threads};
      const cg::Graph g = cg::generate(gen_model.params(), gen_seed, opts);
      cg::save_edgelist(g, gen_out);
      std::cout << "wrote " << gen_out << ": model=" << gen_model.model << " n=" << g.vertex_count()
                << " edges=" << g.edge_count();
      if (gen_model.model == "pl") std::cout << " clamped=" << g.metadata().clamped_pairs;
      std::cout << '\n';
      return 0;
    }

    if (*run) {
      const cg::Graph g = cg::load_edgelist(run_graph);
      const std::size_t n = g.vertex_count();
      cg::JobConfig cfg;
      cfg.mode = cg::parse_mode(run_mode);
      cfg.iterations = run_iters;
      cfg.tolerance = tolerance;
      cfg.value_bits = run_bits;
      cfg.threads = threads;
      cfg.capture_messages = !run_dump.empty();

      std::optional<cg::Allocation> alloc;
      if (!run_alloc_in.empty()) {
        std::ifstream in(run_alloc_in);
        if (!in) throw cg::ParameterError("cannot open " + run_alloc_in);
        alloc = cg::allocation_from_json(nlohmann::json::parse(in));
        if (run_plan != "er") throw cg::ParameterError("--allocation works with --plan er only");
      } else {
        if (!run_k || !run_r) throw cg::ParameterError("--k and --r are required unless --allocation is given");
        if (run_plan == "er") {
          alloc = cg::er_allocate(n, run_k, run_r);
        } else {
          const std::size_t n1 = cluster_split(g, run_n1);
          if (n1 >= n) throw cg::ParameterError("--n1 must be smaller than the vertex count");
          if (run_plan == "rb") {
            auto rb = cg::rb_allocate(n1, n - n1, run_k, run_r);
            alloc = std::move(rb.allocation);
            cfg.plan = cg::rb_plan(rb.plan);
          } else if (parse_layout(run_layout) == cg::SbmLayout::kTwoCluster) {
            auto rb = cg::rb_allocate(n1, n - n1, run_k, run_r);
            alloc = std::move(rb.allocation);
            cfg.plan = cg::sbm_plan(n1, rb.plan);
          } else {
            alloc = cg::sbm_allocate(n1, n - n1, run_k, run_r);
            cfg.plan = cg::sbm_plan(n1);
          }
        }
      }
      if (!run_alloc_out.empty()) {
        std::ofstream out(run_alloc_out);
        out << cg::to_json(*alloc).dump(2) << '\n';
      }

      cg::IterationsResult res;
      if (run_program == "pagerank") res = cg::run_iterations(g, *alloc, cg::PageRank(damping), cfg);
      else res = cg::run_iterations(g, *alloc, cg::ShortestPath(source), cfg);

      if (!run_dump.empty()) {
        cfg.iterations = 1;
        cg::JobResult first = run_program == "pagerank" ? cg::run_job(g, *alloc, cg::PageRank(damping), cfg)
                                                        : cg::run_job(g, *alloc, cg::ShortestPath(source), cfg);
        std::ofstream out(run_dump, std::ios::binary);
        cg::write_messages(out, first.messages, alloc->batch_load().value_or(1));
      }
      if (!run_outputs.empty()) {
        std::ofstream out(run_outputs);
        out << std::setprecision(17);
        for (std::size_t v = 0; v < res.state.size(); ++v) out << v + 1 << ' ' << res.state[v] << '\n';
      }

      const cg::LoadReport& last = res.reports.back();
      if (run_json) {
        nlohmann::json j;
        j["program"] = run_program;
        j["iterations"] = res.reports.size();
        j["converged"] = res.converged;
        j["padding"] = {{"n", n}, {"n_padded", alloc->vertex_count()}};
        auto& reps = j["reports"] = nlohmann::json::array();
        for (const auto& rep : res.reports) reps.push_back(cg::to_json(rep));
        j["outputs"] = res.state;
        std::cout << j.dump(2) << '\n';
        return 0;
      }
      std::cout << cg::format_load(last) << '\n';
      std::cout << std::setprecision(6) << "L (decimal) = " << last.load_value() << '\n';
      std::cout << "mode=" << last.mode << " plan=" << last.plan << " K=" << last.workers
                << " r=" << cg::to_string(last.computation_load) << " n=" << n;
      if (alloc->vertex_count() != n) std::cout << " (padded to " << alloc->vertex_count() << ")";
      std::cout << '\n';
      std::cout << "messages=" << last.coded_messages << " unicasts=" << last.unicasts
                << " decode_ops=" << last.decode_ops << " map_evaluations=" << last.map_evaluations << '\n';
      if (last.components.size() > 1)
        for (const auto& c : last.components)
          std::cout << "component " << c.name << ": L = " << cg::to_string(c.load) << '\n';
      std::cout << "iterations=" << res.reports.size() << (res.converged ? " (converged)" : "")
                << " feedback_bits_per_iteration=" << cg::to_string(last.feedback_bits) << '\n';
      return 0;
    }

    if (*sweep) {
      cg::SweepConfig cfg;
      cfg.model = sweep_model.params();
      cfg.workers = sweep_k;
      cfg.r_values = parse_r_values(sweep_r);
      cfg.seeds = sweep_seeds;
      cfg.base_seed = sweep_seed;
      cfg.sbm_layout = parse_layout(sweep_layout);
      cfg.threads = threads;
      const auto table = cg::measure_sweep(cfg);
      if (sweep_out.empty()) {
        cg::write_csv(table, std::cout);
      } else {
        std::ofstream out(sweep_out);
        cg::write_csv(table, out);
      }
      return 0;
    }

    if (*bounds) {
      std::cout << std::setprecision(6);
      if (t_map || t_shuffle) {
        if (!t_map || !t_shuffle) throw cg::ParameterError("r* needs both --t-map and --t-shuffle");
        std::cout << "r* = " << cg::r_star(*t_map, *t_shuffle) << '\n';
        return 0;
      }
      if (!bounds_k) throw cg::ParameterError("missing --k");
      for (std::size_t r : parse_r_values(bounds_r)) {
        std::cout << "model=" << bounds_model.model << " K=" << bounds_k << " r=" << r;
        if (bounds_model.model == "pl") {
          const cg::BoundSet b = cg::pl_bound(bounds_model.gamma, bounds_k, r);
          std::cout << " n*L: uncoded=" << b.uncoded << " upper=" << b.coded_upper << '\n';
          continue;
        }
        const cg::BoundSet b = bounds_model.model == "rb"
                                   ? cg::rb_bounds(ModelFlags::need(bounds_model.q, "--q"), bounds_k, r)
                                   : cg::model_bounds(bounds_model.params(), bounds_k, r);
        std::cout << " uncoded=" << b.uncoded << " upper=" << b.coded_upper;
        if (b.lower) std::cout << " lower=" << *b.lower;
        std::cout << '\n';
      }
      return 0;
    }

    if (*verify) {
      cg::Acceptance acceptance(threads);
      bool ok = true;
      for (const auto& c : acceptance.run_all(&std::cout)) ok = ok && c.pass;
      std::cout << (ok ? "all criteria passed" : "some criteria FAILED") << '\n';
      return ok ? 0 : 1;
    }
  } catch (const cg::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cg::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
