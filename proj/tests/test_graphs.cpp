#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <codedgraph/generators.hpp>
#include <codedgraph/graph.hpp>

namespace cg = codedgraph;

namespace {

struct Moments {
  double mean = 0.0;
  double sd_of_mean = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= double(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / double(xs.size() - 1) / double(xs.size()))};
}

std::pair<std::size_t, std::size_t> intra_cross(const cg::Graph& g, cg::Vertex n1) {
  std::size_t intra = 0, cross = 0;
  for (const auto& e : g.edges()) ((e.u <= n1) == (e.v <= n1) ? intra : cross)++;
  return {intra, cross};
}

}  // namespace

TEST(Graph, FromEdgesIsSymmetricSortedAndDeduplicated) {
  const std::vector<cg::Edge> edges{{3, 1}, {1, 2}, {2, 1}, {3, 2}};
  const cg::Graph g = cg::Graph::from_edges(4, edges);
  EXPECT_EQ(g.vertex_count(), 4u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_EQ(std::vector<cg::Vertex>(g.neighbors(1).begin(), g.neighbors(1).end()), (std::vector<cg::Vertex>{2, 3}));
  EXPECT_EQ(g.degree(4), 0u);
  EXPECT_FALSE(g.check_invariants(false).has_value());
}

TEST(Graph, ConflictingDuplicateWeightsAreRejected) {
  const std::vector<cg::Edge> edges{{1, 2, 0.5}, {2, 1, 0.25}};
  EXPECT_THROW(cg::Graph::from_edges(2, edges, true), cg::ParameterError);
}

TEST(Graph, PaddingAppendsIsolatedVertices) {
  const std::vector<cg::Edge> edges{{1, 2}};
  const cg::Graph g = cg::Graph::from_edges(2, edges).padded(5);
  EXPECT_EQ(g.vertex_count(), 5u);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.degree(5), 0u);
}

TEST(GenEr, FullProbabilityGivesCompleteGraph) {
  const cg::Graph g = cg::gen_er(4, 1.0, 99);
  EXPECT_EQ(g.edge_count(), 6u);
}

TEST(GenEr, ZeroProbabilityGivesEmptyGraph) { EXPECT_EQ(cg::gen_er(100, 0.0, 5).edge_count(), 0u); }

TEST(GenEr, InvalidProbabilityThrows) {
  EXPECT_THROW(cg::gen_er(10, 1.5, 1), cg::ParameterError);
  EXPECT_THROW(cg::gen_er(10, -0.1, 1), cg::ParameterError);
  EXPECT_THROW(cg::gen_er(0, 0.5, 1), cg::ParameterError);
}

TEST(GenEr, MeanEdgeCountMatchesBinomial) {
  std::vector<double> counts;
  for (std::uint64_t s = 0; s < 200; ++s) counts.push_back(double(cg::gen_er(300, 0.1, s).edge_count()));
  const double mean = 300.0 * 299.0 / 2.0 * 0.1;  // 4485
  const double sigma = std::sqrt(mean * 0.9);
  const Moments m = moments(counts);
  EXPECT_NEAR(m.mean, mean, 3.0 * sigma / std::sqrt(200.0));
}

TEST(GenEr, DeterministicAndThreadIndependent) {
  const cg::Graph a = cg::gen_er(200, 0.2, 17, {cg::WeightMode::kUniform, 1});
  const cg::Graph b = cg::gen_er(200, 0.2, 17, {cg::WeightMode::kUniform, 4});
  const cg::Graph c = cg::gen_er(200, 0.2, 18, {cg::WeightMode::kUniform, 1});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_FALSE(a.check_invariants(false).has_value());
}

TEST(GenEr, UniformWeightsLieInUnitInterval) {
  const cg::Graph g = cg::gen_er(80, 0.3, 3, {cg::WeightMode::kUniform, 1});
  ASSERT_TRUE(g.weighted());
  for (const auto& e : g.edges()) {
    EXPECT_GT(e.weight, 0.0);
    EXPECT_LE(e.weight, 1.0);
  }
}

TEST(GenRb, FullProbabilityGivesCompleteBipartite) {
  const cg::Graph g = cg::gen_rb(2, 2, 1.0, 1);
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_EQ(intra_cross(g, 2).first, 0u);
}

TEST(GenRb, EveryEdgeCrossesTheClusters) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const cg::Graph g = cg::gen_rb(30, 20, 0.3, s);
    for (const auto& e : g.edges()) EXPECT_NE(e.u <= 30, e.v <= 30);
  }
}

TEST(GenRb, MeanEdgeCountMatchesBinomial) {
  std::vector<double> counts;
  for (std::uint64_t s = 0; s < 200; ++s) counts.push_back(double(cg::gen_rb(150, 150, 0.1, s).edge_count()));
  const double mean = 150.0 * 150.0 * 0.1;
  const Moments m = moments(counts);
  EXPECT_NEAR(m.mean, mean, 3.0 * std::sqrt(mean * 0.9) / std::sqrt(200.0));
}

TEST(GenSbm, NoCrossEdgesGivesDisjointCliques) {
  const cg::Graph g = cg::gen_sbm(3, 3, 1.0, 0.0, 4);
  EXPECT_EQ(g.edge_count(), 6u);
  EXPECT_EQ(intra_cross(g, 3).second, 0u);
}

TEST(GenSbm, RequiresQBelowP) {
  EXPECT_THROW(cg::gen_sbm(5, 5, 0.2, 0.2, 1), cg::ParameterError);
  EXPECT_THROW(cg::gen_sbm(5, 5, 0.2, 0.3, 1), cg::ParameterError);
}

TEST(GenSbm, IntraAndCrossCountsMatchBinomials) {
  std::vector<double> intra, cross;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const cg::Graph g = cg::gen_sbm(60, 40, 0.3, 0.05, s);
    EXPECT_FALSE(g.check_invariants(false).has_value());
    const auto [a, b] = intra_cross(g, 60);
    intra.push_back(double(a));
    cross.push_back(double(b));
  }
  const double mi = 0.3 * (60.0 * 59.0 / 2.0 + 40.0 * 39.0 / 2.0);
  const double mc = 0.05 * 60.0 * 40.0;
  EXPECT_NEAR(moments(intra).mean, mi, 3.0 * std::sqrt(mi * 0.7) / std::sqrt(200.0));
  EXPECT_NEAR(moments(cross).mean, mc, 3.0 * std::sqrt(mc * 0.95) / std::sqrt(200.0));
}

TEST(GenPl, DrawnDegreeMeanApproachesTruncatedSeries) {
  const std::size_t n = 1000;
  const double gamma = 2.5;
  long double num = 0.0L, den = 0.0L;
  for (std::size_t d = 1; d <= n; ++d) {
    num += std::pow(static_cast<long double>(d), 1.0L - gamma);
    den += std::pow(static_cast<long double>(d), -static_cast<long double>(gamma));
  }
  const double expected = static_cast<double>(num / den);
  std::vector<double> means;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto d = cg::draw_pl_degrees(n, gamma, s);
    double m = 0.0;
    for (double x : d) m += x;
    means.push_back(m / double(n));
  }
  const Moments m = moments(means);
  EXPECT_NEAR(m.mean, expected, 4.0 * m.sd_of_mean);
  EXPECT_NEAR(cg::PowerLawDegrees(n, gamma).mean(), expected, 1e-10 * expected);  // double vs long double sums
}

TEST(GenPl, SmallRhoNeverClamps) {
  const std::size_t n = 400;
  const cg::Graph g = cg::gen_pl(n, 2.5, 1.0 / double(n * n), 8);
  EXPECT_EQ(g.metadata().clamped_pairs, 0u);
}

TEST(GenPl, LargeRhoClampsAndIsReported) {
  const cg::Graph g = cg::gen_pl(200, 2.2, 0.9, 8);
  EXPECT_GT(g.metadata().clamped_pairs, 0u);
}

TEST(GenPl, OutputSatisfiesInvariants) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const cg::Graph g = cg::gen_pl(500, 2.5, std::nullopt, s);
    EXPECT_FALSE(g.check_invariants(false).has_value());
    EXPECT_EQ(g.metadata().model, "pl");
  }
}

TEST(GenPl, RejectsInvalidParameters) {
  EXPECT_THROW(cg::gen_pl(100, 2.0, std::nullopt, 1), cg::ParameterError);
  EXPECT_THROW(cg::gen_pl(100, 2.5, -1.0, 1), cg::ParameterError);
}

TEST(EdgeList, FixtureLoadsAsSixVerticesThreeEdges) {
  const cg::Graph g = cg::load_edgelist(std::string(FIXTURE_DIR) + "/six_vertex.txt");
  EXPECT_EQ(g.vertex_count(), 6u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_TRUE(g.has_edge(5, 1));
  EXPECT_TRUE(g.has_edge(2, 6));
  EXPECT_TRUE(g.has_edge(4, 3));
}

TEST(EdgeList, HeaderOnlyGivesIsolatedVertices) {
  std::istringstream in("n=4\n");
  const cg::Graph g = cg::load_edgelist(in);
  EXPECT_EQ(g.vertex_count(), 4u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(EdgeList, RoundTripPreservesGraphAndMetadata) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const cg::Graph g = cg::gen_sbm(30, 20, 0.4, 0.1, s, {cg::WeightMode::kUniform, 1});
    std::stringstream buf;
    cg::save_edgelist(g, buf);
    const cg::Graph h = cg::load_edgelist(buf);
    EXPECT_EQ(g, h);
    EXPECT_EQ(h.metadata().model, "sbm");
    EXPECT_EQ(h.metadata().first_cluster(), std::optional<std::size_t>(30));
  }
}

TEST(EdgeList, CommentsAndSelfLoopsAreAccepted) {
  std::istringstream in("# a comment\nn=3\n1 1\n1 2\n");
  const cg::Graph g = cg::load_edgelist(in);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(g.has_edge(1, 1));
}

TEST(EdgeList, ErrorsCarryLineNumbers) {
  const auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      cg::load_edgelist(in);
    } catch (const cg::ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("n=3\n1 2\n1 x\n"), 3u);
  EXPECT_EQ(line_of("n=3\n1 4\n"), 2u);
  EXPECT_EQ(line_of("1 0\n"), 1u);
  EXPECT_EQ(line_of("n=3\n1 2 0.5\n2 3 1\n2 1 0.75\n"), 4u);
  EXPECT_EQ(line_of("n=3\n1 2 0.5\n2 3\n"), 3u);
  EXPECT_EQ(line_of("n=3\n1 2 -1\n"), 2u);
  EXPECT_EQ(line_of("n=3\n1 2 3 4\n"), 2u);
  EXPECT_EQ(line_of("1 2\nn=3\n"), 2u);
}
