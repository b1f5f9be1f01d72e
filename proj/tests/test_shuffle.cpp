#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include <codedgraph/generators.hpp>
#include <codedgraph/message_io.hpp>
#include <codedgraph/shuffle.hpp>

namespace cg = codedgraph;

namespace {

cg::Graph six_vertex_graph() {
  const std::vector<cg::Edge> edges{{1, 5}, {2, 6}, {3, 4}};
  return cg::Graph::from_edges(6, edges);
}

// Deterministic, bit-rich test value for v_{i,j}.
double value_of(const cg::RecordKey& k) { return 1.0 / (3.0 + double(k.reducer) * 7.0 + double(k.mapper) * 0.013); }

// Map outputs of worker k: every v_{i,j} with j in M_k.
cg::LocalValues local_values(const cg::Allocation& a, const cg::Graph& g, cg::WorkerId k) {
  cg::LocalValues local(a.vertex_count());
  for (cg::Vertex j : a.map_set(k)) {
    if (j > g.vertex_count()) continue;
    std::vector<double> aligned;
    for (cg::Vertex i : g.neighbors(j)) aligned.push_back(value_of({i, j}));
    local.put(j, std::move(aligned));
  }
  return local;
}

std::vector<cg::WorkerSet> groups_of(const cg::Allocation& a) {
  return cg::subsets_of_size(static_cast<cg::WorkerId>(a.workers()), *a.batch_load() + 1);
}

}  // namespace

TEST(ZSet, SixVertexInstance) {
  const cg::Graph g = six_vertex_graph();
  const cg::Allocation a = cg::er_allocate(6, 3, 2);
  const cg::WorkerSet s{1, 2, 3};
  EXPECT_EQ(cg::build_z_set(a, g, s, 3), (cg::ZSet{{5, 1}, {6, 2}}));
  EXPECT_EQ(cg::build_z_set(a, g, s, 1), (cg::ZSet{{1, 5}, {2, 6}}));
  EXPECT_EQ(cg::build_z_set(a, g, s, 2), (cg::ZSet{{4, 3}, {3, 4}}));
  EXPECT_EQ(cg::to_string(cg::RecordKey{5, 1}), "v_{5,1}");
}

TEST(ZSet, EmptyGraphGivesEmptySets) {
  const cg::Graph g = cg::gen_er(12, 0.0, 1);
  const cg::Allocation a = cg::er_allocate(12, 4, 2);
  for (const auto& s : groups_of(a))
    for (cg::WorkerId k : s.members()) EXPECT_TRUE(cg::build_z_set(a, g, s, k).empty());
}

TEST(ZSet, UnionOverGroupsIsExactlyWhatEachWorkerNeeds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const cg::Graph g = cg::gen_er(30, 0.3, seed);
    const cg::Allocation a = cg::er_allocate(30, 5, 2);
    for (cg::WorkerId k = 1; k <= 5; ++k) {
      // Oracle: brute force over all pairs.
      std::set<std::pair<cg::Vertex, cg::Vertex>> expected;
      for (cg::Vertex i = 1; i <= 30; ++i)
        for (cg::Vertex j = 1; j <= 30; ++j)
          if (g.has_edge(i, j) && a.owner(i) == k && !a.maps(k, j)) expected.insert({i, j});
      std::set<std::pair<cg::Vertex, cg::Vertex>> got;
      std::size_t total = 0;
      for (const auto& s : groups_of(a)) {
        if (!s.contains(k)) continue;
        for (const auto& key : cg::build_z_set(a, g, s, k)) {
          got.insert({key.reducer, key.mapper});
          ++total;
        }
      }
      EXPECT_EQ(got, expected);
      EXPECT_EQ(total, expected.size());  // Z-sets are disjoint
      EXPECT_EQ(cg::needed_records(a, g, k).size(), expected.size());
    }
  }
}

TEST(ZSet, ReceiverSideMatchesSenderSide) {
  const cg::Graph g = cg::gen_er(60, 0.2, 4);
  const cg::Allocation a = cg::er_allocate(60, 5, 3);
  for (const auto& s : groups_of(a))
    for (cg::WorkerId k : s.members()) EXPECT_EQ(cg::build_z_set(a, g, s, k), cg::receiver_z_set(a, g, s, k));
}

TEST(ZSet, RejectsWrongGroupSizeAndNonBatchAllocations) {
  const cg::Graph g = six_vertex_graph();
  const cg::Allocation a = cg::er_allocate(6, 3, 2);
  EXPECT_THROW(cg::build_z_set(a, g, cg::WorkerSet{1, 2}, 1), cg::UsageError);
  EXPECT_THROW(cg::build_z_set(a, g, cg::WorkerSet{1, 2, 3}, 4), cg::UsageError);
  const cg::Allocation uneven =
      cg::Allocation::from_sets(3, 6, {{1, 2, 3, 4, 5, 6}, {1}, {2}}, {{1, 2}, {3, 4}, {5, 6}});
  EXPECT_THROW(cg::build_z_set(uneven, g, cg::WorkerSet{1, 2}, 1), cg::UsageError);
}

TEST(Segments, SplitAndReassemble) {
  for (std::size_t r = 1; r <= 10; ++r) {
    unsigned total = 0;
    for (std::size_t t = 0; t < r; ++t) total += cg::segment_width(r, t);
    EXPECT_EQ(total, 64u);
    EXPECT_EQ(cg::max_segment_width(r), (64 + r - 1) / r);
    for (double x : {0.1, -3.75, 1e300, 0.0}) {
      std::uint64_t w = 0;
      for (std::size_t t = 0; t < r; ++t) w |= cg::place_segment(cg::extract_segment(cg::to_word(x), r, t), r, t);
      EXPECT_EQ(cg::from_word(w), x);
    }
  }
}

TEST(Encode, SixVertexPayloadIsXorOfSegments) {
  const cg::Graph g = six_vertex_graph();
  const cg::Allocation a = cg::er_allocate(6, 3, 2);
  const cg::WorkerSet s{1, 2, 3};
  const auto msgs = cg::encode_group(a, g, s, 1, local_values(a, g, 1));
  ASSERT_EQ(msgs.size(), 2u);
  // Sender 1: row 2 carries segment rank_of(1 in {1,3}) = 0, row 3 carries rank_of(1 in {1,2}) = 0.
  const auto seg = [](cg::RecordKey k, std::size_t t) { return cg::extract_segment(cg::to_word(value_of(k)), 2, t); };
  EXPECT_EQ(msgs[0].payload, seg({4, 3}, 0) ^ seg({5, 1}, 0));
  EXPECT_EQ(msgs[1].payload, seg({3, 4}, 0) ^ seg({6, 2}, 0));
  EXPECT_EQ(msgs[0].width, 32u);
  const auto from2 = cg::encode_group(a, g, s, 2, local_values(a, g, 2));
  EXPECT_EQ(from2[0].payload, seg({1, 5}, 0) ^ seg({5, 1}, 1));
}

TEST(Encode, LoadOneSendsWholeValues) {
  const cg::Graph g = cg::gen_er(12, 0.5, 2);
  const cg::Allocation a = cg::er_allocate(12, 3, 1);
  const cg::WorkerSet s{1, 2};
  const auto msgs = cg::encode_group(a, g, s, 1, local_values(a, g, 1));
  const auto z = cg::build_z_set(a, g, s, 2);
  ASSERT_EQ(msgs.size(), z.size());
  for (std::size_t c = 0; c < z.size(); ++c) EXPECT_EQ(msgs[c].payload, cg::to_word(value_of(z[c])));
}

TEST(Encode, SenderWithoutValuesFails) {
  const cg::Graph g = six_vertex_graph();
  const cg::Allocation a = cg::er_allocate(6, 3, 2);
  EXPECT_THROW(cg::encode_group(a, g, cg::WorkerSet{1, 2, 3}, 1, local_values(a, g, 3)), cg::ConsistencyError);
}

TEST(Decode, SixVertexReceiverRecoversItsSegment) {
  const cg::Graph g = six_vertex_graph();
  const cg::Allocation a = cg::er_allocate(6, 3, 2);
  const cg::WorkerSet s{1, 2, 3};
  const auto msgs = cg::encode_group(a, g, s, 1, local_values(a, g, 1));
  const auto got = cg::decode(3, s, 1, msgs, a, g, local_values(a, g, 3));
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].key, (cg::RecordKey{5, 1}));
  EXPECT_EQ(got[0].index, 0u);
  EXPECT_EQ(got[0].payload, cg::extract_segment(cg::to_word(value_of({5, 1})), 2, 0));
}

TEST(Decode, EveryNeededValueIsRecoveredBitExactly) {
  for (std::size_t r : {1u, 2u, 3u}) {
    const cg::Graph g = cg::gen_er(40, 0.25, 10 + r);
    const cg::Allocation a = cg::er_allocate(40, 5, r);
    std::vector<cg::LocalValues> local;
    for (cg::WorkerId k = 1; k <= 5; ++k) local.push_back(local_values(a, g, k));
    for (cg::WorkerId k = 1; k <= 5; ++k) {
      std::map<std::pair<cg::Vertex, cg::Vertex>, std::pair<std::uint64_t, std::size_t>> acc;
      for (const auto& s : groups_of(a)) {
        if (!s.contains(k)) continue;
        for (cg::WorkerId sender : s.without(k).members()) {
          const auto msgs = cg::encode_group(a, g, s, sender, local[sender - 1]);
          EXPECT_EQ(msgs.size(), cg::GroupTable::build(a, g, s, sender).width());
          for (const auto& seg : cg::decode(k, s, sender, msgs, a, g, local[k - 1])) {
            auto& slot = acc[{seg.key.reducer, seg.key.mapper}];
            slot.first |= cg::place_segment(seg.payload, r, seg.index);
            ++slot.second;
          }
        }
      }
      const auto needed = cg::needed_records(a, g, k);
      EXPECT_EQ(acc.size(), needed.size());
      for (const auto& key : needed) {
        const auto& slot = acc.at({key.reducer, key.mapper});
        EXPECT_EQ(slot.second, r);
        EXPECT_EQ(cg::from_word(slot.first), value_of(key));
      }
    }
  }
}

TEST(Decode, MissingMessagesRaiseDecodeError) {
  const cg::Graph g = six_vertex_graph();
  const cg::Allocation a = cg::er_allocate(6, 3, 2);
  const cg::WorkerSet s{1, 2, 3};
  auto msgs = cg::encode_group(a, g, s, 1, local_values(a, g, 1));
  msgs.pop_back();
  try {
    cg::decode(3, s, 1, msgs, a, g, local_values(a, g, 3));
    FAIL() << "expected DecodeError";
  } catch (const cg::DecodeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("{1,2,3}"), std::string::npos);
    EXPECT_NE(what.find("sender 1"), std::string::npos);
    EXPECT_NE(what.find("column 2"), std::string::npos);
  }
}

TEST(Decode, ReceiverMissingSideInformationFails) {
  const cg::Graph g = six_vertex_graph();
  const cg::Allocation a = cg::er_allocate(6, 3, 2);
  const cg::WorkerSet s{1, 2, 3};
  const auto msgs = cg::encode_group(a, g, s, 1, local_values(a, g, 1));
  EXPECT_THROW(cg::decode(3, s, 1, msgs, a, g, cg::LocalValues(6)), cg::DecodeError);
}

TEST(Uncoded, SixVertexInstanceSendsSixRecords) {
  const cg::Graph g = six_vertex_graph();
  const auto plan = cg::uncoded_plan(cg::er_allocate(6, 3, 2), g);
  ASSERT_EQ(plan.size(), 6u);
  for (const auto& u : plan) EXPECT_NE(u.source, u.destination);
  EXPECT_EQ(plan.front().destination, 1u);
  EXPECT_EQ(plan.front().source, 2u);  // v_{1,5}: vertex 5 mapped by {2,3}
}

TEST(Uncoded, FullLoadSendsNothing) {
  const cg::Graph g = cg::gen_er(12, 0.5, 1);
  EXPECT_TRUE(cg::uncoded_plan(cg::er_allocate(12, 3, 3), g).empty());
}

TEST(Plans, RbAdmitsOnlyGroupsInsideOneServerSet) {
  const cg::RbAllocation rb = cg::rb_allocate(30, 30, 6, 2);
  const cg::ShufflePlan p = cg::rb_plan(rb.plan);
  EXPECT_TRUE(p.admits(cg::WorkerSet{1, 2, 3}));
  EXPECT_TRUE(p.admits(cg::WorkerSet{4, 5, 6}));
  EXPECT_FALSE(p.admits(cg::WorkerSet{1, 2, 4}));
  EXPECT_EQ(p.coded_components().size(), 3u);
  for (cg::Vertex i = 1; i <= 60; ++i)
    EXPECT_EQ(p.component_of({i, 1}), static_cast<std::size_t>(rb.plan.phase(i) - 1));
}

TEST(Plans, SbmSplitsIntraAndCross) {
  const cg::ShufflePlan p = cg::sbm_plan(10);
  EXPECT_EQ(p.component_of({1, 2}), 0u);
  EXPECT_EQ(p.component_of({11, 12}), 1u);
  EXPECT_EQ(p.component_of({1, 12}), 2u);
  EXPECT_EQ(p.component_of({12, 1}), 2u);
  EXPECT_TRUE(p.admits(cg::WorkerSet{1, 5, 6}));
  EXPECT_EQ(p.coded_components(), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(p.uncoded_component({1, 2}), 3u);
  const cg::ShufflePlan er = cg::er_plan();
  EXPECT_EQ(er.uncoded_component({1, 2}), 0u);
}

TEST(Plans, FilteredZSetsPartitionTheUnfilteredOne) {
  const cg::Graph g = cg::gen_sbm(24, 16, 0.4, 0.1, 3);
  const cg::Allocation a = cg::sbm_allocate(24, 16, 4, 2);
  const cg::ShufflePlan p = cg::sbm_plan(24);
  for (const auto& s : groups_of(a))
    for (cg::WorkerId k : s.members()) {
      std::size_t sum = 0;
      for (std::size_t c : p.coded_components()) {
        const auto z = cg::build_z_set(a, g, s, k, [&](const cg::RecordKey& key) { return p.component_of(key) == c; });
        for (const auto& key : z) EXPECT_EQ(p.component_of(key), c);
        sum += z.size();
      }
      EXPECT_EQ(sum, cg::build_z_set(a, g, s, k).size());
    }
}

TEST(MessageIo, RoundTripAndSize) {
  const cg::Graph g = six_vertex_graph();
  const cg::Allocation a = cg::er_allocate(6, 3, 2);
  std::vector<cg::CodedMessage> all;
  for (cg::WorkerId s = 1; s <= 3; ++s) {
    auto m = cg::encode_group(a, g, cg::WorkerSet{1, 2, 3}, s, local_values(a, g, s));
    all.insert(all.end(), m.begin(), m.end());
  }
  std::stringstream buf;
  cg::write_messages(buf, all, 2);
  EXPECT_EQ(buf.str().size(), all.size() * (4 + 2 + 4 + 4));
  EXPECT_EQ(cg::read_messages(buf, 2), all);

  std::stringstream cut(buf.str().substr(0, 20));
  EXPECT_THROW(cg::read_messages(cut, 2), cg::ParseError);
  EXPECT_EQ(cg::payload_bytes(1), 8u);
  EXPECT_EQ(cg::payload_bytes(3), 3u);
}
