#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "allocation.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "worker_set.hpp"

namespace codedgraph {

/// Key (i, j) of the intermediate value v_{i,j}: Reducer i needs it, Mapper j produces it.
struct RecordKey {
  Vertex reducer = 0;
  Vertex mapper = 0;

  friend bool operator==(const RecordKey&, const RecordKey&) = default;
  /// Canonical order: ascending mapper, then reducer.
  friend std::strong_ordering operator<=>(const RecordKey& a, const RecordKey& b) {
    if (auto c = a.mapper <=> b.mapper; c != 0) return c;
    return a.reducer <=> b.reducer;
  }
};

inline std::string to_string(const RecordKey& k) {
  return "v_{" + std::to_string(k.reducer) + "," + std::to_string(k.mapper) + "}";
}

/// Records of one Z-set in canonical order.
using ZSet = std::vector<RecordKey>;

/// Restricts a shuffle to a subset of records (one component of a composed plan).
using RecordFilter = std::function<bool(const RecordKey&)>;

// ---------------------------------------------------------------------------
// Segments: a 64-bit value split into r contiguous bit ranges, sizes differing by at most one.

inline constexpr unsigned kWordBits = 64;

inline unsigned segment_offset(std::size_t r, std::size_t t) {
  const std::size_t base = kWordBits / r, extra = kWordBits % r;
  return static_cast<unsigned>(t * base + std::min(t, extra));
}

inline unsigned segment_width(std::size_t r, std::size_t t) {
  return static_cast<unsigned>(kWordBits / r + (t < kWordBits % r ? 1 : 0));
}

/// Widest segment, ceil(64 / r).
inline unsigned max_segment_width(std::size_t r) { return segment_width(r, 0); }

inline std::uint64_t width_mask(unsigned w) { return w >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << w) - 1; }

/// Segment t (zero-based) of `word`, right-aligned.
inline std::uint64_t extract_segment(std::uint64_t word, std::size_t r, std::size_t t) {
  const unsigned off = segment_offset(r, t);
  return off >= 64 ? 0 : (word >> off) & width_mask(segment_width(r, t));
}

/// Inverse of extract_segment: shifts a right-aligned segment back into place.
inline std::uint64_t place_segment(std::uint64_t segment, std::size_t r, std::size_t t) {
  const unsigned off = segment_offset(r, t);
  return off >= 64 ? 0 : (segment & width_mask(segment_width(r, t))) << off;
}

inline std::uint64_t to_word(double x) { return std::bit_cast<std::uint64_t>(x); }
inline double from_word(std::uint64_t w) { return std::bit_cast<double>(w); }

// ---------------------------------------------------------------------------
// Map outputs held by one worker.

/// Intermediate values v_{i,j} computed by one worker, stored per Mapper j
/// aligned with N(j).
class LocalValues {
 public:
  LocalValues() = default;
  explicit LocalValues(std::size_t n) : values_(n), present_(n, false) {}

  void put(Vertex j, std::vector<double> aligned) {
    values_.at(j - 1) = std::move(aligned);
    present_[j - 1] = true;
  }

  bool has_mapper(Vertex j) const { return j >= 1 && j <= present_.size() && present_[j - 1]; }

  std::optional<double> get(const Graph& g, const RecordKey& key) const {
    if (!has_mapper(key.mapper)) return std::nullopt;
    const auto nb = g.neighbors(key.mapper);
    auto it = std::lower_bound(nb.begin(), nb.end(), key.reducer);
    if (it == nb.end() || *it != key.reducer) return std::nullopt;
    return values_[key.mapper - 1][static_cast<std::size_t>(it - nb.begin())];
  }

 private:
  std::vector<std::vector<double>> values_;
  std::vector<bool> present_;
};

// ---------------------------------------------------------------------------
// Z-sets.

namespace detail {

inline std::size_t check_group(const Allocation& a, const Graph& g, WorkerSet group, WorkerId k) {
  const auto r = a.batch_load();
  if (!r) throw UsageError("coded shuffle needs a batch allocation (every vertex mapped by exactly r workers)");
  if (group.size() != *r + 1)
    throw UsageError("group " + group.to_string() + " has size " + std::to_string(group.size()) + ", expected r+1 = " +
                     std::to_string(*r + 1));
  if (!group.contains(k)) throw UsageError("worker " + std::to_string(k) + " not in group " + group.to_string());
  if (g.vertex_count() > a.vertex_count()) throw UsageError("graph has more vertices than the allocation");
  return *r;
}

}  // namespace detail

/// Z^k_{S\{k}}: edges (i, j) with i reduced at k and j mapped exactly by
/// S\{k}, in canonical order. Scans from the Mapper side, as the other
/// members of S would.
inline ZSet build_z_set(const Allocation& a, const Graph& g, WorkerSet group, WorkerId k,
                        const RecordFilter& filter = {}) {
  detail::check_group(a, g, group, k);
  ZSet z;
  for (Vertex j : a.batch(group.without(k))) {
    if (j > g.vertex_count()) break;
    for (Vertex i : g.neighbors(j)) {
      const RecordKey key{i, j};
      if (a.owner(i) == k && (!filter || filter(key))) z.push_back(key);
    }
  }
  return z;
}

/// The same set as build_z_set, found from the Reducer side: what worker k
/// can derive from its own Reduce assignment without mapping the batch.
inline ZSet receiver_z_set(const Allocation& a, const Graph& g, WorkerSet group, WorkerId k,
                           const RecordFilter& filter = {}) {
  detail::check_group(a, g, group, k);
  const WorkerSet batch = group.without(k);
  ZSet z;
  for (Vertex i : a.reduce_set(k)) {
    if (i > g.vertex_count()) continue;
    for (Vertex j : g.neighbors(i)) {
      const RecordKey key{i, j};
      if (a.mask(j) == batch && (!filter || filter(key))) z.push_back(key);
    }
  }
  std::sort(z.begin(), z.end());
  return z;
}

/// Records worker k must receive: i in R_k, j in N(i), j not in M_k.
inline std::vector<RecordKey> needed_records(const Allocation& a, const Graph& g, WorkerId k) {
  std::vector<RecordKey> out;
  for (Vertex i : a.reduce_set(k)) {
    if (i > g.vertex_count()) continue;
    for (Vertex j : g.neighbors(i))
      if (!a.maps(k, j)) out.push_back({i, j});
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Alignment table and coded messages.

/// One segment slot of the table: segment `index` (zero-based) of record `key`.
struct SegmentRef {
  RecordKey key;
  std::size_t index = 0;

  friend bool operator==(const SegmentRef&, const SegmentRef&) = default;
};

/// Sender s's r-row table for group S: one row per k in S\{s} (ascending),
/// holding the s-th segment of every record in Z^k_{S\{k}}, left-aligned.
struct GroupTable {
  WorkerSet group;
  WorkerId sender = 0;
  std::size_t r = 0;
  std::vector<WorkerId> rows;          // receivers, ascending
  std::vector<ZSet> entries;           // entries[row]
  std::vector<std::size_t> segment;    // segment index carried for each row

  /// Number of non-empty columns, Q_s = max row length.
  std::size_t width() const {
    std::size_t q = 0;
    for (const auto& z : entries) q = std::max(q, z.size());
    return q;
  }

  /// Total occupied cells, sum of |Z^k|.
  std::size_t occupied() const {
    std::size_t t = 0;
    for (const auto& z : entries) t += z.size();
    return t;
  }

  /// Occupied cells of column c (1-based), top to bottom.
  std::vector<SegmentRef> column(std::size_t c) const {
    std::vector<SegmentRef> out;
    for (std::size_t row = 0; row < rows.size(); ++row)
      if (c - 1 < entries[row].size()) out.push_back({entries[row][c - 1], segment[row]});
    return out;
  }

  std::size_t row_of(WorkerId k) const {
    auto it = std::find(rows.begin(), rows.end(), k);
    if (it == rows.end()) throw UsageError("worker " + std::to_string(k) + " is not a row of this table");
    return static_cast<std::size_t>(it - rows.begin());
  }

  /// Lays out the table as the sender sees it.
  static GroupTable build(const Allocation& a, const Graph& g, WorkerSet group, WorkerId sender,
                          const RecordFilter& filter = {}) {
    GroupTable t;
    t.r = detail::check_group(a, g, group, sender);
    t.group = group;
    t.sender = sender;
    for (WorkerId k : group.without(sender).members()) {
      t.rows.push_back(k);
      t.entries.push_back(build_z_set(a, g, group, k, filter));
      t.segment.push_back(group.without(k).rank_of(sender));
    }
    return t;
  }
};

/// One multicast: XOR of the occupied cells of a table column.
struct CodedMessage {
  WorkerSet group;
  WorkerId sender = 0;
  std::uint32_t column = 0;  // 1-based
  std::uint64_t payload = 0;
  unsigned width = 0;        // bits, widest occupied segment of the column

  friend bool operator==(const CodedMessage&, const CodedMessage&) = default;
};

/// Encodes sender s's messages for group S from its local Map outputs.
inline std::vector<CodedMessage> encode_group(const Allocation& a, const Graph& g, WorkerSet group, WorkerId sender,
                                              const LocalValues& local, const RecordFilter& filter = {}) {
  const GroupTable table = GroupTable::build(a, g, group, sender, filter);
  std::vector<CodedMessage> out;
  const std::size_t q = table.width();
  out.reserve(q);
  for (std::size_t c = 1; c <= q; ++c) {
    CodedMessage m{group, sender, static_cast<std::uint32_t>(c), 0, 0};
    for (const SegmentRef& cell : table.column(c)) {
      const auto v = local.get(g, cell.key);
      if (!v)
        throw ConsistencyError("sender " + std::to_string(sender) + " lacks map output " + to_string(cell.key));
      m.payload ^= extract_segment(to_word(*v), table.r, cell.index);
      m.width = std::max(m.width, segment_width(table.r, cell.index));
    }
    out.push_back(m);
  }
  return out;
}

/// A decoded segment destined for the receiver.
struct Segment {
  RecordKey key;
  std::size_t index = 0;
  std::uint64_t payload = 0;  // right-aligned
};

/// Receiver k's view of sender s's table: other rows from the batches k maps,
/// its own row from its Reduce assignment.
inline GroupTable receiver_table(const Allocation& a, const Graph& g, WorkerSet group, WorkerId sender,
                                 WorkerId receiver, const RecordFilter& filter = {}) {
  GroupTable t;
  t.r = detail::check_group(a, g, group, sender);
  if (receiver == sender || !group.contains(receiver))
    throw UsageError("receiver " + std::to_string(receiver) + " must be in " + group.to_string() + " and differ from sender");
  t.group = group;
  t.sender = sender;
  for (WorkerId k : group.without(sender).members()) {
    t.rows.push_back(k);
    t.entries.push_back(k == receiver ? receiver_z_set(a, g, group, k, filter) : build_z_set(a, g, group, k, filter));
    t.segment.push_back(group.without(k).rank_of(sender));
  }
  return t;
}

/// Recovers receiver k's segments from sender s's messages by cancelling the
/// rows k computed during its own Map phase.
inline std::vector<Segment> decode(WorkerId receiver, WorkerSet group, WorkerId sender,
                                   const std::vector<CodedMessage>& messages, const Allocation& a, const Graph& g,
                                   const LocalValues& local, const RecordFilter& filter = {}) {
  const GroupTable table = receiver_table(a, g, group, sender, receiver, filter);
  const std::size_t own = table.row_of(receiver);
  const auto where = [&](std::size_t c) {
    return "group " + group.to_string() + ", sender " + std::to_string(sender) + ", column " + std::to_string(c);
  };
  if (messages.size() != table.width())
    throw DecodeError("decode failed at " + where(messages.size() + 1) + ": expected " +
                      std::to_string(table.width()) + " messages, received " + std::to_string(messages.size()));
  std::vector<Segment> out;
  for (std::size_t c = 1; c <= messages.size(); ++c) {
    const CodedMessage& m = messages[c - 1];
    if (m.group != group || m.sender != sender || m.column != c)
      throw DecodeError("decode failed at " + where(c) + ": message header mismatch");
    std::uint64_t x = m.payload;
    for (std::size_t row = 0; row < table.rows.size(); ++row) {
      if (row == own || c > table.entries[row].size()) continue;
      const RecordKey& key = table.entries[row][c - 1];
      const auto v = local.get(g, key);
      if (!v) throw DecodeError("decode failed at " + where(c) + ": receiver lacks " + to_string(key));
      x ^= extract_segment(to_word(*v), table.r, table.segment[row]);
    }
    if (c <= table.entries[own].size())
      out.push_back({table.entries[own][c - 1], table.segment[own], x & width_mask(segment_width(table.r, table.segment[own]))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uncoded baseline.

struct Unicast {
  RecordKey key;
  WorkerId source = 0;
  WorkerId destination = 0;
};

/// Lowest-id worker that maps j.
inline WorkerId uncoded_source(const Allocation& a, Vertex j) { return a.mask(j).members().front(); }

/// Every needed record sent once from its lowest mapping worker; ordered by destination, then canonically.
inline std::vector<Unicast> uncoded_plan(const Allocation& a, const Graph& g) {
  if (g.vertex_count() > a.vertex_count()) throw UsageError("graph has more vertices than the allocation");
  std::vector<Unicast> out;
  for (WorkerId k = 1; k <= a.workers(); ++k)
    for (const RecordKey& key : needed_records(a, g, k)) out.push_back({key, uncoded_source(a, key.mapper), k});
  return out;
}

// ---------------------------------------------------------------------------
// Composed plans.

/// Splits records into named components that are coded separately. Groups
/// that are not admissible are shuffled uncoded; their records count toward
/// `fallback` when set, otherwise toward their own component.
struct ShufflePlan {
  std::string name = "er";
  std::vector<std::string> components{"all"};
  std::function<std::size_t(const RecordKey&)> component;
  std::function<bool(WorkerSet)> admissible;
  std::optional<std::size_t> fallback;

  std::size_t component_of(const RecordKey& k) const { return component ? component(k) : 0; }
  bool admits(WorkerSet group) const { return !admissible || admissible(group); }
  std::size_t uncoded_component(const RecordKey& k) const { return fallback.value_or(component_of(k)); }

  /// Components that carry coded traffic.
  std::vector<std::size_t> coded_components() const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < components.size(); ++c)
      if (!fallback || c != *fallback) out.push_back(c);
    return out;
  }
};

/// Single component, every group coded.
inline ShufflePlan er_plan() { return {}; }

/// Two-cluster three-phase plan: groups inside the K1 servers (phase I) or
/// the K2 servers (phase II) are coded; phase III Reducers receive uncoded.
inline ShufflePlan rb_plan(const PhasePlan& phases) {
  ShufflePlan p;
  p.name = "rb";
  p.components = {"phase1", "phase2", "phase3"};
  p.component = [phases](const RecordKey& k) -> std::size_t { return static_cast<std::size_t>(phases.phase(k.reducer) - 1); };
  const WorkerSet big = phases.big_servers, small = phases.small_servers;
  p.admissible = [big, small](WorkerSet s) { return s.subset_of(big) || s.subset_of(small); };
  return p;
}

/// Stochastic-block plan: intra-cluster and cross-cluster records coded as
/// separate components. With a phase plan (the two-cluster allocation), only
/// groups within one server set are coded and everything else is shuffled
/// uncoded under "residual".
inline ShufflePlan sbm_plan(std::size_t n1, std::optional<PhasePlan> phases = std::nullopt) {
  ShufflePlan p;
  p.name = "sbm";
  p.components = {"intra1", "intra2", "cross", "residual"};
  p.fallback = 3;
  const Vertex split = static_cast<Vertex>(n1);
  p.component = [split](const RecordKey& k) -> std::size_t {
    const bool a = k.reducer <= split, b = k.mapper <= split;
    return a != b ? 2 : (a ? 0 : 1);
  };
  if (phases) {
    const WorkerSet big = phases->big_servers, small = phases->small_servers;
    p.admissible = [big, small](WorkerSet s) { return s.subset_of(big) || s.subset_of(small); };
  }
  return p;
}

}  // namespace codedgraph
