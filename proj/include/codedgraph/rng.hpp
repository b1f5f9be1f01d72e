#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace codedgraph {

/// Domain tags keep streams for different purposes disjoint.
enum class StreamDomain : std::uint32_t {
  kEdges = 0x45444745,    // "EDGE"
  kWeights = 0x57474854,  // "WGHT"
  kDegrees = 0x44454752,  // "DEGR"
  kTrials = 0x5452494c,   // "TRIL"
};

/// Seedable stream with one independent child per (domain, block) key.
///
/// Children are std::mt19937_64 engines seeded through std::seed_seq, both of
/// which are fully specified by the standard, so samples are identical across
/// platforms and independent of the order in which blocks are visited.
class Stream {
 public:
  Stream(std::uint64_t seed, StreamDomain domain, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(block),
                      static_cast<std::uint32_t>(block >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace codedgraph
