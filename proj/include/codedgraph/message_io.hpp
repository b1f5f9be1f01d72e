#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <vector>

#include "error.hpp"
#include "shuffle.hpp"

namespace codedgraph {

// Dump layout, all little-endian, one record per message:
//   u32 group bitmask | u16 sender | u32 column | ceil(ceil(64/r)/8) payload bytes
// The payload is the right-aligned XOR, zero-padded to the widest segment.

namespace detail {

inline void put_le(std::ostream& out, std::uint64_t v, std::size_t bytes) {
  for (std::size_t b = 0; b < bytes; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline std::uint64_t get_le(std::istream& in, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < bytes; ++b) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ParseError(0, "truncated message dump");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return v;
}

}  // namespace detail

inline std::size_t payload_bytes(std::size_t r) { return (max_segment_width(r) + 7) / 8; }

inline void write_messages(std::ostream& out, const std::vector<CodedMessage>& messages, std::size_t r) {
  const std::size_t pb = payload_bytes(r);
  for (const auto& m : messages) {
    detail::put_le(out, m.group.bits(), 4);
    detail::put_le(out, m.sender, 2);
    detail::put_le(out, m.column, 4);
    detail::put_le(out, m.payload, pb);
  }
}

/// Reads a dump written with the same r. Widths are not stored and come back as ceil(64/r).
inline std::vector<CodedMessage> read_messages(std::istream& in, std::size_t r) {
  const std::size_t pb = payload_bytes(r);
  std::vector<CodedMessage> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    CodedMessage m;
    m.group = WorkerSet(static_cast<std::uint32_t>(detail::get_le(in, 4)));
    m.sender = static_cast<WorkerId>(detail::get_le(in, 2));
    m.column = static_cast<std::uint32_t>(detail::get_le(in, 4));
    m.payload = detail::get_le(in, pb);
    m.width = max_segment_width(r);
    out.push_back(m);
  }
  return out;
}

}  // namespace codedgraph
