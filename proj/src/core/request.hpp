#pragma once

#include <cstdint>
#include <string>

#include "core/addressing.hpp"

namespace mars {

// Graphics data stream kinds carried by requests. Purely a label in this
// model; scheduling never looks at it.
enum class StreamKind : std::uint8_t { texture, color, stencil, depth, hiz };

const char* stream_kind_name(StreamKind k);
StreamKind stream_kind_from_name(const std::string& name);  // throws ConfigError

constexpr std::uint32_t kLineBytes = 64;
constexpr std::uint32_t kPageBytes = 4096;
constexpr std::uint32_t kLinesPerPage = kPageBytes / kLineBytes;

// One read or write transaction of a single 64B line.
struct MemoryRequest {
  std::uint64_t seq = 0;  // arrival ordinal; dense 0..N-1 at the merge output
  PhysicalAddress addr;
  bool is_write = false;
  StreamKind stream_kind = StreamKind::texture;
  std::uint32_t source_id = 0;
  std::uint32_t size_bytes = kLineBytes;

  PageId page(unsigned page_offset_bits = kDefaultPageOffsetBits) const {
    return page_id(addr, page_offset_bits);
  }

  friend bool operator==(const MemoryRequest&, const MemoryRequest&) = default;
};

}  // namespace mars
