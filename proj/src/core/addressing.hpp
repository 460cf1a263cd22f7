#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mars {

// One byte address in the physical address space. The simulator has no
// virtual memory; every address in a request stream is physical.
struct PhysicalAddress {
  std::uint64_t value = 0;

  friend bool operator==(PhysicalAddress a, PhysicalAddress b) { return a.value == b.value; }
  friend bool operator<(PhysicalAddress a, PhysicalAddress b) { return a.value < b.value; }
};

// 4KB physical page number: the address with the low page-offset bits
// discarded. This is the only address knowledge the reorder stage has.
struct PageId {
  std::uint64_t value = 0;

  friend bool operator==(PageId a, PageId b) { return a.value == b.value; }
  friend bool operator<(PageId a, PageId b) { return a.value < b.value; }
};

constexpr unsigned kDefaultPageOffsetBits = 12;

inline PageId page_id(PhysicalAddress addr, unsigned page_offset_bits = kDefaultPageOffsetBits) {
  return PageId{addr.value >> page_offset_bits};
}

// Full DRAM device address, the memory controller's view of a request.
struct DramCoordinate {
  std::uint64_t channel = 0;
  std::uint64_t rank = 0;
  std::uint64_t bank = 0;
  std::uint64_t row = 0;
  std::uint64_t column = 0;

  friend bool operator==(const DramCoordinate&, const DramCoordinate&) = default;
};

inline bool same_row(const DramCoordinate& a, const DramCoordinate& b) {
  return a.channel == b.channel && a.rank == b.rank && a.bank == b.bank && a.row == b.row;
}

// Bit-field layout translating a physical address to channel/rank/bank/row/
// column. Each list holds physical-address bit positions, least significant
// field bit first. burst_offset_bits counts the low bits covered by one
// burst; those never reach the device address.
//
// validate() enforces: all lists mutually disjoint, and together with the
// burst offset they cover bits [0, addr_bits) exactly.
struct MemoryMap {
  unsigned addr_bits = 36;
  unsigned burst_offset_bits = 6;
  std::vector<unsigned> channel_bits;
  std::vector<unsigned> rank_bits;
  std::vector<unsigned> bank_bits;
  std::vector<unsigned> row_bits;
  std::vector<unsigned> column_bits;

  std::uint64_t channels() const { return 1ull << channel_bits.size(); }
  std::uint64_t ranks() const { return 1ull << rank_bits.size(); }
  std::uint64_t banks() const { return 1ull << bank_bits.size(); }
  std::uint64_t rows() const { return 1ull << row_bits.size(); }
  std::uint64_t columns() const { return 1ull << column_bits.size(); }
  std::uint64_t max_address() const { return (addr_bits >= 64) ? ~0ull : (1ull << addr_bits) - 1; }

  void validate() const;  // throws ConfigError naming the violated invariant

  friend bool operator==(const MemoryMap&, const MemoryMap&) = default;
};

DramCoordinate decode(PhysicalAddress addr, const MemoryMap& map);
std::uint64_t burst_offset(PhysicalAddress addr, const MemoryMap& map);

// Inverse of decode: scatter the coordinate and burst offset back into a
// physical address. decode/encode form a bijection on valid addresses.
PhysicalAddress encode(const DramCoordinate& coord, std::uint64_t burst_offset, const MemoryMap& map);

// Geometry needed to build the named map presets.
struct MapDimensions {
  unsigned addr_bits = 36;
  std::uint64_t channels = 2;
  std::uint64_t ranks = 1;
  std::uint64_t banks = 8;
  std::uint64_t columns = 1024;
  unsigned burst_offset_bits = 6;  // 64B lines
  // Row bits take whatever remains of addr_bits.
};

// Default layout, LSB upward: burst offset, column, channel, bank, rank,
// row. The channel bits land above the 4KB page boundary, so one page lives
// entirely on one channel and (with >= 6 column bits) in one row: grouping
// requests by page is then exactly grouping them by row buffer.
MemoryMap make_page_contiguous_map(const MapDimensions& dims);

// Alternate layout with the channel bits directly above the burst offset,
// inside the page offset. Consecutive lines of one page alternate channels,
// so page grouping no longer pins a single channel. Ships as a named preset
// to show the reorder stage still helps when the map is unfavorable.
MemoryMap make_line_interleaved_map(const MapDimensions& dims);

MemoryMap make_map_preset(const std::string& name, const MapDimensions& dims);

}  // namespace mars
