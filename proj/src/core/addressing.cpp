#include "core/addressing.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "core/errors.hpp"

namespace mars {

namespace {

std::uint64_t gather_bits(std::uint64_t value, const std::vector<unsigned>& positions) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out |= ((value >> positions[i]) & 1ull) << i;
  }
  return out;
}

std::uint64_t scatter_bits(std::uint64_t field, const std::vector<unsigned>& positions) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out |= ((field >> i) & 1ull) << positions[i];
  }
  return out;
}

unsigned log2_exact(std::uint64_t count, const char* what) {
  if (count == 0 || (count & (count - 1)) != 0) {
    std::ostringstream os;
    os << "memory_map: " << what << " count " << count << " is not a power of two";
    throw ConfigError(os.str());
  }
  return static_cast<unsigned>(std::countr_zero(count));
}

}  // namespace

void MemoryMap::validate() const {
  if (addr_bits == 0 || addr_bits > 63) {
    throw ConfigError("memory_map.addr_bits: must be in [1, 63]");
  }
  std::vector<unsigned> seen(addr_bits, 0);
  for (unsigned b = 0; b < burst_offset_bits; ++b) {
    if (b >= addr_bits) throw ConfigError("memory_map.burst_offset_bits: exceeds addr_bits");
    seen[b]++;
  }
  auto mark = [&](const std::vector<unsigned>& bits, const char* name) {
    for (unsigned b : bits) {
      if (b >= addr_bits) {
        std::ostringstream os;
        os << "memory_map." << name << ": bit position " << b << " outside addr_bits=" << addr_bits;
        throw ConfigError(os.str());
      }
      seen[b]++;
    }
  };
  mark(channel_bits, "channel_bits");
  mark(rank_bits, "rank_bits");
  mark(bank_bits, "bank_bits");
  mark(row_bits, "row_bits");
  mark(column_bits, "column_bits");
  for (unsigned b = 0; b < addr_bits; ++b) {
    if (seen[b] > 1) {
      std::ostringstream os;
      os << "memory_map: bit position " << b << " assigned to more than one field (fields must be disjoint)";
      throw ConfigError(os.str());
    }
    if (seen[b] == 0) {
      std::ostringstream os;
      os << "memory_map: bit position " << b << " not covered by any field (union must cover addr_bits exactly)";
      throw ConfigError(os.str());
    }
  }
}

DramCoordinate decode(PhysicalAddress addr, const MemoryMap& map) {
  DramCoordinate c;
  c.channel = gather_bits(addr.value, map.channel_bits);
  c.rank = gather_bits(addr.value, map.rank_bits);
  c.bank = gather_bits(addr.value, map.bank_bits);
  c.row = gather_bits(addr.value, map.row_bits);
  c.column = gather_bits(addr.value, map.column_bits);
  return c;
}

std::uint64_t burst_offset(PhysicalAddress addr, const MemoryMap& map) {
  return addr.value & ((1ull << map.burst_offset_bits) - 1);
}

PhysicalAddress encode(const DramCoordinate& coord, std::uint64_t offset, const MemoryMap& map) {
  std::uint64_t v = offset & ((1ull << map.burst_offset_bits) - 1);
  v |= scatter_bits(coord.channel, map.channel_bits);
  v |= scatter_bits(coord.rank, map.rank_bits);
  v |= scatter_bits(coord.bank, map.bank_bits);
  v |= scatter_bits(coord.row, map.row_bits);
  v |= scatter_bits(coord.column, map.column_bits);
  return PhysicalAddress{v};
}

namespace {

MemoryMap build_map(const MapDimensions& dims, bool channel_inside_page) {
  MemoryMap map;
  map.addr_bits = dims.addr_bits;
  map.burst_offset_bits = dims.burst_offset_bits;

  unsigned channel_w = log2_exact(dims.channels, "channel");
  unsigned rank_w = log2_exact(dims.ranks, "rank");
  unsigned bank_w = log2_exact(dims.banks, "bank");
  unsigned column_w = log2_exact(dims.columns, "column");

  unsigned next = dims.burst_offset_bits;
  auto take = [&next](std::vector<unsigned>& into, unsigned width) {
    for (unsigned i = 0; i < width; ++i) into.push_back(next++);
  };

  if (channel_inside_page) take(map.channel_bits, channel_w);
  take(map.column_bits, column_w);
  if (!channel_inside_page) take(map.channel_bits, channel_w);
  take(map.bank_bits, bank_w);
  take(map.rank_bits, rank_w);
  if (next > dims.addr_bits) {
    throw ConfigError("memory_map: channel/rank/bank/column bits exceed addr_bits, no room left for rows");
  }
  take(map.row_bits, dims.addr_bits - next);

  map.validate();
  return map;
}

}  // namespace

MemoryMap make_page_contiguous_map(const MapDimensions& dims) {
  return build_map(dims, /*channel_inside_page=*/false);
}

MemoryMap make_line_interleaved_map(const MapDimensions& dims) {
  return build_map(dims, /*channel_inside_page=*/true);
}

MemoryMap make_map_preset(const std::string& name, const MapDimensions& dims) {
  if (name == "page_contiguous") return make_page_contiguous_map(dims);
  if (name == "line_interleaved") return make_line_interleaved_map(dims);
  throw ConfigError("memory_map.preset: unknown preset \"" + name +
                    "\" (expected page_contiguous or line_interleaved)");
}

}  // namespace mars
