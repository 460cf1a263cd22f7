#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/request.hpp"

namespace mars {

enum class IntraPageOrder : std::uint8_t { sequential, strided, shuffled };

const char* intra_page_order_name(IntraPageOrder o);
IntraPageOrder intra_page_order_from_name(const std::string& name);

// Shape of one synthetic per-source request stream. A source walks
// pages_per_source pages (page_stride apart), emitting requests_per_page
// line requests per page in the chosen intra-page order; requests beyond
// one page's worth of lines revisit lines in the same order.
struct StreamSpec {
  StreamKind stream_kind = StreamKind::texture;
  double read_fraction = 1.0;
  std::uint64_t base_page = 0;
  std::uint64_t pages_per_source = 1;
  std::uint64_t requests_per_page = 1;
  std::uint64_t page_stride = 1;
  IntraPageOrder intra_page_order = IntraPageOrder::sequential;
  std::uint64_t intra_page_stride = 4;  // lines, used by IntraPageOrder::strided

  void validate() const;
};

enum class Arbitration : std::uint8_t { round_robin, fixed_priority };

const char* arbitration_name(Arbitration a);
Arbitration arbitration_from_name(const std::string& name);

// Default page region for a stream kind; regions of distinct kinds never
// overlap at any supported scale.
std::uint64_t stream_region_base(StreamKind k);

// Multi-level arbitration tree merging leaf sources. fanouts[0] is the
// root fanout; the product of all fanouts must equal leaves.
struct MergeTreeSpec {
  std::uint64_t leaves = 1;
  std::vector<std::uint64_t> fanouts = {1};
  Arbitration arbitration = Arbitration::round_robin;

  void validate() const;
};

// A source's page range is offset by its source_id so distinct sources of
// one spec touch disjoint pages.
std::vector<MemoryRequest> generate_source(const StreamSpec& spec, std::uint32_t source_id,
                                           std::uint64_t seed);

// Half-open page interval [first, last) a source will touch; used for the
// overlap check across sources and streams.
std::pair<std::uint64_t, std::uint64_t> source_page_range(const StreamSpec& spec,
                                                          std::uint32_t source_id);

// Merge per-source streams through the arbitration tree. At every level the
// non-empty children are drained one request at a time in round-robin order
// (or lowest-index-first for fixed_priority). Output seq is assigned in
// emission order; the request multiset is preserved.
std::vector<MemoryRequest> merge(const MergeTreeSpec& tree,
                                 const std::vector<std::vector<MemoryRequest>>& per_source);

// A workload instance: one StreamSpec per leaf plus the merge tree.
struct Workload {
  std::string name;
  std::vector<StreamSpec> per_leaf;
  MergeTreeSpec tree;

  void validate() const;  // spec validity + disjoint page ranges
};

// Footprint knobs for the workload presets; the preset fixes stream kinds,
// read/write mix and access order, the scale fixes the sizes.
struct WorkloadScale {
  std::uint64_t leaves = 64;
  std::vector<std::uint64_t> fanouts = {8, 8};
  std::uint64_t pages_per_source = 8;
  std::uint64_t requests_per_page = 64;
  std::uint64_t page_stride = 1;
};

// WL1: read-only single texture stream.     WL2: read+write stencil+color.
// WL3: write-only single stream.            WL4: read-only hiz+depth.
// WL5: read+write single hiz stream.
Workload workload_preset(const std::string& name, const WorkloadScale& scale);

// One stream per leaf, before merging; index is the source id.
std::vector<std::vector<MemoryRequest>> generate_per_source(const Workload& wl,
                                                            std::uint64_t seed);

// Generate every leaf and merge: the full traffic front end.
std::vector<MemoryRequest> generate_workload(const Workload& wl, std::uint64_t seed);

std::uint64_t stream_digest(const std::vector<MemoryRequest>& stream);

// Request trace files: header line `seq,addr_hex,rw,stream_kind,source_id`,
// one request per line. Also the ingestion path for external traces.
void write_trace(std::ostream& os, const std::vector<MemoryRequest>& stream);
void write_trace_file(const std::string& path, const std::vector<MemoryRequest>& stream);
std::vector<MemoryRequest> read_trace(std::istream& is);
std::vector<MemoryRequest> read_trace_file(const std::string& path);

}  // namespace mars
