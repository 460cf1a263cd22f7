#include "core/traffic.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "core/digest.hpp"
#include "core/errors.hpp"

namespace mars {

const char* stream_kind_name(StreamKind k) {
  switch (k) {
    case StreamKind::texture: return "texture";
    case StreamKind::color: return "color";
    case StreamKind::stencil: return "stencil";
    case StreamKind::depth: return "depth";
    case StreamKind::hiz: return "hiz";
  }
  return "?";
}

StreamKind stream_kind_from_name(const std::string& name) {
  if (name == "texture") return StreamKind::texture;
  if (name == "color") return StreamKind::color;
  if (name == "stencil") return StreamKind::stencil;
  if (name == "depth") return StreamKind::depth;
  if (name == "hiz") return StreamKind::hiz;
  throw ConfigError("stream_kind: unknown kind \"" + name + "\"");
}

const char* intra_page_order_name(IntraPageOrder o) {
  switch (o) {
    case IntraPageOrder::sequential: return "sequential";
    case IntraPageOrder::strided: return "strided";
    case IntraPageOrder::shuffled: return "shuffled";
  }
  return "?";
}

IntraPageOrder intra_page_order_from_name(const std::string& name) {
  if (name == "sequential") return IntraPageOrder::sequential;
  if (name == "strided") return IntraPageOrder::strided;
  if (name == "shuffled") return IntraPageOrder::shuffled;
  throw ConfigError("intra_page_order: unknown order \"" + name + "\"");
}

void StreamSpec::validate() const {
  if (read_fraction < 0.0 || read_fraction > 1.0) {
    throw ConfigError("stream.read_fraction: must be in [0, 1]");
  }
  if (pages_per_source < 1) throw ConfigError("stream.pages_per_source: must be >= 1");
  if (requests_per_page < 1) throw ConfigError("stream.requests_per_page: must be >= 1");
  if (page_stride < 1) throw ConfigError("stream.page_stride: must be >= 1");
  if (intra_page_order == IntraPageOrder::strided) {
    if (intra_page_stride < 1 || kLinesPerPage % intra_page_stride != 0) {
      throw ConfigError("stream.intra_page_stride: must divide the lines per page (64)");
    }
  }
}

void MergeTreeSpec::validate() const {
  if (leaves < 1) throw ConfigError("merge_tree.leaves: must be >= 1");
  if (fanouts.empty()) throw ConfigError("merge_tree.fanouts: must not be empty");
  std::uint64_t product = 1;
  for (std::uint64_t f : fanouts) {
    if (f < 1) throw ConfigError("merge_tree.fanouts: every fanout must be >= 1");
    product *= f;
  }
  if (product != leaves) {
    std::ostringstream os;
    os << "merge_tree.fanouts: product " << product << " does not equal leaves " << leaves;
    throw ConfigError(os.str());
  }
}

std::pair<std::uint64_t, std::uint64_t> source_page_range(const StreamSpec& spec,
                                                          std::uint32_t source_id) {
  std::uint64_t span = spec.pages_per_source * spec.page_stride;
  // Sources sit an odd number of pages apart. Odd spacing is coprime to every
  // power-of-two set count, so concurrent sources never pile into one set of
  // the page table no matter how the span factors.
  std::uint64_t spacing = (span + 1) | 1;
  std::uint64_t first = spec.base_page + static_cast<std::uint64_t>(source_id) * spacing;
  return {first, first + span};
}

namespace {

// Visit order of the lines of one page, as line indices. Covers each line
// exactly once; requests beyond one cover repeat the order.
std::vector<std::uint32_t> line_order(const StreamSpec& spec, std::uint32_t source_id,
                                      std::uint64_t page_ordinal, std::uint64_t seed) {
  std::vector<std::uint32_t> order(kLinesPerPage);
  switch (spec.intra_page_order) {
    case IntraPageOrder::sequential:
      std::iota(order.begin(), order.end(), 0u);
      break;
    case IntraPageOrder::strided: {
      const std::uint64_t s = spec.intra_page_stride;
      for (std::uint32_t i = 0; i < kLinesPerPage; ++i) {
        std::uint64_t pos = i * s;
        order[i] = static_cast<std::uint32_t>(pos % kLinesPerPage + pos / kLinesPerPage);
      }
      break;
    }
    case IntraPageOrder::shuffled: {
      std::iota(order.begin(), order.end(), 0u);
      std::mt19937_64 rng(mix_seed(seed ^ mix_seed(source_id) ^ mix_seed(page_ordinal + 1)));
      std::shuffle(order.begin(), order.end(), rng);
      break;
    }
  }
  return order;
}

}  // namespace

std::vector<MemoryRequest> generate_source(const StreamSpec& spec, std::uint32_t source_id,
                                           std::uint64_t seed) {
  spec.validate();
  std::vector<MemoryRequest> out;
  out.reserve(spec.pages_per_source * spec.requests_per_page);

  std::mt19937_64 rw_rng(mix_seed(seed ^ mix_seed(0x5157ull + source_id)));
  std::bernoulli_distribution is_read(spec.read_fraction);

  const std::uint64_t first_page = source_page_range(spec, source_id).first;
  for (std::uint64_t p = 0; p < spec.pages_per_source; ++p) {
    const std::uint64_t page = first_page + p * spec.page_stride;
    const auto order = line_order(spec, source_id, p, seed);
    for (std::uint64_t r = 0; r < spec.requests_per_page; ++r) {
      MemoryRequest req;
      req.seq = out.size();
      req.addr.value = page * kPageBytes + order[r % kLinesPerPage] * std::uint64_t{kLineBytes};
      req.is_write = spec.read_fraction >= 1.0 ? false
                     : spec.read_fraction <= 0.0 ? true
                                                 : !is_read(rw_rng);
      req.stream_kind = spec.stream_kind;
      req.source_id = source_id;
      req.size_bytes = kLineBytes;
      out.push_back(req);
    }
  }
  return out;
}

namespace {

std::vector<MemoryRequest> arbitrate(std::vector<std::vector<MemoryRequest>> children,
                                     Arbitration arb) {
  std::size_t total = 0;
  for (const auto& c : children) total += c.size();
  std::vector<MemoryRequest> out;
  out.reserve(total);

  if (arb == Arbitration::fixed_priority) {
    // Lowest-index non-empty child wins every grant: children drain in order.
    for (auto& c : children) {
      out.insert(out.end(), c.begin(), c.end());
    }
    return out;
  }

  // Round-robin one request at a time, skipping empty children.
  std::vector<std::size_t> cursor(children.size(), 0);
  while (out.size() < total) {
    for (std::size_t c = 0; c < children.size(); ++c) {
      if (cursor[c] < children[c].size()) {
        out.push_back(children[c][cursor[c]++]);
      }
    }
  }
  return out;
}

std::vector<MemoryRequest> merge_level(const MergeTreeSpec& tree, std::size_t level,
                                       std::size_t leaf_begin, std::size_t leaf_end,
                                       const std::vector<std::vector<MemoryRequest>>& per_source) {
  if (level == tree.fanouts.size()) {
    return per_source[leaf_begin];
  }
  const std::size_t fanout = tree.fanouts[level];
  const std::size_t span = (leaf_end - leaf_begin) / fanout;
  std::vector<std::vector<MemoryRequest>> children;
  children.reserve(fanout);
  for (std::size_t c = 0; c < fanout; ++c) {
    children.push_back(
        merge_level(tree, level + 1, leaf_begin + c * span, leaf_begin + (c + 1) * span, per_source));
  }
  return arbitrate(std::move(children), tree.arbitration);
}

}  // namespace

std::vector<MemoryRequest> merge(const MergeTreeSpec& tree,
                                 const std::vector<std::vector<MemoryRequest>>& per_source) {
  tree.validate();
  if (per_source.size() != tree.leaves) {
    std::ostringstream os;
    os << "merge: got " << per_source.size() << " source streams for a tree with " << tree.leaves
       << " leaves";
    throw ConfigError(os.str());
  }
  auto out = merge_level(tree, 0, 0, per_source.size(), per_source);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].seq = i;
  return out;
}

void Workload::validate() const {
  if (per_leaf.empty()) return;  // zero-request workload: nothing to check
  tree.validate();
  if (per_leaf.size() != tree.leaves) {
    throw ConfigError("workload: stream count does not match merge_tree.leaves");
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  ranges.reserve(per_leaf.size());
  for (std::uint32_t i = 0; i < per_leaf.size(); ++i) {
    per_leaf[i].validate();
    ranges.push_back(source_page_range(per_leaf[i], i));
  }
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].first < ranges[i - 1].second) {
      std::ostringstream os;
      os << "workload: page ranges of two sources overlap ([" << ranges[i - 1].first << ","
         << ranges[i - 1].second << ") and [" << ranges[i].first << "," << ranges[i].second << "))";
      throw ConfigError(os.str());
    }
  }
}

namespace {

// Disjoint page regions per stream kind, far enough apart for any sane scale.
constexpr std::uint64_t kRegionPages = 1ull << 20;

std::uint64_t region_base(StreamKind k) {
  return static_cast<std::uint64_t>(k) * kRegionPages;
}

StreamSpec base_spec(StreamKind kind, double read_fraction, IntraPageOrder order,
                     const WorkloadScale& scale) {
  StreamSpec s;
  s.stream_kind = kind;
  s.read_fraction = read_fraction;
  s.base_page = region_base(kind);
  s.pages_per_source = scale.pages_per_source;
  s.requests_per_page = scale.requests_per_page;
  s.page_stride = scale.page_stride;
  s.intra_page_order = order;
  return s;
}

}  // namespace

const char* arbitration_name(Arbitration a) {
  return a == Arbitration::round_robin ? "round_robin" : "fixed_priority";
}

Arbitration arbitration_from_name(const std::string& name) {
  if (name == "round_robin") return Arbitration::round_robin;
  if (name == "fixed_priority") return Arbitration::fixed_priority;
  throw ConfigError("unknown arbitration '" + name + "'");
}

std::uint64_t stream_region_base(StreamKind k) { return region_base(k); }

Workload workload_preset(const std::string& name, const WorkloadScale& scale) {
  Workload wl;
  wl.name = name;
  wl.tree.leaves = scale.leaves;
  wl.tree.fanouts = scale.fanouts;
  wl.tree.arbitration = Arbitration::round_robin;

  std::vector<StreamSpec> streams;
  if (name == "WL1") {
    streams = {base_spec(StreamKind::texture, 1.0, IntraPageOrder::sequential, scale)};
  } else if (name == "WL2") {
    streams = {base_spec(StreamKind::stencil, 0.5, IntraPageOrder::sequential, scale),
               base_spec(StreamKind::color, 0.5, IntraPageOrder::sequential, scale)};
  } else if (name == "WL3") {
    streams = {base_spec(StreamKind::color, 0.0, IntraPageOrder::sequential, scale)};
  } else if (name == "WL4") {
    streams = {base_spec(StreamKind::hiz, 1.0, IntraPageOrder::strided, scale),
               base_spec(StreamKind::depth, 1.0, IntraPageOrder::sequential, scale)};
  } else if (name == "WL5") {
    streams = {base_spec(StreamKind::hiz, 0.5, IntraPageOrder::shuffled, scale)};
  } else {
    throw ConfigError("workload.preset: unknown preset \"" + name +
                      "\" (expected WL1, WL2, WL3, WL4 or WL5)");
  }

  wl.per_leaf.reserve(scale.leaves);
  for (std::uint64_t i = 0; i < scale.leaves; ++i) {
    wl.per_leaf.push_back(streams[i % streams.size()]);
  }
  wl.validate();
  return wl;
}

std::vector<std::vector<MemoryRequest>> generate_per_source(const Workload& wl,
                                                             std::uint64_t seed) {
  if (wl.per_leaf.empty()) return {};
  wl.validate();
  std::vector<std::vector<MemoryRequest>> per_source;
  per_source.reserve(wl.per_leaf.size());
  for (std::uint32_t i = 0; i < wl.per_leaf.size(); ++i) {
    per_source.push_back(generate_source(wl.per_leaf[i], i, seed));
  }
  return per_source;
}

std::vector<MemoryRequest> generate_workload(const Workload& wl, std::uint64_t seed) {
  if (wl.per_leaf.empty()) return {};
  return merge(wl.tree, generate_per_source(wl, seed));
}

std::uint64_t stream_digest(const std::vector<MemoryRequest>& stream) {
  Fnv1a h;
  for (const auto& r : stream) {
    h.update_u64(r.addr.value);
    h.update_u64(r.is_write ? 1 : 0);
    h.update_u64(static_cast<std::uint64_t>(r.stream_kind));
    h.update_u64(r.source_id);
  }
  return h.value();
}

void write_trace(std::ostream& os, const std::vector<MemoryRequest>& stream) {
  os << "seq,addr_hex,rw,stream_kind,source_id\n";
  for (const auto& r : stream) {
    os << r.seq << ",0x" << std::hex << r.addr.value << std::dec << ','
       << (r.is_write ? 'W' : 'R') << ',' << stream_kind_name(r.stream_kind) << ',' << r.source_id
       << '\n';
  }
}

void write_trace_file(const std::string& path, const std::vector<MemoryRequest>& stream) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open trace file for writing: " + path);
  write_trace(os, stream);
  if (!os.good()) throw IoError("failed while writing trace file: " + path);
}

std::vector<MemoryRequest> read_trace(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "seq,addr_hex,rw,stream_kind,source_id") {
    throw IoError("trace: missing or wrong header line (expected seq,addr_hex,rw,stream_kind,source_id)");
  }
  std::vector<MemoryRequest> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string seq_s, addr_s, rw_s, kind_s, src_s;
    if (!std::getline(ls, seq_s, ',') || !std::getline(ls, addr_s, ',') ||
        !std::getline(ls, rw_s, ',') || !std::getline(ls, kind_s, ',') ||
        !std::getline(ls, src_s)) {
      throw IoError("trace: malformed line " + std::to_string(lineno));
    }
    MemoryRequest r;
    try {
      r.seq = std::stoull(seq_s);
      r.addr.value = std::stoull(addr_s, nullptr, 16);
      r.source_id = static_cast<std::uint32_t>(std::stoul(src_s));
    } catch (const std::exception&) {
      throw IoError("trace: bad number on line " + std::to_string(lineno));
    }
    if (rw_s == "R") {
      r.is_write = false;
    } else if (rw_s == "W") {
      r.is_write = true;
    } else {
      throw IoError("trace: rw field must be R or W on line " + std::to_string(lineno));
    }
    r.stream_kind = stream_kind_from_name(kind_s);
    r.size_bytes = kLineBytes;
    out.push_back(r);
  }
  return out;
}

std::vector<MemoryRequest> read_trace_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open trace file: " + path);
  return read_trace(is);
}

}  // namespace mars
