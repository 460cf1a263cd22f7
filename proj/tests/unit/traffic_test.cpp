#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "core/errors.hpp"
#include "core/traffic.hpp"

using namespace mars;

namespace {

StreamSpec small_spec(std::uint64_t base_page, std::uint64_t pages, std::uint64_t per_page) {
  StreamSpec s;
  s.base_page = base_page;
  s.pages_per_source = pages;
  s.requests_per_page = per_page;
  return s;
}

MemoryRequest req_at(std::uint64_t addr, std::uint64_t seq = 0) {
  MemoryRequest r;
  r.seq = seq;
  r.addr = PhysicalAddress{addr};
  return r;
}

}  // namespace

TEST_CASE("sequential source walks lines then pages") {
  std::vector<MemoryRequest> s = generate_source(small_spec(0, 2, 3), 0, 1);
  REQUIRE(s.size() == 6);
  CHECK(s[0].addr.value == 0x0);
  CHECK(s[1].addr.value == 0x40);
  CHECK(s[2].addr.value == 0x80);
  CHECK(s[3].addr.value == 0x1000);
  CHECK(s[4].addr.value == 0x1040);
  CHECK(s[5].addr.value == 0x1080);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].seq == i);
}

TEST_CASE("requests beyond one page of lines revisit the same lines") {
  std::vector<MemoryRequest> s = generate_source(small_spec(0, 1, 70), 0, 1);
  REQUIRE(s.size() == 70);
  CHECK(s[64].addr.value == s[0].addr.value);
  CHECK(s[69].addr.value == s[5].addr.value);
}

TEST_CASE("source id offsets the page range so sources are disjoint") {
  StreamSpec spec = small_spec(100, 4, 1);
  spec.page_stride = 2;
  auto r0 = source_page_range(spec, 0);
  auto r1 = source_page_range(spec, 1);
  CHECK(r0.first == 100);
  CHECK(r0.second == 108);
  // span 8, so sources sit 9 pages apart (odd spacing, one-page gap)
  CHECK(r1.first == 109);
  CHECK(r1.second == 117);
  std::vector<MemoryRequest> s1 = generate_source(spec, 1, 1);
  CHECK(s1[0].addr.value == 109ull << 12);
  CHECK(s1[1].addr.value == 111ull << 12);
}

TEST_CASE("read fraction endpoints are exact") {
  StreamSpec spec = small_spec(0, 4, 16);
  spec.read_fraction = 1.0;
  for (const auto& r : generate_source(spec, 0, 9)) CHECK(!r.is_write);
  spec.read_fraction = 0.0;
  for (const auto& r : generate_source(spec, 0, 9)) CHECK(r.is_write);
}

TEST_CASE("mixed read fraction is deterministic per seed") {
  StreamSpec spec = small_spec(0, 4, 64);
  spec.read_fraction = 0.5;
  auto a = generate_source(spec, 0, 42);
  auto b = generate_source(spec, 0, 42);
  auto c = generate_source(spec, 0, 43);
  CHECK(stream_digest(a) == stream_digest(b));
  CHECK(stream_digest(a) != stream_digest(c));
  CHECK(std::any_of(a.begin(), a.end(), [](const MemoryRequest& r) { return r.is_write; }));
  CHECK(std::any_of(a.begin(), a.end(), [](const MemoryRequest& r) { return !r.is_write; }));
}

TEST_CASE("strided order interleaves lines with the given stride") {
  StreamSpec spec = small_spec(0, 1, 18);
  spec.intra_page_order = IntraPageOrder::strided;
  spec.intra_page_stride = 4;
  std::vector<MemoryRequest> s = generate_source(spec, 0, 1);
  std::vector<std::uint64_t> lines;
  for (const auto& r : s) lines.push_back((r.addr.value >> 6) & 63);
  CHECK(lines == std::vector<std::uint64_t>{0, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40, 44, 48, 52,
                                            56, 60, 1, 5});
}

TEST_CASE("strided stride must divide the lines per page") {
  StreamSpec spec = small_spec(0, 1, 8);
  spec.intra_page_order = IntraPageOrder::strided;
  spec.intra_page_stride = 3;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("shuffled order is a deterministic permutation per page") {
  StreamSpec spec = small_spec(0, 2, 64);
  spec.intra_page_order = IntraPageOrder::shuffled;
  auto a = generate_source(spec, 0, 5);
  auto b = generate_source(spec, 0, 5);
  CHECK(stream_digest(a) == stream_digest(b));
  std::set<std::uint64_t> first_page_lines;
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(a[i].addr.value < 0x1000);
    first_page_lines.insert(a[i].addr.value >> 6);
  }
  CHECK(first_page_lines.size() == 64);  // a true permutation of the 64 lines
  // Distinct pages shuffle differently (overwhelmingly likely and frozen by seed).
  std::vector<std::uint64_t> p0, p1;
  for (std::size_t i = 0; i < 64; ++i) {
    p0.push_back(a[i].addr.value & 0xfff);
    p1.push_back(a[64 + i].addr.value & 0xfff);
  }
  CHECK(p0 != p1);
}

TEST_CASE("round robin merge alternates sources one request at a time") {
  std::vector<std::vector<MemoryRequest>> sources = {
      {req_at(0x100), req_at(0x200)},
      {req_at(0x300), req_at(0x400)},
  };
  MergeTreeSpec tree;
  tree.leaves = 2;
  tree.fanouts = {2};
  std::vector<MemoryRequest> merged = merge(tree, sources);
  REQUIRE(merged.size() == 4);
  CHECK(merged[0].addr.value == 0x100);
  CHECK(merged[1].addr.value == 0x300);
  CHECK(merged[2].addr.value == 0x200);
  CHECK(merged[3].addr.value == 0x400);
  for (std::size_t i = 0; i < merged.size(); ++i) CHECK(merged[i].seq == i);
}

TEST_CASE("fixed priority merge drains lower leaves first") {
  std::vector<std::vector<MemoryRequest>> sources = {
      {req_at(0x100), req_at(0x200)},
      {req_at(0x300)},
  };
  MergeTreeSpec tree;
  tree.leaves = 2;
  tree.fanouts = {2};
  tree.arbitration = Arbitration::fixed_priority;
  std::vector<MemoryRequest> merged = merge(tree, sources);
  REQUIRE(merged.size() == 3);
  CHECK(merged[0].addr.value == 0x100);
  CHECK(merged[1].addr.value == 0x200);
  CHECK(merged[2].addr.value == 0x300);
}

TEST_CASE("two-level merge interleaves the level outputs") {
  std::vector<std::vector<MemoryRequest>> sources = {
      {req_at(0x0)}, {req_at(0x1)}, {req_at(0x2)}, {req_at(0x3)}};
  MergeTreeSpec tree;
  tree.leaves = 4;
  tree.fanouts = {2, 2};  // root arity 2 over two groups of 2 leaves
  std::vector<MemoryRequest> merged = merge(tree, sources);
  std::vector<std::uint64_t> addrs;
  for (const auto& r : merged) addrs.push_back(r.addr.value);
  CHECK(addrs == std::vector<std::uint64_t>{0x0, 0x2, 0x1, 0x3});
}

TEST_CASE("merge preserves the request multiset and uneven lengths") {
  std::vector<std::vector<MemoryRequest>> sources = {
      {req_at(0x10), req_at(0x11), req_at(0x12)},
      {},
      {req_at(0x30)},
  };
  MergeTreeSpec tree;
  tree.leaves = 3;
  tree.fanouts = {3};
  std::vector<MemoryRequest> merged = merge(tree, sources);
  REQUIRE(merged.size() == 4);
  std::multiset<std::uint64_t> got, want{0x10, 0x11, 0x12, 0x30};
  for (const auto& r : merged) got.insert(r.addr.value);
  CHECK(got == want);
}

TEST_CASE("fanout product must match the leaf count") {
  MergeTreeSpec tree;
  tree.leaves = 6;
  tree.fanouts = {2, 2};
  CHECK_THROWS_AS(tree.validate(), ConfigError);
}

TEST_CASE("workload presets assign kinds and mixes per leaf") {
  WorkloadScale scale;
  scale.leaves = 8;
  scale.fanouts = {8};
  scale.pages_per_source = 2;
  scale.requests_per_page = 4;

  Workload wl1 = workload_preset("WL1", scale);
  REQUIRE(wl1.per_leaf.size() == 8);
  for (const auto& s : wl1.per_leaf) {
    CHECK(s.stream_kind == StreamKind::texture);
    CHECK(s.read_fraction == 1.0);
  }

  Workload wl2 = workload_preset("WL2", scale);
  CHECK(wl2.per_leaf[0].stream_kind == StreamKind::stencil);
  CHECK(wl2.per_leaf[1].stream_kind == StreamKind::color);
  CHECK(wl2.per_leaf[2].stream_kind == StreamKind::stencil);
  CHECK(wl2.per_leaf[0].read_fraction == 0.5);

  Workload wl3 = workload_preset("WL3", scale);
  for (const auto& s : wl3.per_leaf) CHECK(s.read_fraction == 0.0);

  Workload wl4 = workload_preset("WL4", scale);
  CHECK(wl4.per_leaf[0].stream_kind == StreamKind::hiz);
  CHECK(wl4.per_leaf[0].intra_page_order == IntraPageOrder::strided);
  CHECK(wl4.per_leaf[1].stream_kind == StreamKind::depth);
  CHECK(wl4.per_leaf[1].read_fraction == 1.0);

  Workload wl5 = workload_preset("WL5", scale);
  CHECK(wl5.per_leaf[0].stream_kind == StreamKind::hiz);
  CHECK(wl5.per_leaf[0].intra_page_order == IntraPageOrder::shuffled);
  CHECK(wl5.per_leaf[0].read_fraction == 0.5);

  CHECK_THROWS_AS(workload_preset("WL9", scale), ConfigError);
}

TEST_CASE("distinct stream kinds keep distinct page regions") {
  WorkloadScale scale;
  scale.leaves = 4;
  scale.fanouts = {4};
  Workload wl = workload_preset("WL4", scale);
  auto merged = generate_workload(wl, 3);
  std::set<std::uint64_t> hiz_pages, depth_pages;
  for (const auto& r : merged) {
    (r.stream_kind == StreamKind::hiz ? hiz_pages : depth_pages).insert(r.page().value);
  }
  CHECK(!hiz_pages.empty());
  CHECK(!depth_pages.empty());
  const bool disjoint = *hiz_pages.rbegin() < *depth_pages.begin() ||
                        *depth_pages.rbegin() < *hiz_pages.begin();
  CHECK(disjoint);
}

TEST_CASE("overlapping explicit streams are rejected") {
  Workload wl;
  wl.tree.leaves = 2;
  wl.tree.fanouts = {2};
  StreamSpec a = small_spec(0, 16, 1);
  StreamSpec b = small_spec(2, 4, 1);  // leaf 1 covers [7, 11), inside a's [0, 16)
  wl.per_leaf = {a, b};
  CHECK_THROWS_AS(wl.validate(), ConfigError);
}

TEST_CASE("empty workload generates no requests") {
  Workload wl;
  wl.tree.leaves = 1;
  wl.tree.fanouts = {1};
  CHECK(generate_workload(wl, 1).empty());
}

TEST_CASE("stream digest is order sensitive") {
  std::vector<MemoryRequest> a = {req_at(0x1, 0), req_at(0x2, 1)};
  std::vector<MemoryRequest> b = {req_at(0x2, 0), req_at(0x1, 1)};
  CHECK(stream_digest(a) != stream_digest(b));
  CHECK(stream_digest(a) == stream_digest(a));
}

TEST_CASE("request trace round trips through the CSV format") {
  StreamSpec spec = small_spec(3, 2, 5);
  spec.read_fraction = 0.4;
  spec.stream_kind = StreamKind::depth;
  std::vector<MemoryRequest> s = generate_source(spec, 2, 77);
  std::ostringstream os;
  write_trace(os, s);
  std::istringstream is(os.str());
  std::vector<MemoryRequest> back = read_trace(is);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back[i].seq == s[i].seq);
    CHECK(back[i].addr.value == s[i].addr.value);
    CHECK(back[i].is_write == s[i].is_write);
    CHECK(back[i].stream_kind == s[i].stream_kind);
    CHECK(back[i].source_id == s[i].source_id);
  }
}

TEST_CASE("trace reader reports the offending line") {
  std::istringstream bad_header("nope\n");
  CHECK_THROWS_AS(read_trace(bad_header), IoError);
  std::istringstream bad_field("seq,addr_hex,rw,stream_kind,source_id\n0,0x0,X,texture,0\n");
  CHECK_THROWS_WITH_AS(read_trace(bad_field), doctest::Contains("line 2"), IoError);
}
