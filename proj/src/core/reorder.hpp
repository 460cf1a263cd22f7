#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/request.hpp"

namespace mars {

// Geometry and per-tick rates of the reorder stage.
struct ReorderConfig {
  std::uint32_t request_q = 512;  // RequestQ slot count (lookahead depth)
  std::uint32_t sets = 64;        // PhyPageList sets
  std::uint32_t ways = 2;         // PhyPageList ways per set
  std::uint32_t insert_rate = 1;  // inserts per tick
  std::uint32_t forward_rate = 1; // forwards per tick
  // Max consecutive forwards from one page entry before it is re-queued at
  // the PhyPageOrderQ tail; 0 disables the cap (a page drains fully).
  std::uint32_t drain_cap = 0;
  unsigned page_offset_bits = kDefaultPageOffsetBits;

  std::uint32_t page_entries() const { return sets * ways; }
  void validate() const;
};

enum class InsertResult : std::uint8_t {
  accepted,
  queue_full,     // no free RequestQ slot
  set_conflict,   // all ways of the target PhyPageList set hold other pages
  order_q_full,   // no PhyPageOrderQ slot for a new page entry
  page_draining,  // the page's entry is mid-drain; appends wait for retirement
};

const char* insert_result_name(InsertResult r);

inline bool is_stall(InsertResult r) { return r != InsertResult::accepted; }

// Bounded-lookahead reorder buffer: requests are held in RequestQ slots,
// threaded per 4KB page into chronological linked chains anchored by
// PhyPageList entries, and forwarded page-at-a-time in the order pages were
// first seen (PhyPageOrderQ). Knows nothing about the memory map beyond the
// page number.
class ReorderBuffer {
 public:
  explicit ReorderBuffer(const ReorderConfig& cfg);

  // On a stall the state is unchanged; the caller retries later
  // (backpressure, never a drop).
  InsertResult try_insert(const MemoryRequest& req);

  // Next request that forward would emit: the head of the oldest page's
  // chain. Null iff the buffer is empty.
  const MemoryRequest* peek() const;

  // Emit the peeked request and advance the chain. Retires the page entry
  // when its last request leaves.
  MemoryRequest commit_forward();

  std::optional<MemoryRequest> forward() {
    if (!peek()) return std::nullopt;
    return commit_forward();
  }

  bool empty() const { return live_requests_ == 0; }
  std::uint32_t size() const { return live_requests_; }
  std::uint32_t live_pages() const { return order_size_; }
  const ReorderConfig& config() const { return cfg_; }

  // Debug/golden-test dump: PhyPageOrderQ order, each entry's page and
  // count, and the slot chain. Stable field order.
  std::string snapshot() const;

  // Structural self-check; throws SimError on any violated invariant.
  void check_invariants() const;

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  struct Slot {
    MemoryRequest req;
    std::uint32_t next = kNone;  // next slot of the same page, chronological
  };

  struct PageEntry {
    std::uint64_t page = 0;
    std::uint32_t head = kNone;
    std::uint32_t tail = kNone;
    std::uint32_t count = 0;
    bool draining = false;
    bool valid = false;
  };

  std::uint32_t find_free_slot() const;  // lowest set-free occupancy bit
  void set_occupied(std::uint32_t slot, bool occupied);
  PageEntry* find_entry(std::uint64_t page, std::uint32_t set);

  ReorderConfig cfg_;
  std::vector<Slot> slots_;
  std::vector<std::uint64_t> occupancy_;   // bit i set <=> slot i live
  std::vector<PageEntry> page_list_;       // sets x ways, way-major within set
  std::vector<std::uint32_t> order_q_;     // ring buffer of page_list_ indices
  std::uint32_t order_head_ = 0;
  std::uint32_t order_size_ = 0;
  std::uint32_t live_requests_ = 0;
  std::uint32_t head_run_ = 0;  // consecutive forwards from the current head entry
};

// Downstream acceptance capacity for a given tick.
using CreditFn = std::function<std::uint32_t(std::uint64_t tick)>;

struct ReorderRunResult {
  std::vector<MemoryRequest> output;
  std::size_t accepted = 0;   // requests inserted so far
  std::uint64_t ticks = 0;
  bool completed = false;     // input fully drained through the buffer
};

// Drive the buffer tick by tick: up to insert_rate inserts from the input
// head (a stall blocks the head), then up to forward_rate forwards gated by
// the tick's credits. Runs to completion, or for max_ticks if nonzero.
ReorderRunResult run_reorder(ReorderBuffer& rb, std::span<const MemoryRequest> input,
                             const CreditFn& credits, std::uint64_t max_ticks = 0);

// The no-reorder reference: identity on order, same credit gating (one
// admission attempt stream, head blocks until granted).
ReorderRunResult baseline_passthrough(std::span<const MemoryRequest> input, const CreditFn& credits,
                                      std::uint32_t forward_rate = 1, std::uint64_t max_ticks = 0);

}  // namespace mars
