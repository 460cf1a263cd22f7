#include "core/reorder.hpp"

#include <bit>
#include <sstream>

#include "core/errors.hpp"

namespace mars {

const char* insert_result_name(InsertResult r) {
  switch (r) {
    case InsertResult::accepted: return "accepted";
    case InsertResult::queue_full: return "queue_full";
    case InsertResult::set_conflict: return "set_conflict";
    case InsertResult::order_q_full: return "order_q_full";
    case InsertResult::page_draining: return "page_draining";
  }
  return "?";
}

void ReorderConfig::validate() const {
  if (request_q < 1) throw ConfigError("mars.request_q: must be >= 1");
  if (sets < 1) throw ConfigError("mars.sets: must be >= 1");
  if (ways < 1) throw ConfigError("mars.ways: must be >= 1");
  if (insert_rate < 1) throw ConfigError("mars.insert_rate: must be >= 1");
  if (forward_rate < 1) throw ConfigError("mars.forward_rate: must be >= 1");
  if (page_offset_bits < 1 || page_offset_bits > 63) {
    throw ConfigError("mars.page_offset_bits: must be in [1, 63]");
  }
}

ReorderBuffer::ReorderBuffer(const ReorderConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  slots_.resize(cfg_.request_q);
  occupancy_.assign((cfg_.request_q + 63) / 64, 0);
  page_list_.resize(cfg_.page_entries());
  order_q_.resize(cfg_.page_entries());
}

std::uint32_t ReorderBuffer::find_free_slot() const {
  for (std::size_t w = 0; w < occupancy_.size(); ++w) {
    if (occupancy_[w] != ~0ull) {
      auto slot = static_cast<std::uint32_t>(w * 64 + std::countr_one(occupancy_[w]));
      return slot < cfg_.request_q ? slot : kNone;
    }
  }
  return kNone;
}

void ReorderBuffer::set_occupied(std::uint32_t slot, bool occupied) {
  const std::uint64_t mask = 1ull << (slot % 64);
  if (occupied) {
    occupancy_[slot / 64] |= mask;
  } else {
    occupancy_[slot / 64] &= ~mask;
  }
}

ReorderBuffer::PageEntry* ReorderBuffer::find_entry(std::uint64_t page, std::uint32_t set) {
  for (std::uint32_t w = 0; w < cfg_.ways; ++w) {
    PageEntry& e = page_list_[set * cfg_.ways + w];
    if (e.valid && e.page == page) return &e;
  }
  return nullptr;
}

InsertResult ReorderBuffer::try_insert(const MemoryRequest& req) {
  if (live_requests_ == cfg_.request_q) return InsertResult::queue_full;

  const std::uint64_t page = req.addr.value >> cfg_.page_offset_bits;
  const auto set = static_cast<std::uint32_t>(page % cfg_.sets);

  PageEntry* entry = find_entry(page, set);
  if (entry != nullptr && entry->draining) {
    // A draining chain is never appended to; the request waits until the
    // entry retires and then opens a fresh one.
    return InsertResult::page_draining;
  }

  std::uint32_t new_way = kNone;
  if (entry == nullptr) {
    for (std::uint32_t w = 0; w < cfg_.ways; ++w) {
      if (!page_list_[set * cfg_.ways + w].valid) {
        new_way = w;
        break;
      }
    }
    if (new_way == kNone) return InsertResult::set_conflict;
    if (order_size_ == cfg_.page_entries()) return InsertResult::order_q_full;
  }

  const std::uint32_t slot = find_free_slot();
  slots_[slot] = Slot{req, kNone};
  set_occupied(slot, true);
  ++live_requests_;

  if (entry != nullptr) {
    slots_[entry->tail].next = slot;
    entry->tail = slot;
    ++entry->count;
  } else {
    const std::uint32_t idx = set * cfg_.ways + new_way;
    page_list_[idx] = PageEntry{page, slot, slot, 1, false, true};
    order_q_[(order_head_ + order_size_) % order_q_.size()] = idx;
    ++order_size_;
  }
  return InsertResult::accepted;
}

const MemoryRequest* ReorderBuffer::peek() const {
  if (order_size_ == 0) return nullptr;
  const PageEntry& e = page_list_[order_q_[order_head_]];
  return &slots_[e.head].req;
}

MemoryRequest ReorderBuffer::commit_forward() {
  if (order_size_ == 0) throw SimError("reorder: commit_forward on empty buffer");
  const std::uint32_t idx = order_q_[order_head_];
  PageEntry& e = page_list_[idx];

  const std::uint32_t slot = e.head;
  MemoryRequest req = slots_[slot].req;
  e.draining = true;
  e.head = slots_[slot].next;
  --e.count;
  set_occupied(slot, false);
  --live_requests_;
  ++head_run_;

  if (e.count == 0) {
    e.valid = false;
    order_head_ = (order_head_ + 1) % static_cast<std::uint32_t>(order_q_.size());
    --order_size_;
    head_run_ = 0;
  } else if (cfg_.drain_cap != 0 && head_run_ >= cfg_.drain_cap) {
    // Starvation guard: rotate the entry to the PhyPageOrderQ tail.
    order_head_ = (order_head_ + 1) % static_cast<std::uint32_t>(order_q_.size());
    order_q_[(order_head_ + order_size_ - 1) % order_q_.size()] = idx;
    head_run_ = 0;
  }
  return req;
}

std::string ReorderBuffer::snapshot() const {
  std::ostringstream os;
  os << "reorder live_requests=" << live_requests_ << " live_pages=" << order_size_ << "\n";
  for (std::uint32_t i = 0; i < order_size_; ++i) {
    const std::uint32_t idx = order_q_[(order_head_ + i) % order_q_.size()];
    const PageEntry& e = page_list_[idx];
    os << i << ": page=0x" << std::hex << e.page << std::dec << " count=" << e.count
       << " draining=" << (e.draining ? 1 : 0) << " slots=[";
    for (std::uint32_t s = e.head; s != kNone; s = slots_[s].next) {
      os << s << (slots_[s].next != kNone ? "," : "");
    }
    os << "]\n";
  }
  return os.str();
}

void ReorderBuffer::check_invariants() const {
  std::uint32_t popcount = 0;
  for (std::uint64_t w : occupancy_) popcount += static_cast<std::uint32_t>(std::popcount(w));
  if (popcount != live_requests_) {
    throw SimError("reorder invariant: occupancy popcount != live request count");
  }

  std::vector<std::uint8_t> reached(slots_.size(), 0);
  std::uint32_t total = 0;
  std::uint32_t valid_entries = 0;
  for (const PageEntry& e : page_list_) {
    if (!e.valid) continue;
    ++valid_entries;
    if (e.count == 0) throw SimError("reorder invariant: valid entry with count 0");
    std::uint32_t n = 0;
    std::uint32_t s = e.head;
    std::uint32_t last = kNone;
    while (s != kNone) {
      if (reached[s]++) throw SimError("reorder invariant: slot reached from two chains");
      const std::uint64_t page = slots_[s].req.addr.value >> cfg_.page_offset_bits;
      if (page != e.page) throw SimError("reorder invariant: chained slot on wrong page");
      if (++n > e.count) throw SimError("reorder invariant: chain longer than entry count");
      last = s;
      s = slots_[s].next;
    }
    if (n != e.count) throw SimError("reorder invariant: chain shorter than entry count");
    if (last != e.tail) throw SimError("reorder invariant: chain does not end at tail");
    total += n;
  }
  if (total != live_requests_) {
    throw SimError("reorder invariant: sum of entry counts != live request count");
  }
  if (valid_entries != order_size_) {
    throw SimError("reorder invariant: valid entry count != PhyPageOrderQ size");
  }
  for (std::uint32_t i = 0; i < slots_.size(); ++i) {
    const bool occupied = (occupancy_[i / 64] >> (i % 64)) & 1;
    if (occupied != (reached[i] != 0)) {
      throw SimError("reorder invariant: occupancy bit disagrees with chain reachability");
    }
  }
  std::vector<std::uint8_t> queued(page_list_.size(), 0);
  for (std::uint32_t i = 0; i < order_size_; ++i) {
    const std::uint32_t idx = order_q_[(order_head_ + i) % order_q_.size()];
    if (!page_list_[idx].valid) throw SimError("reorder invariant: PhyPageOrderQ holds invalid entry");
    if (queued[idx]++) throw SimError("reorder invariant: entry queued twice in PhyPageOrderQ");
  }
}

ReorderRunResult run_reorder(ReorderBuffer& rb, std::span<const MemoryRequest> input,
                             const CreditFn& credits, std::uint64_t max_ticks) {
  ReorderRunResult res;
  res.output.reserve(input.size());
  while (res.accepted < input.size() || !rb.empty()) {
    if (max_ticks != 0 && res.ticks >= max_ticks) return res;
    for (std::uint32_t i = 0; i < rb.config().insert_rate && res.accepted < input.size(); ++i) {
      if (is_stall(rb.try_insert(input[res.accepted]))) break;
      ++res.accepted;
    }
    std::uint32_t grant = credits(res.ticks);
    for (std::uint32_t i = 0; i < rb.config().forward_rate && grant > 0; ++i, --grant) {
      auto req = rb.forward();
      if (!req) break;
      res.output.push_back(*req);
    }
    ++res.ticks;
  }
  res.completed = true;
  return res;
}

ReorderRunResult baseline_passthrough(std::span<const MemoryRequest> input, const CreditFn& credits,
                                      std::uint32_t forward_rate, std::uint64_t max_ticks) {
  ReorderRunResult res;
  res.output.reserve(input.size());
  while (res.accepted < input.size()) {
    if (max_ticks != 0 && res.ticks >= max_ticks) return res;
    std::uint32_t grant = credits(res.ticks);
    for (std::uint32_t i = 0; i < forward_rate && grant > 0 && res.accepted < input.size();
         ++i, --grant) {
      res.output.push_back(input[res.accepted]);
      ++res.accepted;
    }
    ++res.ticks;
  }
  res.completed = true;
  return res;
}

}  // namespace mars
