#pragma once

#include <cstdint>
#include <vector>

#include "core/dram.hpp"
#include "core/reorder.hpp"

namespace mars {

// Baseline front end: offers requests to the controller strictly in stream
// order, up to `rate` per cycle, head-of-line blocked on channel queue room.
class PassthroughFeeder : public RequestFeeder {
 public:
  explicit PassthroughFeeder(std::vector<MemoryRequest> input, std::uint32_t rate = 1);

  void tick(MemoryController& mc) override;
  bool exhausted() const override;
  const std::vector<MemoryRequest>& forwarded() const override { return forwarded_; }

 private:
  std::vector<MemoryRequest> input_;
  std::size_t next_ = 0;
  std::uint32_t rate_;
  std::vector<MemoryRequest> forwarded_;
};

struct ReorderStats {
  std::uint64_t stall_queue_full = 0;
  std::uint64_t stall_set_conflict = 0;
  std::uint64_t stall_order_q_full = 0;
  std::uint64_t stall_page_draining = 0;
  std::uint64_t peak_occupancy = 0;
  std::uint64_t peak_live_pages = 0;

  std::uint64_t stall_total() const {
    return stall_queue_full + stall_set_conflict + stall_order_q_full + stall_page_draining;
  }
};

// MARS front end: inserts into the reorder buffer, then forwards page-grouped
// requests, all within one cycle. A forward commits only once the controller
// accepts it, so downstream backpressure holds requests in the buffer.
class ReorderFeeder : public RequestFeeder {
 public:
  ReorderFeeder(std::vector<MemoryRequest> input, const ReorderConfig& cfg);

  void tick(MemoryController& mc) override;
  bool exhausted() const override;
  const std::vector<MemoryRequest>& forwarded() const override { return forwarded_; }

  const ReorderStats& stats() const { return stats_; }
  const ReorderBuffer& buffer() const { return rb_; }

 private:
  std::vector<MemoryRequest> input_;
  std::size_t next_ = 0;
  ReorderConfig cfg_;
  ReorderBuffer rb_;
  std::vector<MemoryRequest> forwarded_;
  ReorderStats stats_;
};

}  // namespace mars
