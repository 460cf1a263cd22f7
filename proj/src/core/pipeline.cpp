#include "core/pipeline.hpp"

#include <algorithm>
#include <utility>

namespace mars {

PassthroughFeeder::PassthroughFeeder(std::vector<MemoryRequest> input, std::uint32_t rate)
    : input_(std::move(input)), rate_(rate) {
  forwarded_.reserve(input_.size());
}

void PassthroughFeeder::tick(MemoryController& mc) {
  for (std::uint32_t k = 0; k < rate_ && next_ < input_.size(); ++k) {
    if (!mc.try_admit(input_[next_])) break;
    forwarded_.push_back(input_[next_]);
    ++next_;
  }
}

bool PassthroughFeeder::exhausted() const { return next_ == input_.size(); }

ReorderFeeder::ReorderFeeder(std::vector<MemoryRequest> input, const ReorderConfig& cfg)
    : input_(std::move(input)), cfg_(cfg), rb_(cfg) {
  forwarded_.reserve(input_.size());
}

void ReorderFeeder::tick(MemoryController& mc) {
  for (std::uint32_t k = 0; k < cfg_.insert_rate && next_ < input_.size(); ++k) {
    InsertResult r = rb_.try_insert(input_[next_]);
    if (r == InsertResult::accepted) {
      ++next_;
      continue;
    }
    switch (r) {
      case InsertResult::queue_full: stats_.stall_queue_full++; break;
      case InsertResult::set_conflict: stats_.stall_set_conflict++; break;
      case InsertResult::order_q_full: stats_.stall_order_q_full++; break;
      case InsertResult::page_draining: stats_.stall_page_draining++; break;
      case InsertResult::accepted: break;
    }
    break;
  }
  stats_.peak_occupancy = std::max<std::uint64_t>(stats_.peak_occupancy, rb_.size());
  stats_.peak_live_pages = std::max<std::uint64_t>(stats_.peak_live_pages, rb_.live_pages());
  for (std::uint32_t k = 0; k < cfg_.forward_rate; ++k) {
    const MemoryRequest* head = rb_.peek();
    if (head == nullptr || !mc.try_admit(*head)) break;
    forwarded_.push_back(rb_.commit_forward());
  }
}

bool ReorderFeeder::exhausted() const { return next_ == input_.size() && rb_.empty(); }

}  // namespace mars
