#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "core/addressing.hpp"
#include "core/request.hpp"

namespace mars {

// Open-page DRAM device and controller parameters. Only the timings that
// row-buffer reuse acts through are modeled (tCAS/tRCD/tRP plus burst
// occupancy); tRAS, tWR, tFAW, refresh and bus turnaround are out of scope.
struct DramConfig {
  std::uint32_t channels = 2;
  std::uint32_t ranks_per_channel = 1;
  std::uint32_t banks = 8;  // per rank
  std::uint64_t rows = 65536;
  std::uint64_t columns = 1024;
  std::uint32_t t_cas = 15;
  std::uint32_t t_rcd = 15;
  std::uint32_t t_rp = 15;
  std::uint32_t burst_length = 8;
  std::uint32_t bus_bytes_per_beat = 2;
  std::uint32_t pending_queue_depth = 16;

  // Double data rate: burst_length beats occupy burst_length/2 bus cycles.
  std::uint32_t data_cycles_per_cas() const { return burst_length / 2; }
  std::uint32_t bytes_per_cas() const { return burst_length * bus_bytes_per_beat; }

  void validate() const;
  MapDimensions map_dimensions(unsigned addr_bits = 36) const;
};

enum class CommandKind : std::uint8_t { ACT, RD, WR, PRE };

const char* command_kind_name(CommandKind k);

constexpr std::uint64_t kNoSeq = std::numeric_limits<std::uint64_t>::max();

struct DramCommand {
  CommandKind kind;
  DramCoordinate coord;       // for PRE: the row being closed, column 0
  std::uint64_t issue_cycle;
  std::uint64_t seq = kNoSeq; // request seq for RD/WR only
};

struct ChannelCounters {
  std::uint64_t act_count = 0;
  std::uint64_t read_count = 0;
  std::uint64_t write_count = 0;
  std::uint64_t pre_count = 0;
  std::uint64_t data_busy_cycles = 0;

  std::uint64_t cas_count() const { return read_count + write_count; }
};

// Per-channel FR-FCFS memory controller over banked open-page DRAM.
// One command per channel per cycle; channels advance in index order.
class MemoryController {
 public:
  MemoryController(const DramConfig& cfg, const MemoryMap& map, bool record_trace = true);

  // Appends to the target channel's pending queue iff depth allows.
  // A false return is the backpressure credit signal for the feeder.
  bool try_admit(const MemoryRequest& req);

  // Whether the request's channel currently has queue room.
  bool can_admit(const MemoryRequest& req) const;

  void tick(std::uint64_t cycle);

  bool drained() const;                  // all pending queues empty
  std::uint64_t data_end_cycle() const;  // cycle after the last data beat

  const std::vector<ChannelCounters>& counters() const { return counters_; }
  const std::vector<DramCommand>& trace() const { return trace_; }

 private:
  struct Pending {
    MemoryRequest req;
    DramCoordinate coord;
  };
  struct Bank {
    bool active = false;
    std::uint64_t open_row = 0;
    std::uint64_t ready_at = 0;  // no command to this bank before this cycle
  };
  struct Channel {
    std::deque<Pending> queue;
    std::vector<Bank> banks;        // ranks * banks, rank-major
    std::uint64_t next_cas_at = 0;  // data-bus exclusivity
    std::uint64_t data_end = 0;
  };

  Bank& bank_for(Channel& ch, const DramCoordinate& c) {
    return ch.banks[c.rank * cfg_.banks + c.bank];
  }
  void schedule_channel(std::uint32_t ch_idx, std::uint64_t cycle);
  void record(CommandKind kind, const DramCoordinate& coord, std::uint64_t cycle,
              std::uint64_t seq = kNoSeq);

  DramConfig cfg_;
  MemoryMap map_;
  bool record_trace_;
  std::vector<Channel> channels_;
  std::vector<ChannelCounters> counters_;
  std::vector<DramCommand> trace_;
};

// Upstream of the controller: per cycle, pushes whatever requests it can
// get admitted (the baseline head, or the reorder stage's forwards).
class RequestFeeder {
 public:
  virtual ~RequestFeeder() = default;
  virtual void tick(MemoryController& mc) = 0;
  virtual bool exhausted() const = 0;
  // Requests in the order they were admitted downstream.
  virtual const std::vector<MemoryRequest>& forwarded() const = 0;
};

struct SimulationResult {
  std::vector<DramCommand> trace;
  std::vector<ChannelCounters> channels;
  std::uint64_t total_cycles = 0;
  std::uint64_t request_count = 0;
};

// Advance cycles until the feeder is exhausted and every queue and burst
// has drained. Deterministic: feeder first, then channels in index order.
SimulationResult simulate(const DramConfig& cfg, const MemoryMap& map, RequestFeeder& feeder,
                          bool record_trace = true);

// Command trace files: `cycle,channel,bank,kind,row,column,seq`, where bank
// is flattened rank*banks+bank and seq is `-` for ACT/PRE.
struct TraceRow {
  std::uint64_t cycle;
  std::uint64_t channel;
  std::uint64_t bank;
  CommandKind kind;
  std::uint64_t row;
  std::uint64_t column;
  std::uint64_t seq;  // kNoSeq when absent
};

void write_command_trace(std::ostream& os, const std::vector<DramCommand>& trace,
                         const DramConfig& cfg);
void write_command_trace_file(const std::string& path, const std::vector<DramCommand>& trace,
                              const DramConfig& cfg);
std::vector<TraceRow> read_command_trace(std::istream& is);
std::vector<TraceRow> read_command_trace_file(const std::string& path);

// Per-bank protocol and timing legality: command sequence must match
// (ACT (RD|WR)+ PRE)* with t_rcd respected between ACT and the first CAS,
// t_rp between PRE and the next ACT, and CAS issues on one channel spaced
// by at least burst_length/2 cycles. Returns human-readable violations.
std::vector<std::string> check_trace(const std::vector<TraceRow>& rows, const DramConfig& cfg);

}  // namespace mars
