#include "core/dram.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace mars {
namespace {

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_u64(const std::string& text, std::size_t line_no, const char* what) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw IoError("command trace line " + std::to_string(line_no) + ": bad " + what + " '" +
                  text + "'");
  }
  return value;
}

}  // namespace

void DramConfig::validate() const {
  if (!is_pow2(channels)) throw ConfigError("dram.channels must be a power of two");
  if (!is_pow2(ranks_per_channel)) throw ConfigError("dram.ranks_per_channel must be a power of two");
  if (!is_pow2(banks)) throw ConfigError("dram.banks must be a power of two");
  if (!is_pow2(rows)) throw ConfigError("dram.rows must be a power of two");
  if (!is_pow2(columns)) throw ConfigError("dram.columns must be a power of two");
  if (t_cas == 0 || t_rcd == 0 || t_rp == 0) throw ConfigError("dram timings must be positive");
  if (burst_length < 2 || burst_length % 2 != 0) {
    throw ConfigError("dram.burst_length must be even and at least 2");
  }
  if (bus_bytes_per_beat == 0) throw ConfigError("dram.bus_bytes_per_beat must be positive");
  if (pending_queue_depth == 0) throw ConfigError("dram.pending_queue_depth must be positive");
}

MapDimensions DramConfig::map_dimensions(unsigned addr_bits) const {
  MapDimensions dims;
  dims.addr_bits = addr_bits;
  dims.channels = channels;
  dims.ranks = ranks_per_channel;
  dims.banks = banks;
  dims.columns = columns;
  return dims;
}

const char* command_kind_name(CommandKind k) {
  switch (k) {
    case CommandKind::ACT: return "ACT";
    case CommandKind::RD: return "RD";
    case CommandKind::WR: return "WR";
    case CommandKind::PRE: return "PRE";
  }
  return "?";
}

MemoryController::MemoryController(const DramConfig& cfg, const MemoryMap& map, bool record_trace)
    : cfg_(cfg), map_(map), record_trace_(record_trace) {
  cfg_.validate();
  map_.validate();
  if (map_.channels() != cfg_.channels || map_.ranks() != cfg_.ranks_per_channel ||
      map_.banks() != cfg_.banks || map_.rows() != cfg_.rows || map_.columns() != cfg_.columns) {
    throw ConfigError("memory map geometry does not match dram geometry");
  }
  channels_.resize(cfg_.channels);
  for (auto& ch : channels_) ch.banks.resize(cfg_.ranks_per_channel * cfg_.banks);
  counters_.resize(cfg_.channels);
}

bool MemoryController::can_admit(const MemoryRequest& req) const {
  DramCoordinate coord = decode(req.addr, map_);
  return channels_[coord.channel].queue.size() < cfg_.pending_queue_depth;
}

bool MemoryController::try_admit(const MemoryRequest& req) {
  DramCoordinate coord = decode(req.addr, map_);
  Channel& ch = channels_[coord.channel];
  if (ch.queue.size() >= cfg_.pending_queue_depth) return false;
  ch.queue.push_back(Pending{req, coord});
  return true;
}

void MemoryController::record(CommandKind kind, const DramCoordinate& coord, std::uint64_t cycle,
                              std::uint64_t seq) {
  ChannelCounters& c = counters_[coord.channel];
  switch (kind) {
    case CommandKind::ACT: c.act_count++; break;
    case CommandKind::RD: c.read_count++; break;
    case CommandKind::WR: c.write_count++; break;
    case CommandKind::PRE: c.pre_count++; break;
  }
  if (record_trace_) trace_.push_back(DramCommand{kind, coord, cycle, seq});
}

void MemoryController::schedule_channel(std::uint32_t ch_idx, std::uint64_t cycle) {
  Channel& ch = channels_[ch_idx];
  if (ch.queue.empty()) return;

  // First-ready: oldest issuable row hit wins. A hit that is merely waiting
  // on tRCD or on the data bus still suppresses precharge of its row.
  bool any_hit = false;
  std::size_t pick = ch.queue.size();
  for (std::size_t i = 0; i < ch.queue.size(); ++i) {
    const Pending& p = ch.queue[i];
    Bank& b = bank_for(ch, p.coord);
    if (b.active && b.open_row == p.coord.row) {
      any_hit = true;
      if (cycle >= b.ready_at && cycle >= ch.next_cas_at) {
        pick = i;
        break;
      }
    }
  }
  if (pick < ch.queue.size()) {
    Pending p = ch.queue[pick];
    ch.queue.erase(ch.queue.begin() + static_cast<std::ptrdiff_t>(pick));
    CommandKind kind = p.req.is_write ? CommandKind::WR : CommandKind::RD;
    record(kind, p.coord, cycle, p.req.seq);
    ch.next_cas_at = cycle + cfg_.data_cycles_per_cas();
    ch.data_end = std::max(ch.data_end, cycle + cfg_.t_cas + cfg_.data_cycles_per_cas());
    counters_[ch_idx].data_busy_cycles += cfg_.data_cycles_per_cas();
    return;
  }
  if (any_hit) return;

  // FCFS half: only the oldest request may open or close a row.
  const Pending& front = ch.queue.front();
  Bank& b = bank_for(ch, front.coord);
  if (cycle < b.ready_at) return;
  if (b.active) {
    DramCoordinate closed = front.coord;
    closed.row = b.open_row;
    closed.column = 0;
    record(CommandKind::PRE, closed, cycle);
    b.active = false;
    b.ready_at = cycle + cfg_.t_rp;
  } else {
    DramCoordinate opened = front.coord;
    opened.column = 0;
    record(CommandKind::ACT, opened, cycle);
    b.active = true;
    b.open_row = front.coord.row;
    b.ready_at = cycle + cfg_.t_rcd;
  }
}

void MemoryController::tick(std::uint64_t cycle) {
  for (std::uint32_t ch = 0; ch < cfg_.channels; ++ch) schedule_channel(ch, cycle);
}

bool MemoryController::drained() const {
  for (const auto& ch : channels_) {
    if (!ch.queue.empty()) return false;
  }
  return true;
}

std::uint64_t MemoryController::data_end_cycle() const {
  std::uint64_t end = 0;
  for (const auto& ch : channels_) end = std::max(end, ch.data_end);
  return end;
}

SimulationResult simulate(const DramConfig& cfg, const MemoryMap& map, RequestFeeder& feeder,
                          bool record_trace) {
  MemoryController mc(cfg, map, record_trace);
  std::uint64_t cycle = 0;
  std::uint64_t last_progress = 0;
  std::uint64_t idle_cycles = 0;
  constexpr std::uint64_t kStallLimit = 1u << 20;
  while (!(feeder.exhausted() && mc.drained())) {
    feeder.tick(mc);
    mc.tick(cycle);
    std::uint64_t commands = 0;
    for (const auto& c : mc.counters()) {
      commands += c.act_count + c.read_count + c.write_count + c.pre_count;
    }
    std::uint64_t progress = commands + feeder.forwarded().size();
    if (progress == last_progress) {
      if (++idle_cycles > kStallLimit) throw SimError("simulation made no progress");
    } else {
      last_progress = progress;
      idle_cycles = 0;
    }
    ++cycle;
  }
  SimulationResult result;
  result.trace = mc.trace();
  result.channels = mc.counters();
  result.total_cycles = std::max(cycle, mc.data_end_cycle());
  result.request_count = feeder.forwarded().size();
  return result;
}

void write_command_trace(std::ostream& os, const std::vector<DramCommand>& trace,
                         const DramConfig& cfg) {
  os << "cycle,channel,bank,kind,row,column,seq\n";
  for (const DramCommand& cmd : trace) {
    std::uint64_t flat_bank = cmd.coord.rank * cfg.banks + cmd.coord.bank;
    os << cmd.issue_cycle << ',' << cmd.coord.channel << ',' << flat_bank << ','
       << command_kind_name(cmd.kind) << ',' << cmd.coord.row << ',' << cmd.coord.column << ',';
    if (cmd.seq == kNoSeq) {
      os << '-';
    } else {
      os << cmd.seq;
    }
    os << '\n';
  }
}

void write_command_trace_file(const std::string& path, const std::vector<DramCommand>& trace,
                              const DramConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for write: " + path);
  write_command_trace(os, trace, cfg);
  if (!os) throw IoError("write failed: " + path);
}

std::vector<TraceRow> read_command_trace(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "cycle,channel,bank,kind,row,column,seq") {
    throw IoError("command trace: missing or bad header");
  }
  std::vector<TraceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 7) {
      throw IoError("command trace line " + std::to_string(line_no) + ": expected 7 fields");
    }
    TraceRow row;
    row.cycle = parse_u64(fields[0], line_no, "cycle");
    row.channel = parse_u64(fields[1], line_no, "channel");
    row.bank = parse_u64(fields[2], line_no, "bank");
    if (fields[3] == "ACT") {
      row.kind = CommandKind::ACT;
    } else if (fields[3] == "RD") {
      row.kind = CommandKind::RD;
    } else if (fields[3] == "WR") {
      row.kind = CommandKind::WR;
    } else if (fields[3] == "PRE") {
      row.kind = CommandKind::PRE;
    } else {
      throw IoError("command trace line " + std::to_string(line_no) + ": bad kind '" + fields[3] +
                    "'");
    }
    row.row = parse_u64(fields[4], line_no, "row");
    row.column = parse_u64(fields[5], line_no, "column");
    row.seq = fields[6] == "-" ? kNoSeq : parse_u64(fields[6], line_no, "seq");
    rows.push_back(row);
  }
  return rows;
}

std::vector<TraceRow> read_command_trace_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  return read_command_trace(is);
}

std::vector<std::string> check_trace(const std::vector<TraceRow>& rows, const DramConfig& cfg) {
  std::vector<std::string> violations;
  auto complain = [&](const TraceRow& r, const std::string& what) {
    std::ostringstream os;
    os << "cycle " << r.cycle << " ch " << r.channel << " bank " << r.bank << ": " << what;
    violations.push_back(os.str());
  };

  struct BankState {
    bool active = false;
    std::uint64_t open_row = 0;
    std::uint64_t act_cycle = 0;
    bool has_pre = false;
    std::uint64_t pre_cycle = 0;
  };
  struct ChannelState {
    bool has_last = false;
    std::uint64_t last_cycle = 0;
    bool has_cas = false;
    std::uint64_t last_cas = 0;
    std::vector<BankState> banks;
  };
  std::uint64_t bank_count = static_cast<std::uint64_t>(cfg.ranks_per_channel) * cfg.banks;
  std::vector<ChannelState> channels(cfg.channels);
  for (auto& ch : channels) ch.banks.resize(bank_count);

  for (const TraceRow& r : rows) {
    if (r.channel >= cfg.channels) {
      complain(r, "channel out of range");
      continue;
    }
    if (r.bank >= bank_count) {
      complain(r, "bank out of range");
      continue;
    }
    ChannelState& ch = channels[r.channel];
    BankState& b = ch.banks[r.bank];
    if (ch.has_last && r.cycle <= ch.last_cycle) {
      complain(r, "more than one command on the channel in a cycle");
    }
    ch.has_last = true;
    ch.last_cycle = std::max(ch.last_cycle, r.cycle);
    if (r.row >= cfg.rows) complain(r, "row out of range");
    if (r.column >= cfg.columns) complain(r, "column out of range");

    switch (r.kind) {
      case CommandKind::ACT:
        if (b.active) complain(r, "ACT while a row is open");
        if (b.has_pre && r.cycle < b.pre_cycle + cfg.t_rp) complain(r, "ACT violates tRP");
        b.active = true;
        b.open_row = r.row;
        b.act_cycle = r.cycle;
        break;
      case CommandKind::RD:
      case CommandKind::WR:
        if (!b.active) {
          complain(r, "CAS with no open row");
        } else {
          if (r.row != b.open_row) complain(r, "CAS row does not match the open row");
          if (r.cycle < b.act_cycle + cfg.t_rcd) complain(r, "CAS violates tRCD");
        }
        if (ch.has_cas && r.cycle < ch.last_cas + cfg.data_cycles_per_cas()) {
          complain(r, "CAS overlaps the previous burst");
        }
        ch.has_cas = true;
        ch.last_cas = r.cycle;
        break;
      case CommandKind::PRE:
        if (!b.active) complain(r, "PRE with no open row");
        b.active = false;
        b.has_pre = true;
        b.pre_cycle = r.cycle;
        break;
    }
  }
  return violations;
}

}  // namespace mars
