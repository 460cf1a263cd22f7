#include "core/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "core/digest.hpp"
#include "core/errors.hpp"

namespace mars {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& what,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(what + ": unknown key '" + it.key() + "'");
  }
}

const json& get_section(const json& obj, const char* key, json& storage) {
  if (!obj.contains(key)) {
    storage = json::object();
    return storage;
  }
  const json& sec = obj.at(key);
  if (!sec.is_object()) throw ConfigError(std::string(key) + " must be an object");
  return sec;
}

std::uint64_t as_u64(const json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    auto s = v.get<std::int64_t>();
    if (s < 0) throw ConfigError(what + " must be non-negative");
    return static_cast<std::uint64_t>(s);
  }
  throw ConfigError(what + " must be an integer");
}

std::uint32_t as_u32(const json& v, const std::string& what) {
  std::uint64_t u = as_u64(v, what);
  if (u > std::numeric_limits<std::uint32_t>::max()) throw ConfigError(what + " is too large");
  return static_cast<std::uint32_t>(u);
}

unsigned as_bits(const json& v, const std::string& what) {
  std::uint64_t u = as_u64(v, what);
  if (u > 64) throw ConfigError(what + " is too large");
  return static_cast<unsigned>(u);
}

double as_double(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& what) {
  if (!v.is_string()) throw ConfigError(what + " must be a string");
  return v.get<std::string>();
}

std::vector<std::uint64_t> as_u64_list(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array");
  std::vector<std::uint64_t> out;
  for (const json& item : v) out.push_back(as_u64(item, what + " element"));
  return out;
}

std::vector<unsigned> as_bit_list(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array");
  std::vector<unsigned> out;
  for (const json& item : v) out.push_back(as_bits(item, what + " element"));
  return out;
}

StreamSpec parse_stream(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be an object");
  check_keys(j, what,
             {"stream_kind", "read_fraction", "base_page", "pages_per_source",
              "requests_per_page", "page_stride", "intra_page_order", "intra_page_stride"});
  if (!j.contains("stream_kind")) throw ConfigError(what + ": stream_kind is required");
  StreamSpec s;
  s.stream_kind = stream_kind_from_name(as_string(j.at("stream_kind"), what + ".stream_kind"));
  s.base_page = stream_region_base(s.stream_kind);
  if (j.contains("read_fraction"))
    s.read_fraction = as_double(j.at("read_fraction"), what + ".read_fraction");
  if (j.contains("base_page")) s.base_page = as_u64(j.at("base_page"), what + ".base_page");
  if (j.contains("pages_per_source"))
    s.pages_per_source = as_u64(j.at("pages_per_source"), what + ".pages_per_source");
  else
    s.pages_per_source = 8;
  if (j.contains("requests_per_page"))
    s.requests_per_page = as_u64(j.at("requests_per_page"), what + ".requests_per_page");
  else
    s.requests_per_page = 64;
  if (j.contains("page_stride")) s.page_stride = as_u64(j.at("page_stride"), what + ".page_stride");
  if (j.contains("intra_page_order"))
    s.intra_page_order =
        intra_page_order_from_name(as_string(j.at("intra_page_order"), what + ".intra_page_order"));
  if (j.contains("intra_page_stride"))
    s.intra_page_stride = as_u64(j.at("intra_page_stride"), what + ".intra_page_stride");
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  workload.validate();
  reorder.validate();
  dram.validate();
  map.validate();
  if (map.channels() != dram.channels || map.ranks() != dram.ranks_per_channel ||
      map.banks() != dram.banks || map.rows() != dram.rows || map.columns() != dram.columns) {
    throw ConfigError("memory_map geometry does not match the dram geometry");
  }
  if (page_offset_bits() < map.burst_offset_bits || page_offset_bits() >= map.addr_bits) {
    throw ConfigError("mars.page_offset_bits must lie between the burst offset width and addr_bits");
  }
  if (windows.empty()) throw ConfigError("locality.windows must not be empty");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i] == 0) throw ConfigError("locality.windows entries must be positive");
    if (i > 0 && windows[i] <= windows[i - 1]) {
      throw ConfigError("locality.windows must be strictly increasing");
    }
  }
  if (taps.empty()) throw ConfigError("locality.taps must not be empty");
  for (const std::string& tap : taps) {
    if (tap != "source" && tap != "merge" && tap != "mars") {
      throw ConfigError("locality.taps: unknown tap '" + tap + "'");
    }
  }
  for (std::size_t i = 0; i < taps.size(); ++i) {
    for (std::size_t k = i + 1; k < taps.size(); ++k) {
      if (taps[i] == taps[k]) throw ConfigError("locality.taps: duplicate tap '" + taps[i] + "'");
    }
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  // Mirrors the loader schema, so load_config(to_json()) reproduces the
  // config (and its digest) exactly.
  json j;
  j["name"] = name;
  j["seed"] = seed;
  json& tree = j["merge_tree"];
  tree["leaves"] = workload.tree.leaves;
  tree["fanouts"] = workload.tree.fanouts;
  tree["arbitration"] = arbitration_name(workload.tree.arbitration);
  json streams = json::array();
  for (const StreamSpec& s : workload.per_leaf) {
    json js;
    js["stream_kind"] = stream_kind_name(s.stream_kind);
    js["read_fraction"] = s.read_fraction;
    js["base_page"] = s.base_page;
    js["pages_per_source"] = s.pages_per_source;
    js["requests_per_page"] = s.requests_per_page;
    js["page_stride"] = s.page_stride;
    js["intra_page_order"] = intra_page_order_name(s.intra_page_order);
    js["intra_page_stride"] = s.intra_page_stride;
    streams.push_back(js);
  }
  j["workload"]["streams"] = streams;
  json& m = j["mars"];
  m["request_q"] = reorder.request_q;
  m["sets"] = reorder.sets;
  m["ways"] = reorder.ways;
  m["insert_rate"] = reorder.insert_rate;
  m["forward_rate"] = reorder.forward_rate;
  m["drain_cap"] = reorder.drain_cap;
  json& d = j["dram"];
  d["channels"] = dram.channels;
  d["ranks_per_channel"] = dram.ranks_per_channel;
  d["banks"] = dram.banks;
  d["rows"] = dram.rows;
  d["columns"] = dram.columns;
  d["t_cas"] = dram.t_cas;
  d["t_rcd"] = dram.t_rcd;
  d["t_rp"] = dram.t_rp;
  d["burst_length"] = dram.burst_length;
  d["bus_bytes_per_beat"] = dram.bus_bytes_per_beat;
  d["pending_queue_depth"] = dram.pending_queue_depth;
  json& mm = j["memory_map"];
  mm["addr_bits"] = map.addr_bits;
  mm["page_offset_bits"] = reorder.page_offset_bits;
  mm["burst_offset_bits"] = map.burst_offset_bits;
  mm["channel_bits"] = map.channel_bits;
  mm["rank_bits"] = map.rank_bits;
  mm["bank_bits"] = map.bank_bits;
  mm["row_bits"] = map.row_bits;
  mm["column_bits"] = map.column_bits;
  json& loc = j["locality"];
  loc["windows"] = windows;
  loc["taps"] = taps;
  return j;
}

std::string ExperimentConfig::digest() const { return fnv1a_hex(to_json().dump()); }

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.name = "wl1";
  cfg.workload = workload_preset("WL1", WorkloadScale{});
  cfg.map = make_page_contiguous_map(cfg.dram.map_dimensions());
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j, "config",
             {"name", "workload", "merge_tree", "mars", "dram", "memory_map", "seed", "locality",
              "output_dir"});
  ExperimentConfig cfg;

  json storage;
  const json& dram = get_section(j, "dram", storage);
  check_keys(dram, "dram",
             {"channels", "ranks_per_channel", "banks", "rows", "columns", "t_cas", "t_rcd",
              "t_rp", "burst_length", "bus_bytes_per_beat", "pending_queue_depth"});
  if (dram.contains("channels")) cfg.dram.channels = as_u32(dram.at("channels"), "dram.channels");
  if (dram.contains("ranks_per_channel"))
    cfg.dram.ranks_per_channel = as_u32(dram.at("ranks_per_channel"), "dram.ranks_per_channel");
  if (dram.contains("banks")) cfg.dram.banks = as_u32(dram.at("banks"), "dram.banks");
  if (dram.contains("rows")) cfg.dram.rows = as_u64(dram.at("rows"), "dram.rows");
  if (dram.contains("columns")) cfg.dram.columns = as_u64(dram.at("columns"), "dram.columns");
  if (dram.contains("t_cas")) cfg.dram.t_cas = as_u32(dram.at("t_cas"), "dram.t_cas");
  if (dram.contains("t_rcd")) cfg.dram.t_rcd = as_u32(dram.at("t_rcd"), "dram.t_rcd");
  if (dram.contains("t_rp")) cfg.dram.t_rp = as_u32(dram.at("t_rp"), "dram.t_rp");
  if (dram.contains("burst_length"))
    cfg.dram.burst_length = as_u32(dram.at("burst_length"), "dram.burst_length");
  if (dram.contains("bus_bytes_per_beat"))
    cfg.dram.bus_bytes_per_beat = as_u32(dram.at("bus_bytes_per_beat"), "dram.bus_bytes_per_beat");
  if (dram.contains("pending_queue_depth"))
    cfg.dram.pending_queue_depth =
        as_u32(dram.at("pending_queue_depth"), "dram.pending_queue_depth");
  cfg.dram.validate();

  json tree_storage;
  const json& tree = get_section(j, "merge_tree", tree_storage);
  check_keys(tree, "merge_tree", {"leaves", "fanouts", "arbitration"});
  MergeTreeSpec tree_spec;
  tree_spec.leaves = 64;
  tree_spec.fanouts = {8, 8};
  if (tree.contains("leaves")) tree_spec.leaves = as_u64(tree.at("leaves"), "merge_tree.leaves");
  if (tree.contains("fanouts"))
    tree_spec.fanouts = as_u64_list(tree.at("fanouts"), "merge_tree.fanouts");
  else if (tree.contains("leaves"))
    tree_spec.fanouts = {tree_spec.leaves};  // flat tree unless shaped explicitly
  if (tree.contains("arbitration"))
    tree_spec.arbitration =
        arbitration_from_name(as_string(tree.at("arbitration"), "merge_tree.arbitration"));

  json wl_storage;
  const json& wl = get_section(j, "workload", wl_storage);
  check_keys(wl, "workload",
             {"preset", "streams", "pages_per_source", "requests_per_page", "page_stride"});
  bool has_preset = wl.contains("preset");
  bool has_streams = wl.contains("streams");
  if (has_preset == has_streams) {
    throw ConfigError("workload needs exactly one of 'preset' or 'streams'");
  }
  if (has_preset) {
    WorkloadScale scale;
    scale.leaves = tree_spec.leaves;
    scale.fanouts = tree_spec.fanouts;
    if (wl.contains("pages_per_source"))
      scale.pages_per_source = as_u64(wl.at("pages_per_source"), "workload.pages_per_source");
    if (wl.contains("requests_per_page"))
      scale.requests_per_page = as_u64(wl.at("requests_per_page"), "workload.requests_per_page");
    if (wl.contains("page_stride"))
      scale.page_stride = as_u64(wl.at("page_stride"), "workload.page_stride");
    std::string preset = as_string(wl.at("preset"), "workload.preset");
    cfg.workload = workload_preset(preset, scale);
    cfg.workload.tree.arbitration = tree_spec.arbitration;
    cfg.name = preset;
  } else {
    for (const char* key : {"pages_per_source", "requests_per_page", "page_stride"}) {
      if (wl.contains(key)) {
        throw ConfigError(std::string("workload.") + key +
                          " only applies to presets; set it per stream instead");
      }
    }
    const json& streams = wl.at("streams");
    if (!streams.is_array() || streams.empty()) {
      throw ConfigError("workload.streams must be a non-empty array");
    }
    std::vector<StreamSpec> specs;
    for (std::size_t i = 0; i < streams.size(); ++i) {
      specs.push_back(parse_stream(streams[i], "workload.streams[" + std::to_string(i) + "]"));
    }
    cfg.workload.name = "custom";
    cfg.workload.tree = tree_spec;
    cfg.workload.per_leaf.clear();
    for (std::uint64_t leaf = 0; leaf < tree_spec.leaves; ++leaf) {
      cfg.workload.per_leaf.push_back(specs[leaf % specs.size()]);
    }
  }

  json mars_storage;
  const json& mars_sec = get_section(j, "mars", mars_storage);
  check_keys(mars_sec, "mars",
             {"request_q", "sets", "ways", "insert_rate", "forward_rate", "drain_cap"});
  if (mars_sec.contains("request_q"))
    cfg.reorder.request_q = as_u32(mars_sec.at("request_q"), "mars.request_q");
  if (mars_sec.contains("sets")) cfg.reorder.sets = as_u32(mars_sec.at("sets"), "mars.sets");
  if (mars_sec.contains("ways")) cfg.reorder.ways = as_u32(mars_sec.at("ways"), "mars.ways");
  if (mars_sec.contains("insert_rate"))
    cfg.reorder.insert_rate = as_u32(mars_sec.at("insert_rate"), "mars.insert_rate");
  if (mars_sec.contains("forward_rate"))
    cfg.reorder.forward_rate = as_u32(mars_sec.at("forward_rate"), "mars.forward_rate");
  if (mars_sec.contains("drain_cap"))
    cfg.reorder.drain_cap = as_u32(mars_sec.at("drain_cap"), "mars.drain_cap");

  json map_storage;
  const json& mm = get_section(j, "memory_map", map_storage);
  check_keys(mm, "memory_map",
             {"preset", "addr_bits", "page_offset_bits", "burst_offset_bits", "channel_bits",
              "rank_bits", "bank_bits", "row_bits", "column_bits"});
  bool explicit_map = mm.contains("channel_bits") || mm.contains("rank_bits") ||
                      mm.contains("bank_bits") || mm.contains("row_bits") ||
                      mm.contains("column_bits") || mm.contains("burst_offset_bits");
  unsigned addr_bits = 36;
  if (mm.contains("addr_bits")) addr_bits = as_bits(mm.at("addr_bits"), "memory_map.addr_bits");
  if (mm.contains("preset") && explicit_map) {
    throw ConfigError("memory_map: give either a preset or explicit bit lists, not both");
  }
  if (explicit_map) {
    for (const char* key :
         {"burst_offset_bits", "channel_bits", "rank_bits", "bank_bits", "row_bits",
          "column_bits"}) {
      if (!mm.contains(key)) {
        throw ConfigError(std::string("memory_map.") + key +
                          " is required when any explicit bit list is given");
      }
    }
    cfg.map.addr_bits = addr_bits;
    cfg.map.burst_offset_bits = as_bits(mm.at("burst_offset_bits"), "memory_map.burst_offset_bits");
    cfg.map.channel_bits = as_bit_list(mm.at("channel_bits"), "memory_map.channel_bits");
    cfg.map.rank_bits = as_bit_list(mm.at("rank_bits"), "memory_map.rank_bits");
    cfg.map.bank_bits = as_bit_list(mm.at("bank_bits"), "memory_map.bank_bits");
    cfg.map.row_bits = as_bit_list(mm.at("row_bits"), "memory_map.row_bits");
    cfg.map.column_bits = as_bit_list(mm.at("column_bits"), "memory_map.column_bits");
  } else {
    std::string preset = "page_contiguous";
    if (mm.contains("preset")) preset = as_string(mm.at("preset"), "memory_map.preset");
    cfg.map = make_map_preset(preset, cfg.dram.map_dimensions(addr_bits));
  }
  if (mm.contains("page_offset_bits")) {
    cfg.reorder.page_offset_bits = as_bits(mm.at("page_offset_bits"), "memory_map.page_offset_bits");
  }

  if (j.contains("seed")) cfg.seed = as_u64(j.at("seed"), "seed");
  if (j.contains("name")) cfg.name = as_string(j.at("name"), "name");
  if (j.contains("output_dir")) cfg.output_dir = as_string(j.at("output_dir"), "output_dir");

  json loc_storage;
  const json& loc = get_section(j, "locality", loc_storage);
  check_keys(loc, "locality", {"windows", "taps"});
  if (loc.contains("windows")) cfg.windows = as_u64_list(loc.at("windows"), "locality.windows");
  if (loc.contains("taps")) {
    const json& taps = loc.at("taps");
    if (!taps.is_array()) throw ConfigError("locality.taps must be an array");
    cfg.taps.clear();
    for (const json& tap : taps) cfg.taps.push_back(as_string(tap, "locality.taps element"));
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_string(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");
  return load_config(j);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return load_config_string(text);
}

}  // namespace mars
