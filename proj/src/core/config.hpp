#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/addressing.hpp"
#include "core/dram.hpp"
#include "core/reorder.hpp"
#include "core/traffic.hpp"

namespace mars {

// Everything one experiment needs, fully resolved: presets are expanded at
// load time so two spellings of the same setup share one digest.
struct ExperimentConfig {
  std::string name = "custom";
  Workload workload;
  ReorderConfig reorder;
  DramConfig dram;
  MemoryMap map;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> windows = {128, 512, 2048, 8192, 16384};
  std::vector<std::string> taps = {"source", "merge", "mars"};
  std::string output_dir;  // optional run-directory name override, not digested

  unsigned page_offset_bits() const { return reorder.page_offset_bits; }

  void validate() const;

  // Canonical resolved form; key order is fixed by the JSON library, so the
  // dump (and therefore the digest) is byte-stable.
  nlohmann::json to_json() const;
  std::string digest() const;
};

ExperimentConfig default_config();  // WL1 at the default scale

// Loaders reject unknown keys so typos fail loudly instead of silently
// running the default.
ExperimentConfig load_config(const nlohmann::json& j);
ExperimentConfig load_config_string(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace mars
