#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <mars/mars.h>

namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"({
  "workload": {"preset": "WL1", "pages_per_source": 2, "requests_per_page": 16},
  "merge_tree": {"leaves": 8, "fanouts": [8]},
  "mars": {"request_q": 64, "sets": 32, "ways": 2},
  "locality": {"windows": [16, 64]},
  "seed": 7
})";

struct Config {
  mars_config* cfg = nullptr;
  ~Config() { mars_config_free(cfg); }
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mars_capi_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("version and status names") {
  REQUIRE(mars_version() != nullptr);
  CHECK(std::string(mars_version()).find('.') != std::string::npos);
  CHECK(std::string(mars_status_name(MARS_OK)) == "ok");
  CHECK(std::string(mars_status_name(MARS_ERR_CONFIG)) == "config");
  CHECK(std::string(mars_status_name(MARS_ERR_IO)) == "io");
  CHECK(std::string(mars_status_name(MARS_ERR_USAGE)) == "usage");
  CHECK(std::string(mars_status_name(MARS_ERR_RUNTIME)) == "runtime");
  CHECK(mars_last_error() != nullptr);
}

TEST_CASE("default config loads and digests") {
  Config c;
  REQUIRE(mars_config_default(&c.cfg) == MARS_OK);
  char* digest = nullptr;
  REQUIRE(mars_config_digest(c.cfg, &digest) == MARS_OK);
  REQUIRE(digest != nullptr);
  CHECK(std::strlen(digest) == 16);
  CHECK(std::string(digest).find_first_not_of("0123456789abcdef") == std::string::npos);
  mars_string_free(digest);
}

TEST_CASE("config errors map to status codes and messages") {
  mars_config* cfg = nullptr;
  CHECK(mars_config_load_string("{", &cfg) == MARS_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(mars_last_error()) == "config is not valid JSON");

  CHECK(mars_config_load_string(R"({"workload": {"preset": "WL1"}, "oops": 1})", &cfg) ==
        MARS_ERR_CONFIG);
  CHECK(std::string(mars_last_error()) == "config: unknown key 'oops'");

  CHECK(mars_config_load_file("/nonexistent/mars.json", &cfg) == MARS_ERR_IO);
  CHECK(cfg == nullptr);

  CHECK(mars_config_load_string(nullptr, &cfg) == MARS_ERR_USAGE);
  CHECK(mars_config_load_string(kSmallConfig, nullptr) == MARS_ERR_USAGE);
  CHECK(mars_config_digest(nullptr, nullptr) == MARS_ERR_USAGE);
  CHECK(mars_run_experiment(nullptr, "", 0, nullptr) == MARS_ERR_USAGE);
  mars_config_free(nullptr);  // free of NULL is a no-op
  mars_string_free(nullptr);
  mars_run_record_free(nullptr);
}

TEST_CASE("an in-memory run returns summary and record") {
  Config c;
  REQUIRE(mars_config_load_string(kSmallConfig, &c.cfg) == MARS_OK);

  mars_run_record* rec = nullptr;
  REQUIRE(mars_run_experiment(c.cfg, "", 0, &rec) == MARS_OK);
  REQUIRE(rec != nullptr);
  CHECK(std::string(mars_run_dir(rec)).empty());
  const std::string summary = mars_run_summary(rec);
  CHECK(summary.find("workload WL1") != std::string::npos);
  CHECK(summary.find("cas_per_act") != std::string::npos);
  const std::string record = mars_run_record_json(rec);
  CHECK(record.find("\"improvement\"") != std::string::npos);

  // Determinism across two runs of the same handle.
  mars_run_record* rec2 = nullptr;
  REQUIRE(mars_run_experiment(c.cfg, "", 0, &rec2) == MARS_OK);
  CHECK(record == mars_run_record_json(rec2));
  mars_run_record_free(rec2);
  mars_run_record_free(rec);
}

TEST_CASE("a persisted run reports through mars_report") {
  TempDir tmp("report");
  Config c;
  REQUIRE(mars_config_load_string(kSmallConfig, &c.cfg) == MARS_OK);

  mars_run_record* rec = nullptr;
  REQUIRE(mars_run_experiment(c.cfg, tmp.path.c_str(), 1, &rec) == MARS_OK);
  REQUIRE(rec != nullptr);
  const std::string dir = mars_run_dir(rec);
  REQUIRE_FALSE(dir.empty());
  CHECK(fs::exists(fs::path(dir) / "run_record.json"));
  CHECK(fs::exists(fs::path(dir) / "traces" / "mars_commands.csv"));

  char* summary = nullptr;
  REQUIRE(mars_report(dir.c_str(), &summary) == MARS_OK);
  REQUIRE(summary != nullptr);
  CHECK(std::string(summary).find("improvement:") != std::string::npos);
  CHECK(fs::exists(fs::path(dir) / "fig_locality.svg"));
  mars_string_free(summary);
  mars_run_record_free(rec);

  CHECK(mars_report(nullptr, &summary) == MARS_ERR_USAGE);
  char* none = nullptr;
  CHECK(mars_report((tmp.path / "empty").c_str(), &none) == MARS_ERR_IO);
  CHECK(none == nullptr);
}

TEST_CASE("sweeps return one record per value") {
  Config c;
  REQUIRE(mars_config_load_string(kSmallConfig, &c.cfg) == MARS_OK);

  mars_run_record** records = nullptr;
  size_t count = 0;
  REQUIRE(mars_sweep_experiment(c.cfg, "request_q", "1,64", "", 0, &records, &count) == MARS_OK);
  REQUIRE(count == 2);
  REQUIRE(records != nullptr);
  for (size_t i = 0; i < count; ++i) {
    CHECK(mars_run_summary(records[i]) != nullptr);
  }
  mars_run_record_list_free(records, count);

  CHECK(mars_sweep_experiment(c.cfg, "warp", "1", "", 0, &records, &count) == MARS_ERR_CONFIG);
  CHECK(mars_sweep_experiment(c.cfg, "seed", "", "", 0, &records, &count) == MARS_ERR_CONFIG);
  CHECK(mars_sweep_experiment(c.cfg, nullptr, "1", "", 0, &records, &count) == MARS_ERR_USAGE);
}

TEST_CASE("trace locality scores a request trace file") {
  TempDir tmp("trace");
  const fs::path trace = tmp.path / "trace.csv";
  {
    std::ofstream os(trace);
    os << "seq,addr_hex,rw,stream_kind,source_id\n";
    // Four requests on page 5, then four pages touched once each.
    for (int i = 0; i < 4; ++i) {
      os << i << ",0x" << std::hex << (0x5000 + i * 0x40) << std::dec << ",R,texture,0\n";
    }
    for (int i = 0; i < 4; ++i) {
      os << (4 + i) << ",0x" << std::hex << ((0x10 + i) * 0x1000) << std::dec << ",W,color,1\n";
    }
  }

  const uint64_t windows[2] = {4, 8};
  char* csv = nullptr;
  REQUIRE(mars_trace_locality(trace.c_str(), windows, 2, 0, &csv) == MARS_OK);
  REQUIRE(csv != nullptr);
  CHECK(std::string(csv) ==
        "window,mean_locality\n"
        "4,2.500000\n"
        "8,1.600000\n");
  mars_string_free(csv);

  CHECK(mars_trace_locality(trace.c_str(), windows, 0, 0, &csv) == MARS_ERR_USAGE);
  CHECK(mars_trace_locality(nullptr, windows, 2, 0, &csv) == MARS_ERR_USAGE);
  const uint64_t zero_window[1] = {0};
  CHECK(mars_trace_locality(trace.c_str(), zero_window, 1, 0, &csv) == MARS_ERR_CONFIG);
  CHECK(mars_trace_locality((tmp.path / "missing.csv").c_str(), windows, 2, 0, &csv) ==
        MARS_ERR_IO);
}
