#include "core/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/svg_chart.hpp"

namespace fs = std::filesystem;

namespace mars {
namespace {

using nlohmann::json;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path.string());
  os << content;
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

std::string pad(const std::string& text, int width) {
  if (static_cast<int>(text.size()) >= width) return text;
  return std::string(static_cast<std::size_t>(width) - text.size(), ' ') + text;
}

std::string row3(const std::string& a, const std::string& b, const std::string& c) {
  std::string out = a;
  if (out.size() < 28) out += std::string(28 - out.size(), ' ');
  return out + pad(b, 14) + pad(c, 14) + "\n";
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.1f%%", fraction * 100.0);
  return buf;
}

}  // namespace

std::string report_run(const std::string& run_dir) {
  fs::path dir(run_dir);
  fs::path record_path = dir / "run_record.json";
  std::ifstream is(record_path);
  if (!is) throw IoError("not a run directory (missing " + record_path.string() + ")");
  json rec = json::parse(is, nullptr, false);
  if (rec.is_discarded()) throw IoError("run_record.json is not valid JSON");

  try {
    const json& base = rec.at("baseline");
    const json& mars = rec.at("mars");

    std::ostringstream sum;
    sum << "workload " << rec.at("name").get<std::string>() << "  config "
        << rec.at("config_key").get<std::string>() << '\n';
    sum << "requests " << rec.at("request_count").get<std::uint64_t>() << "\n\n";
    sum << row3("metric", "baseline", "mars");
    sum << row3("total_cycles", std::to_string(base.at("total_cycles").get<std::uint64_t>()),
                std::to_string(mars.at("total_cycles").get<std::uint64_t>()));
    sum << row3("act", std::to_string(base.at("act").get<std::uint64_t>()),
                std::to_string(mars.at("act").get<std::uint64_t>()));
    sum << row3("cas", std::to_string(base.at("cas").get<std::uint64_t>()),
                std::to_string(mars.at("cas").get<std::uint64_t>()));
    sum << row3("cas_per_act", fixed6(base.at("cas_per_act").get<double>()),
                fixed6(mars.at("cas_per_act").get<double>()));
    sum << row3("bandwidth_bytes_per_cycle",
                fixed6(base.at("bandwidth_bytes_per_cycle").get<double>()),
                fixed6(mars.at("bandwidth_bytes_per_cycle").get<double>()));
    sum << row3("data_bus_utilization", fixed6(base.at("data_bus_utilization").get<double>()),
                fixed6(mars.at("data_bus_utilization").get<double>()));

    const json& imp = rec.at("improvement");
    sum << "\nimprovement: cas_per_act " << percent(imp.at("cas_per_act_gain").get<double>())
        << ", bandwidth " << percent(imp.at("bandwidth_gain").get<double>()) << ", acts "
        << percent(-imp.at("act_reduction").get<double>()) << ", cycles "
        << percent(-imp.at("cycle_reduction").get<double>()) << '\n';
    const json& ref = rec.at("reference");
    sum << "reference gains from the original MARS evaluation: cas_per_act "
        << percent(ref.at("cas_per_act_gain").get<double>()) << ", bandwidth "
        << percent(ref.at("bandwidth_gain").get<double>()) << '\n';

    // Locality curves live on the mars record; taps absent there fall back
    // to the baseline record (e.g. when the mars tap was not requested).
    std::vector<std::string> taps;
    std::map<std::string, std::map<std::uint64_t, double>> curves;
    std::vector<std::uint64_t> windows;
    for (const char* tap : {"source", "merge", "mars"}) {
      const json* loc = nullptr;
      if (mars.contains("locality") && mars.at("locality").contains(tap)) {
        loc = &mars.at("locality").at(tap);
      } else if (base.contains("locality") && base.at("locality").contains(tap)) {
        loc = &base.at("locality").at(tap);
      }
      if (loc == nullptr) continue;
      taps.push_back(tap);
      for (const json& pt : *loc) {
        std::uint64_t w = pt.at(0).get<std::uint64_t>();
        curves[tap][w] = pt.at(1).get<double>();
        if (curves.size() == 1) windows.push_back(w);
      }
    }

    std::ostringstream fig_csv;
    fig_csv << "window";
    for (const std::string& tap : taps) fig_csv << ',' << tap;
    fig_csv << '\n';
    if (!taps.empty()) {
      sum << "\nlocality by window (requests per distinct page)\n";
      sum << pad("window", 10);
      for (const std::string& tap : taps) sum << pad(tap, 14);
      sum << '\n';
    }
    std::vector<std::string> x_labels;
    std::vector<ChartSeries> series(taps.size());
    for (std::size_t t = 0; t < taps.size(); ++t) series[t].label = taps[t];
    for (std::uint64_t w : windows) {
      fig_csv << w;
      x_labels.push_back(std::to_string(w));
      sum << pad(std::to_string(w), 10);
      for (std::size_t t = 0; t < taps.size(); ++t) {
        double v = curves[taps[t]].count(w) ? curves[taps[t]][w] : 0.0;
        fig_csv << ',' << fixed6(v);
        series[t].values.push_back(v);
        sum << pad(fixed6(v), 14);
      }
      fig_csv << '\n';
      sum << '\n';
    }

    std::string summary = sum.str();
    write_file(dir / "summary.txt", summary);
    write_file(dir / "fig_locality.csv", fig_csv.str());
    write_file(dir / "fig_locality.svg",
               line_chart_svg("mean locality by window", "requests / distinct pages", x_labels,
                              series));
    write_file(dir / "fig_cas_per_act.svg",
               bar_chart_svg("column accesses per row activation", "CAS/ACT",
                             {ChartBar{"baseline", base.at("cas_per_act").get<double>()},
                              ChartBar{"mars", mars.at("cas_per_act").get<double>()}}));
    write_file(dir / "fig_bandwidth.svg",
               bar_chart_svg("achieved bandwidth", "bytes per cycle",
                             {ChartBar{"baseline",
                                       base.at("bandwidth_bytes_per_cycle").get<double>()},
                              ChartBar{"mars",
                                       mars.at("bandwidth_bytes_per_cycle").get<double>()}}));
    return summary;
  } catch (const json::exception& e) {
    throw IoError(std::string("run_record.json is missing expected fields: ") + e.what());
  }
}

}  // namespace mars
