#pragma once

#include <string>

namespace mars {

// Re-renders human-facing artifacts from a run directory's run_record.json:
// summary.txt, fig_locality.csv, fig_locality.svg, fig_cas_per_act.svg and
// fig_bandwidth.svg, all written back into the directory. Returns the
// summary text.
std::string report_run(const std::string& run_dir);

}  // namespace mars
