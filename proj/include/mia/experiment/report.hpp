#pragma once

#include <filesystem>

#include <json.hpp>

#include "mia/experiment/pipeline.hpp"

namespace mia {

// Writes into `dir`:
//   metrics.csv            every (setting, seed, theta) row
//   aggregate.csv          mean and standard error over seeds per (setting, theta)
//   roc/<setting>_seed<k>.csv
//   curves/T<t>_seed<k>_<shadow|target>.csv
//   summary.json           provenance, aggregates, best thresholds, failures
//   run.json               the full RunReport, readable by load_run_report
// Output is a deterministic function of the report.
void write_report(const RunReport& report, const std::filesystem::path& dir);

nlohmann::json to_json(const RunReport& report);
RunReport run_report_from_json(const nlohmann::json& j);
RunReport load_run_report(const std::filesystem::path& path);

}  // namespace mia
