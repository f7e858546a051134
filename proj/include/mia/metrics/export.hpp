#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "mia/metrics/metrics.hpp"

namespace mia {

struct MetricRow {
  std::string env;
  std::string mode;  // "individual" / "collective", suffixed "/decorrelated" for the ablation
  std::size_t t_max = 0;
  std::size_t clip_length = 0;
  std::size_t m = 1;
  double theta = 0.5;
  std::int64_t seed = 0;
  double acc = 0.0;
  std::optional<double> pr;
  std::optional<double> re;
  std::optional<double> f1;
  double mcc = 0.0;
};

MetricRow make_metric_row(const ConfusionMatrix& cm);

inline constexpr const char* kMetricsHeader = "env,mode,T_max,L,m,theta,seed,ACC,PR,RE,F1,MCC";
inline constexpr const char* kRocHeader = "theta,FPR,RE";

// Fixed formatting (%.10g, undefined metrics as "NA") so equal inputs give byte-identical files.
std::string format_number(double x);
std::string format_optional(const std::optional<double>& x);

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows);
// Rows are written in ascending theta order.
void write_roc_csv(std::ostream& out, const RocCurve& curve);

}  // namespace mia
