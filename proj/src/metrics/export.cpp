#include "mia/metrics/export.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace mia {

MetricRow make_metric_row(const ConfusionMatrix& cm) {
  MetricRow row;
  row.acc = accuracy(cm);
  row.pr = precision(cm);
  row.re = recall(cm);
  row.f1 = f1(cm);
  row.mcc = mcc(cm);
  return row;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string format_optional(const std::optional<double>& x) { return x ? format_number(*x) : "NA"; }

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.env << ',' << r.mode << ',' << r.t_max << ',' << r.clip_length << ',' << r.m << ','
        << format_number(r.theta) << ',' << r.seed << ',' << format_number(r.acc) << ','
        << format_optional(r.pr) << ',' << format_optional(r.re) << ',' << format_optional(r.f1)
        << ',' << format_number(r.mcc) << '\n';
  }
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  RocCurve sorted = curve;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RocPoint& a, const RocPoint& b) { return a.theta < b.theta; });
  out << kRocHeader << '\n';
  for (const auto& p : sorted)
    out << format_number(p.theta) << ',' << format_number(p.fpr) << ',' << format_number(p.recall)
        << '\n';
}

}  // namespace mia
