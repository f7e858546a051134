#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mia {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Counts under the >= threshold rule. labels must be 0/1 and as long as probabilities.
ConfusionMatrix confusion(std::span<const double> probabilities, std::span<const int> labels,
                          double theta);

// Metrics return std::nullopt where the formula has a zero denominator, except
// MCC which reports 0 in that case. accuracy() throws DomainError on an empty matrix.
double accuracy(const ConfusionMatrix& cm);
std::optional<double> precision(const ConfusionMatrix& cm);
std::optional<double> recall(const ConfusionMatrix& cm);
std::optional<double> f1(const ConfusionMatrix& cm);
double mcc(const ConfusionMatrix& cm);
std::optional<double> false_positive_rate(const ConfusionMatrix& cm);

struct RocPoint {
  double theta = 0.0;
  double fpr = 0.0;
  double recall = 0.0;
};
using RocCurve = std::vector<RocPoint>;

// 0.1, 0.2, ..., 0.9
std::vector<double> default_theta_sweep();

// One (FPR, RE) point per theta. thetas must be strictly increasing in (0, 1)
// and both labels must occur.
RocCurve roc_curve(std::span<const double> probabilities, std::span<const int> labels,
                   std::span<const double> thetas);

// Theta with the highest accuracy; ties go to the theta closest to 0.5, then the smaller one.
double best_threshold(std::span<const std::pair<double, double>> theta_accuracy);

}  // namespace mia
