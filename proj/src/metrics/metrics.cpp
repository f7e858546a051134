#include "mia/metrics/metrics.hpp"

#include <cmath>
#include <string>

#include "mia/attack/threshold.hpp"
#include "mia/core/errors.hpp"

namespace mia {

ConfusionMatrix confusion(std::span<const double> probabilities, std::span<const int> labels,
                          double theta) {
  if (probabilities.size() != labels.size())
    throw DomainError("confusion: " + std::to_string(probabilities.size()) + " probabilities vs " +
                      std::to_string(labels.size()) + " labels");
  if (probabilities.empty()) throw DomainError("confusion: no predictions");
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("confusion: theta must lie in (0, 1)");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DomainError("confusion: labels must be 0 or 1");
    const int predicted = apply_threshold(probabilities[i], theta);
    if (labels[i] == 1) {
      (predicted == 1 ? cm.tp : cm.fn)++;
    } else {
      (predicted == 1 ? cm.fp : cm.tn)++;
    }
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DomainError("accuracy: empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

std::optional<double> precision(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fp == 0) return std::nullopt;
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
}

std::optional<double> recall(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0) return std::nullopt;
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

std::optional<double> f1(const ConfusionMatrix& cm) {
  // Defined iff PR and RE exist and PR + RE > 0, i.e. iff TP > 0. The count form
  // 2TP / (2TP + FP + FN) equals the harmonic mean and is exact when PR == RE.
  if (cm.tp == 0) return std::nullopt;
  return static_cast<double>(2 * cm.tp) / static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
}

double mcc(const ConfusionMatrix& cm) {
  const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
  const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

std::optional<double> false_positive_rate(const ConfusionMatrix& cm) {
  if (cm.fp + cm.tn == 0) return std::nullopt;
  return static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
}

std::vector<double> default_theta_sweep() {
  std::vector<double> out;
  for (int i = 1; i <= 9; ++i) out.push_back(i / 10.0);
  return out;
}

RocCurve roc_curve(std::span<const double> probabilities, std::span<const int> labels,
                   std::span<const double> thetas) {
  if (thetas.empty()) throw DomainError("roc_curve: empty threshold sweep");
  for (std::size_t i = 1; i < thetas.size(); ++i)
    if (!(thetas[i] > thetas[i - 1])) throw DomainError("roc_curve: thetas must be strictly increasing");
  RocCurve curve;
  curve.reserve(thetas.size());
  for (double theta : thetas) {
    const ConfusionMatrix cm = confusion(probabilities, labels, theta);
    const auto fpr = false_positive_rate(cm);
    const auto re = recall(cm);
    if (!fpr || !re) throw DomainError("roc_curve: both labels must be present");
    curve.push_back({theta, *fpr, *re});
  }
  return curve;
}

double best_threshold(std::span<const std::pair<double, double>> theta_accuracy) {
  if (theta_accuracy.empty()) throw DomainError("best_threshold: empty sweep");
  auto better = [](const std::pair<double, double>& a, const std::pair<double, double>& b) {
    if (a.second != b.second) return a.second > b.second;
    const double da = std::abs(a.first - 0.5), db = std::abs(b.first - 0.5);
    if (da != db) return da < db;
    return a.first < b.first;
  };
  auto best = theta_accuracy.front();
  for (const auto& p : theta_accuracy)
    if (better(p, best)) best = p;
  return best.first;
}

}  // namespace mia
