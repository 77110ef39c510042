#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "dcamkl/dataset.hpp"

namespace dcamkl {

struct ConfusionCounts {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
};

/// Tally of predicted vs true labels (both in {+1, -1}), positive = +1.
ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth);

double accuracy(const ConfusionCounts& counts);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Thresholds at every distinct score, highest first. Tied scores form one
/// step, so ties across classes give diagonal segments and half credit.
RocCurve roc(std::span<const double> scores, std::span<const int> labels);
RocCurve roc(std::span<const double> scores, const LabelVector& labels);

struct EvaluationReport {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double auc = 0.0;
  RocCurve roc;
};

EvaluationReport evaluate(std::span<const int> predicted, std::span<const double> scores,
                          std::span<const int> truth);

/// `fpr,tpr` header and one row per vertex.
void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path);

}  // namespace dcamkl
