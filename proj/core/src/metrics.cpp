#include "dcamkl/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "dcamkl/errors.hpp"
#include "text_util.hpp"

namespace dcamkl {

namespace {

void check_labels(std::span<const int> labels, const char* what) {
  for (int l : labels) {
    if (l != 1 && l != -1) throw ValidationError(std::string(what) + ": labels must be +1 or -1");
  }
}

}  // namespace

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw ValidationError("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                          std::to_string(truth.size()) + " labels");
  }
  check_labels(predicted, "confusion");
  check_labels(truth, "confusion");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] > 0) {
      (predicted[i] > 0 ? c.tp : c.fn)++;
    } else {
      (predicted[i] > 0 ? c.fp : c.tn)++;
    }
  }
  return c;
}

double accuracy(const ConfusionCounts& counts) {
  if (counts.total() == 0) throw ValidationError("accuracy: no samples");
  return static_cast<double>(counts.tp + counts.tn) / static_cast<double>(counts.total());
}

RocCurve roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("roc: " + std::to_string(scores.size()) + " scores for " + std::to_string(labels.size()) +
                          " labels");
  }
  check_labels(labels, "roc");
  const auto P = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t N = labels.size() - P;
  if (P == 0 || N == 0) throw ValidationError("roc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  // Twice the area in units of 1/(P N); exact in integers.
  unsigned long long area2 = 0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    const std::size_t tp0 = tp, fp0 = fp;
    for (; k < order.size() && scores[order[k]] == s; ++k) (labels[order[k]] > 0 ? tp : fp)++;
    area2 += static_cast<unsigned long long>(fp - fp0) * (tp0 + tp);
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(N),
                            static_cast<double>(tp) / static_cast<double>(P)});
  }
  curve.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(P) * static_cast<double>(N));
  return curve;
}

RocCurve roc(std::span<const double> scores, const LabelVector& labels) { return roc(scores, labels.labels()); }

EvaluationReport evaluate(std::span<const int> predicted, std::span<const double> scores,
                          std::span<const int> truth) {
  EvaluationReport r;
  r.counts = confusion(predicted, truth);
  r.accuracy = accuracy(r.counts);
  r.roc = roc(scores, truth);
  r.auc = r.roc.auc;
  return r;
}

void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "fpr,tpr\n";
  for (const auto& p : curve.points) out << detail::format_double(p.fpr) << ',' << detail::format_double(p.tpr) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dcamkl
