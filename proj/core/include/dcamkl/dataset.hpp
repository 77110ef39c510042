#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dcamkl {

/// A named d x n real matrix: rows are features, columns are samples.
///
/// Construction validates that every entry is finite, that sample ids are
/// unique, and that the id/name lists agree with the matrix shape. Instances
/// are immutable afterwards.
class FeatureSet {
 public:
  FeatureSet() = default;

  /// Empty `feature_names` are filled with `f0..f{d-1}`.
  FeatureSet(std::string name, Eigen::MatrixXd values,
             std::vector<std::string> sample_ids,
             std::vector<std::string> feature_names = {});

  const std::string& name() const noexcept { return name_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  Eigen::Index dims() const noexcept { return values_.rows(); }
  Eigen::Index size() const noexcept { return values_.cols(); }

  /// Columns in the given order.
  FeatureSet select(std::span<const std::size_t> columns) const;
  FeatureSet renamed(std::string name) const;

  /// Column index per id; throws ValidationError when an id is missing.
  std::vector<std::size_t> indices_of(std::span<const std::string> ids) const;

 private:
  std::string name_;
  Eigen::MatrixXd values_;
  std::vector<std::string> sample_ids_;
  std::vector<std::string> feature_names_;
};

/// Binary labels in {+1, -1} keyed by sample id.
class LabelVector {
 public:
  LabelVector() = default;
  LabelVector(std::vector<int> labels, std::vector<std::string> sample_ids);

  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
  std::size_t size() const noexcept { return labels_.size(); }
  int operator[](std::size_t i) const { return labels_[i]; }

  std::size_t count(int label) const;
  bool has_both_classes() const { return count(+1) > 0 && count(-1) > 0; }
  void require_both_classes(const std::string& context) const;

  /// Labels reordered to follow `ids`; every id must be present.
  LabelVector aligned_to(std::span<const std::string> ids) const;
  LabelVector select(std::span<const std::size_t> positions) const;

  Eigen::VectorXd as_vector() const;

 private:
  std::vector<int> labels_;
  std::vector<std::string> sample_ids_;
};

/// Per-feature standardization statistics, fit on training data only.
struct Normalizer {
  static constexpr double kStdFloor = 1e-8;

  Eigen::VectorXd means;
  Eigen::VectorXd stds;
};

struct Partition {
  std::vector<FeatureSet> features;
  LabelVector labels;
};

struct Split {
  Partition train;
  Partition test;
};

FeatureSet load_feature_csv(const std::filesystem::path& path, std::string name = {});
void write_feature_csv(const FeatureSet& set, const std::filesystem::path& path);

LabelVector load_label_csv(const std::filesystem::path& path);
void write_label_csv(const LabelVector& labels, const std::filesystem::path& path);

/// Seeded stratified split. All sets must share the same sample ids in the
/// same order; labels are aligned by id. The training side receives
/// round(train_fraction * n) samples and, for each class with at least two
/// members, both sides receive at least one.
Split split(std::span<const FeatureSet> features, const LabelVector& labels,
            double train_fraction, std::uint64_t seed);

/// Positions of the training samples chosen by `split` (sorted ascending).
std::vector<std::size_t> stratified_train_positions(const LabelVector& labels,
                                                    double train_fraction,
                                                    std::uint64_t seed);

Normalizer fit_normalizer(const FeatureSet& train);
FeatureSet apply_normalizer(const Normalizer& norm, const FeatureSet& data);

/// Row-stacks sets that share sample ids; feature names are prefixed by the
/// originating set name.
FeatureSet concatenate(std::span<const FeatureSet> sets, std::string name);

}  // namespace dcamkl
