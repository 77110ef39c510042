#include "dcamkl/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dcamkl/errors.hpp"
#include "text_util.hpp"

namespace dcamkl {

namespace {

void check_unique(const std::vector<std::string>& ids, const std::string& context) {
  std::unordered_set<std::string> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw ValidationError(context + ": duplicate sample id '" + id + "'");
    }
  }
}

}  // namespace

FeatureSet::FeatureSet(std::string name, Eigen::MatrixXd values,
                       std::vector<std::string> sample_ids,
                       std::vector<std::string> feature_names)
    : name_(std::move(name)),
      values_(std::move(values)),
      sample_ids_(std::move(sample_ids)),
      feature_names_(std::move(feature_names)) {
  if (feature_names_.empty()) {
    feature_names_.reserve(static_cast<std::size_t>(values_.rows()));
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      feature_names_.push_back("f" + std::to_string(i));
    }
  }
  const std::string context = "feature set '" + name_ + "'";
  if (static_cast<Eigen::Index>(sample_ids_.size()) != values_.cols()) {
    throw ValidationError(context + ": " + std::to_string(sample_ids_.size()) +
                          " sample ids for " + std::to_string(values_.cols()) + " columns");
  }
  if (static_cast<Eigen::Index>(feature_names_.size()) != values_.rows()) {
    throw ValidationError(context + ": " + std::to_string(feature_names_.size()) +
                          " feature names for " + std::to_string(values_.rows()) + " rows");
  }
  if (!values_.allFinite()) {
    throw ValidationError(context + ": non-finite entry");
  }
  check_unique(sample_ids_, context);
}

FeatureSet FeatureSet::select(std::span<const std::size_t> columns) const {
  Eigen::MatrixXd sub(values_.rows(), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> ids;
  ids.reserve(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= sample_ids_.size()) {
      throw ValidationError("feature set '" + name_ + "': column index out of range");
    }
    sub.col(static_cast<Eigen::Index>(j)) = values_.col(static_cast<Eigen::Index>(columns[j]));
    ids.push_back(sample_ids_[columns[j]]);
  }
  return FeatureSet(name_, std::move(sub), std::move(ids), feature_names_);
}

FeatureSet FeatureSet::renamed(std::string name) const {
  FeatureSet copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

std::vector<std::size_t> FeatureSet::indices_of(std::span<const std::string> ids) const {
  std::unordered_map<std::string, std::size_t> where;
  where.reserve(sample_ids_.size());
  for (std::size_t i = 0; i < sample_ids_.size(); ++i) where.emplace(sample_ids_[i], i);
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = where.find(id);
    if (it == where.end()) {
      throw ValidationError("feature set '" + name_ + "': missing sample id '" + id + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

LabelVector::LabelVector(std::vector<int> labels, std::vector<std::string> sample_ids)
    : labels_(std::move(labels)), sample_ids_(std::move(sample_ids)) {
  if (labels_.size() != sample_ids_.size()) {
    throw ValidationError("label vector: " + std::to_string(labels_.size()) + " labels for " +
                          std::to_string(sample_ids_.size()) + " ids");
  }
  for (int l : labels_) {
    if (l != 1 && l != -1) throw ValidationError("label vector: labels must be +1 or -1");
  }
  check_unique(sample_ids_, "label vector");
}

std::size_t LabelVector::count(int label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

void LabelVector::require_both_classes(const std::string& context) const {
  if (!has_both_classes()) {
    throw ValidationError(context + ": both classes must be present");
  }
}

LabelVector LabelVector::aligned_to(std::span<const std::string> ids) const {
  std::unordered_map<std::string, int> by_id;
  by_id.reserve(sample_ids_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) by_id.emplace(sample_ids_[i], labels_[i]);
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("no label for sample id '" + id + "'");
    out.push_back(it->second);
  }
  return LabelVector(std::move(out), std::vector<std::string>(ids.begin(), ids.end()));
}

LabelVector LabelVector::select(std::span<const std::size_t> positions) const {
  std::vector<int> l;
  std::vector<std::string> ids;
  for (auto p : positions) {
    l.push_back(labels_.at(p));
    ids.push_back(sample_ids_.at(p));
  }
  return LabelVector(std::move(l), std::move(ids));
}

Eigen::VectorXd LabelVector::as_vector() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels_.size()));
  for (std::size_t i = 0; i < labels_.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels_[i];
  return y;
}

FeatureSet load_feature_csv(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file " + path.string());
  if (name.empty()) name = path.stem().string();

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ":1: empty file");
  auto header = detail::split_csv_line(detail::strip_cr(line));
  if (header.empty() || header[0] != "id") {
    throw ParseError(path.string() + ":1: header must start with 'id'");
  }
  std::vector<std::string> feature_names(header.begin() + 1, header.end());
  const std::size_t d = feature_names.size();

  std::vector<std::string> ids;
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != d + 1) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(d + 1) + " cells, found " + std::to_string(cells.size()));
    }
    ids.push_back(cells[0]);
    for (std::size_t k = 1; k < cells.size(); ++k) {
      auto v = detail::parse_finite(cells[k]);
      if (!v) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad numeric cell '" +
                         cells[k] + "'");
      }
      flat.push_back(*v);
    }
  }

  const auto n = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(d), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      values(static_cast<Eigen::Index>(i), j) = flat[static_cast<std::size_t>(j) * d + i];
    }
  }
  return FeatureSet(std::move(name), std::move(values), std::move(ids), std::move(feature_names));
}

void write_feature_csv(const FeatureSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature file " + path.string());
  out << "id";
  for (const auto& f : set.feature_names()) out << ',' << f;
  out << '\n';
  const auto& v = set.values();
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    out << set.sample_ids()[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < v.rows(); ++i) out << ',' << detail::format_double(v(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

LabelVector load_label_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ":1: empty file");
  auto header = detail::split_csv_line(detail::strip_cr(line));
  if (header.size() != 2 || header[0] != "id" || header[1] != "label") {
    throw ParseError(path.string() + ":1: header must be 'id,label'");
  }
  std::vector<int> labels;
  std::vector<std::string> ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 2) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 2 cells");
    }
    int label = 0;
    if (cells[1] == "+1" || cells[1] == "1") {
      label = 1;
    } else if (cells[1] == "-1") {
      label = -1;
    } else {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": label must be +1 or -1");
    }
    ids.push_back(cells[0]);
    labels.push_back(label);
  }
  return LabelVector(std::move(labels), std::move(ids));
}

void write_label_csv(const LabelVector& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write label file " + path.string());
  out << "id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels.sample_ids()[i] << ',' << (labels[i] > 0 ? "+1" : "-1") << '\n';
  }
}

std::vector<std::size_t> stratified_train_positions(const LabelVector& labels,
                                                    double train_fraction,
                                                    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie in (0, 1)");
  }
  const std::size_t n = labels.size();
  const auto target = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(n)));

  std::vector<std::size_t> members[2];
  for (std::size_t i = 0; i < n; ++i) members[labels[i] > 0 ? 0 : 1].push_back(i);

  // Largest-remainder allocation, then clamp so each class with >= 2 members
  // lands on both sides.
  std::size_t take[2];
  double remainder[2];
  std::size_t lo[2];
  std::size_t hi[2];
  for (int c = 0; c < 2; ++c) {
    const double ideal = train_fraction * static_cast<double>(members[c].size());
    take[c] = static_cast<std::size_t>(std::floor(ideal));
    remainder[c] = ideal - std::floor(ideal);
    const std::size_t m = members[c].size();
    lo[c] = m >= 2 ? 1 : 0;
    hi[c] = m >= 2 ? m - 1 : m;
  }
  auto total = [&] { return take[0] + take[1]; };
  std::array<int, 2> by_remainder{0, 1};
  if (remainder[1] > remainder[0]) std::swap(by_remainder[0], by_remainder[1]);
  for (int c : by_remainder) {
    if (total() < target && take[c] < members[c].size()) ++take[c];
  }
  for (int c = 0; c < 2; ++c) take[c] = std::clamp(take[c], lo[c], hi[c]);
  for (bool progress = true; progress && total() != target;) {
    progress = false;
    for (int c : by_remainder) {
      if (total() < target && take[c] < hi[c]) {
        ++take[c];
        progress = true;
      } else if (total() > target && take[c] > lo[c]) {
        --take[c];
        progress = true;
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  for (int c = 0; c < 2; ++c) {
    auto& idx = members[c];
    // Fisher-Yates with raw engine output so the permutation does not depend
    // on the standard library's distribution implementation.
    for (std::size_t i = idx.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng() % i);
      std::swap(idx[i - 1], idx[j]);
    }
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

Split split(std::span<const FeatureSet> features, const LabelVector& labels,
            double train_fraction, std::uint64_t seed) {
  if (features.empty()) throw ValidationError("split: no feature sets");
  const auto& ids = features.front().sample_ids();
  for (const auto& f : features) {
    if (f.sample_ids() != ids) {
      throw ValidationError("split: feature set '" + f.name() +
                            "' is not aligned with '" + features.front().name() + "'");
    }
  }
  const LabelVector aligned = labels.aligned_to(ids);
  const auto train_pos = stratified_train_positions(aligned, train_fraction, seed);

  std::vector<std::size_t> test_pos;
  std::vector<bool> in_train(ids.size(), false);
  for (auto p : train_pos) in_train[p] = true;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!in_train[i]) test_pos.push_back(i);
  }

  Split out;
  for (const auto& f : features) {
    out.train.features.push_back(f.select(train_pos));
    out.test.features.push_back(f.select(test_pos));
  }
  out.train.labels = aligned.select(train_pos);
  out.test.labels = aligned.select(test_pos);
  return out;
}

Normalizer fit_normalizer(const FeatureSet& train) {
  const auto n = train.size();
  if (n < 2) throw ValidationError("fit_normalizer: need at least 2 samples");
  const auto& x = train.values();
  Normalizer norm;
  norm.means = x.rowwise().mean();
  norm.stds.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double ss = (x.row(i).array() - norm.means(i)).square().sum();
    norm.stds(i) = std::max(std::sqrt(ss / static_cast<double>(n - 1)), Normalizer::kStdFloor);
  }
  return norm;
}

FeatureSet apply_normalizer(const Normalizer& norm, const FeatureSet& data) {
  if (norm.means.size() != data.dims() || norm.stds.size() != data.dims()) {
    throw ValidationError("apply_normalizer: normalizer has " + std::to_string(norm.means.size()) +
                          " features, data '" + data.name() + "' has " +
                          std::to_string(data.dims()));
  }
  Eigen::MatrixXd z = (data.values().colwise() - norm.means).array().colwise() / norm.stds.array();
  return FeatureSet(data.name(), std::move(z), data.sample_ids(), data.feature_names());
}

FeatureSet concatenate(std::span<const FeatureSet> sets, std::string name) {
  if (sets.empty()) throw ValidationError("concatenate: no feature sets");
  const auto& ids = sets.front().sample_ids();
  Eigen::Index rows = 0;
  for (const auto& s : sets) {
    if (s.sample_ids() != ids) {
      throw ValidationError("concatenate: '" + s.name() + "' is not aligned with '" +
                            sets.front().name() + "'");
    }
    rows += s.dims();
  }
  Eigen::MatrixXd values(rows, static_cast<Eigen::Index>(ids.size()));
  std::vector<std::string> names;
  Eigen::Index r = 0;
  for (const auto& s : sets) {
    values.middleRows(r, s.dims()) = s.values();
    r += s.dims();
    for (const auto& f : s.feature_names()) names.push_back(s.name() + "." + f);
  }
  return FeatureSet(std::move(name), std::move(values), ids, std::move(names));
}

}  // namespace dcamkl
