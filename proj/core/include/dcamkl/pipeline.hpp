#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcamkl/dataset.hpp"
#include "dcamkl/features.hpp"
#include "dcamkl/fusion.hpp"
#include "dcamkl/kernels.hpp"
#include "dcamkl/metrics.hpp"
#include "dcamkl/mkl.hpp"

namespace dcamkl {

/// Kernel request for one cue (or for the single-kernel baselines).
/// `median_sigma` resolves the RBF width from the normalized training data;
/// `inverse_dims_scale` sets the polynomial scale to 1 / dims.
struct KernelEntry {
  std::string cue;
  KernelSpec spec;
  bool median_sigma = false;
  bool inverse_dims_scale = false;
};

/// An externally computed descriptor (e.g. GIST, SIFT pyramid) loaded from CSV.
struct FeatureImport {
  std::string name;
  std::filesystem::path file;
};

struct DerivedSettings {
  std::string familiarity_source = "color_histogram";
  int familiarity_k = 10;
  std::vector<std::string> lof_sources = {"color_histogram", "color_moments", "glcm",
                                          "lbp",             "haar",          "edge_histogram"};
  int lof_k = 10;
};

struct PipelineConfig {
  std::filesystem::path images;    ///< extract input
  std::filesystem::path features;  ///< directory holding manifest.json + CSVs
  std::filesystem::path labels;
  std::vector<FeatureImport> imports;
  std::map<std::string, FeatureKind> assignments;  ///< overrides of the catalog
  std::vector<std::string> exclude;                ///< sets ignored entirely
  DerivedSettings derived;
  FusionMode fusion_mode = FusionMode::kConcat;
  std::vector<KernelEntry> kernels;  ///< one per cue
  KernelEntry baseline_kernel;
  MklOptions mkl;
  double train_fraction = 0.7;
  std::uint64_t seed = 42;

  static PipelineConfig defaults();
};

/// Parses a JSON config; relative paths resolve against `base_dir`. Unknown
/// keys are rejected.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
/// Canonical JSON of every effective setting.
std::string config_to_json(const PipelineConfig& config);
/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_digest(const PipelineConfig& config);

// ---- fusion plan ----------------------------------------------------------

/// Unusualness features computed against the training partition.
struct DerivedPlan {
  std::optional<FeatureSet> familiarity_reference;  ///< training histograms
  int familiarity_k = 10;
  std::vector<std::string> lof_sources;
  Normalizer lof_normalizer;
  std::optional<FeatureSet> lof_reference;  ///< normalized stacked training descriptors
  int lof_k = 10;
};

struct TypePlan {
  Cue cue;
  std::string type;
  std::vector<std::string> inputs;
  std::optional<MdcaPlan> mdca;  ///< empty for a single pass-through set
};

struct FusionPlan {
  FusionMode mode = FusionMode::kConcat;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  DerivedPlan derived;
  std::map<std::string, Normalizer> normalizers;  ///< per input set
  std::vector<TypePlan> types;
  std::vector<Cue> cues;  ///< non-empty cues in canonical order
};

/// Raw feature sets as produced by `extract` plus imports.
std::vector<FeatureSet> load_feature_source(const PipelineConfig& config);

/// Derived unusualness sets for every sample in `raw`.
std::vector<FeatureSet> derive_unusualness(const DerivedPlan& plan, std::span<const FeatureSet> raw);

/// Fits derivation references, per-set normalizers and per-type DCA/MDCA on
/// the training ids.
FusionPlan fit_fusion(std::span<const FeatureSet> raw, const LabelVector& labels,
                      std::vector<std::string> train_ids, std::vector<std::string> test_ids,
                      const PipelineConfig& config);

/// One fused set per cue (named after the cue), restricted to `ids`.
std::vector<FeatureSet> apply_fusion(const FusionPlan& plan, std::span<const FeatureSet> raw,
                                     std::span<const std::string> ids);

/// The un-fused baseline input: every used set normalized and stacked.
FeatureSet concatenated_input(const FusionPlan& plan, std::span<const FeatureSet> raw,
                              std::span<const std::string> ids);

/// Kernel per fused cue group, in plan order.
std::vector<KernelChoice> kernels_for_cues(const PipelineConfig& config, std::span<const FeatureSet> cue_sets);
KernelChoice baseline_kernel_for(const PipelineConfig& config, const FeatureSet& set);

struct StoredModel {
  std::string config_digest;
  FusionPlan plan;
  MklModel mkl;
};

Prediction predict_raw(const StoredModel& model, std::span<const FeatureSet> raw,
                       std::span<const std::string> ids);

// ---- comparative runs -------------------------------------------------------

struct CompareRow {
  std::string method;
  double accuracy = 0.0;
  double auc = 0.0;
  Eigen::Index dims = 0;
};

struct CompareResult {
  std::vector<CompareRow> rows;  ///< F4, F5, F6
  std::vector<std::string> test_ids;
  std::vector<double> mkl_weights;
};

/// Concatenation + SVM, fused + SVM and fused + MKL on one shared split.
CompareResult run_compare(std::span<const FeatureSet> raw, const LabelVector& labels, const PipelineConfig& config);

// ---- subcommands ------------------------------------------------------------

struct ExtractSummary {
  std::size_t images = 0;
  std::vector<std::pair<std::string, std::string>> failures;  ///< file, reason
};

/// Every registered image extractor over the images, one set per extractor.
/// Gray images are promoted to RGB.
std::vector<FeatureSet> extract_features(std::span<const std::string> ids, std::span<const RasterImage> images);

ExtractSummary cmd_extract(const PipelineConfig& config, const std::filesystem::path& out);
void cmd_fuse(const PipelineConfig& config, const std::filesystem::path& out);
MklModel cmd_train(const PipelineConfig& config, const std::filesystem::path& out,
                   const std::filesystem::path& model_path);
/// `subset` is "test", "train" or "all".
Prediction cmd_predict(const PipelineConfig& config, const std::filesystem::path& model_path,
                       const std::filesystem::path& out, const std::string& subset);
EvaluationReport cmd_evaluate(const PipelineConfig& config, const std::filesystem::path& predictions,
                              const std::filesystem::path& out);
CompareResult cmd_compare(const PipelineConfig& config, const std::filesystem::path& out);

}  // namespace dcamkl
