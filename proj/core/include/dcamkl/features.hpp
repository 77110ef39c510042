#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dcamkl/dataset.hpp"
#include "dcamkl/image.hpp"

namespace dcamkl {

enum class Cue { kUnusualness, kAesthetics, kGeneralPreferences };

std::string_view to_string(Cue cue);
Cue cue_from_string(std::string_view name);
inline constexpr std::array<Cue, 3> kAllCues = {Cue::kUnusualness, Cue::kAesthetics,
                                                 Cue::kGeneralPreferences};

/// Feature sets belonging to one interestingness cue.
struct CueGroup {
  Cue cue;
  std::vector<std::string> feature_sets;
};

/// Where a named feature set lives: its cue and its feature type. Sets of the
/// same type within a cue are fused together; different types are stacked.
struct FeatureKind {
  std::string name;
  Cue cue;
  std::string type;
};

/// Built-in assignment of every extractor, derived feature, and importable
/// descriptor to its cue and type.
const std::vector<FeatureKind>& feature_catalog();
std::optional<FeatureKind> lookup_feature_kind(std::string_view name);

/// Groups the named sets by cue. Throws ValidationError for an unknown name
/// or a name listed twice.
std::vector<CueGroup> group_by_cue(std::span<const FeatureKind> kinds);

// ---- image extractors -----------------------------------------------------

inline constexpr int kGlcmLevels = 8;

enum class GlcmDirection { k0 = 0, k45 = 1, k90 = 2, k135 = 3 };

/// Symmetric, sum-normalized co-occurrence matrix at distance 1 after
/// quantizing gray values to `kGlcmLevels` levels.
Eigen::MatrixXd glcm_matrix(const GrayImage& gray, GlcmDirection dir);

/// Contrast, energy, entropy, inverse difference moment, correlation for each
/// of 0/45/90/135 degrees (direction-major). Level values enter the
/// statistics normalized to [0, 1].
std::vector<double> glcm_features(const RasterImage& img);

/// Rotation-invariant uniform LBP (P=8, R=1) histogram: bins 0..8 are the
/// uniform codes by number of set bits, bin 9 collects non-uniform patterns.
std::vector<double> lbp_riu2_histogram(const RasterImage& img);

/// Three-level orthonormal Haar decomposition: mean |c| and mean c^2 for the
/// horizontal, vertical, and diagonal details of levels 1..3, then for the
/// final approximation.
std::vector<double> haar_wavelet_features(const RasterImage& img);

std::vector<double> color_moments_hsv(const RasterImage& img);

/// Auto-correlogram over 64 RGB colors at Chebyshev distances 1, 3, 5, 7;
/// index = color * 4 + distance slot.
std::vector<double> color_correlogram(const RasterImage& img);

/// 4x4x4 RGB bin of a pixel, r-major.
int quantize_rgb64(double r, double g, double b);

std::vector<double> color_histogram(const RasterImage& img);

/// Mean of -0.31 * luminance + 0.60 * HSV saturation.
double arousal_score(const RasterImage& img);

/// Sobel orientation histogram over pixels whose magnitude exceeds the mean
/// magnitude. Eight 45-degree sectors centred on 0, 45, ..., 315 degrees.
std::vector<double> edge_histogram_sobel(const RasterImage& img);

/// Binary Canny edge map (sigma 1.4, high = 0.2 max magnitude, low = 0.5 high).
GrayImage canny_edges(const GrayImage& gray);

/// The seven Hu invariants of a binary edge map, log-compressed as
/// sign(h) * log10(|h| + 1e-30). All zeros when the map is empty.
std::array<double, 7> hu_moments(const GrayImage& edges);
std::vector<double> hu_moments_canny(const RasterImage& img);

inline constexpr int kJpegQuality = 75;

/// [gray entropy (bits), SI mean, SI rms, edge mean, edge std, edge JPEG rate].
std::vector<double> complexity_features(const RasterImage& img);

inline constexpr int kHogSize = 1764;
std::vector<double> hog_features(const RasterImage& img);

/// HSV with all channels in [0, 1].
std::array<double, 3> rgb_to_hsv(double r, double g, double b);

/// Image extractor registry entry.
struct Extractor {
  std::string name;
  std::size_t dims;
  std::vector<double> (*run)(const RasterImage&);
};

const std::vector<Extractor>& image_extractors();

// ---- set-level unusualness features --------------------------------------

/// Symmetric chi-squared distance, 0.5 * sum (a-b)^2 / (a+b) over bins with
/// a + b > 0.
double chi_squared_distance(std::span<const double> a, std::span<const double> b);

/// Per target column: mean chi-squared distance to its k nearest reference
/// columns, skipping reference columns with the same sample id.
Eigen::VectorXd familiarity(const FeatureSet& targets, const FeatureSet& reference, int k);

/// Local outlier factor of every column within the set (Euclidean distance).
Eigen::VectorXd lof_scores(const FeatureSet& points, int k = 10);

/// LOF of each query column measured against a fixed reference set, skipping
/// reference columns with the query's sample id.
Eigen::VectorXd lof_scores_against(const FeatureSet& reference, const FeatureSet& queries,
                                   int k = 10);

}  // namespace dcamkl
