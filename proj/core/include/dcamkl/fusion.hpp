#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dcamkl/dataset.hpp"

namespace dcamkl {

/// Class-mean deviations of one feature set and the projection that turns its
/// between-class scatter into the identity.
struct ScatterDecomposition {
  Eigen::MatrixXd phi;  ///< p x c, column i = sqrt(n_i) * (class mean i - global mean)
  Eigen::MatrixXd w_b;  ///< p x r, w_b^T * phi * phi^T * w_b = I
  Eigen::Index r = 0;
};

/// Learned DCA projections into the shared r-dimensional space.
struct DcaTransform {
  Eigen::MatrixXd w_x;    ///< r x p
  Eigen::MatrixXd w_y;    ///< r x q
  Eigen::Index r = 0;
  Eigen::VectorXd sigma;  ///< retained singular values of the between-set covariance
};

enum class FusionMode { kConcat, kSum };

std::string to_string(FusionMode mode);
FusionMode fusion_mode_from_string(const std::string& name);

struct MdcaStep {
  std::string left;
  std::string right;
  std::string output;
  DcaTransform transform;
};

/// Replayable chain of pairwise DCA fusions.
struct MdcaPlan {
  std::string output;
  FusionMode mode = FusionMode::kConcat;
  std::vector<std::string> order;  ///< inputs by descending numerical rank
  std::vector<MdcaStep> steps;
};

inline constexpr double kScatterTolerance = 1e-10;
inline constexpr double kSingularTolerance = 1e-10;

/// `classes` holds one integer class id per column of `x`; any values work.
ScatterDecomposition between_class_scatter(const Eigen::MatrixXd& x, std::span<const int> classes);
ScatterDecomposition between_class_scatter(const FeatureSet& x, const LabelVector& labels);

/// Eigen-decomposes phi^T phi (c x c) and keeps eigenvalues above
/// tol * max eigenvalue. Throws DegenerateFusionError when nothing survives.
ScatterDecomposition unitize_scatter(ScatterDecomposition decomp, double tol = kScatterTolerance);

DcaTransform fit_dca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::span<const int> classes);
DcaTransform fit_dca(const FeatureSet& x, const FeatureSet& y, const LabelVector& labels);

std::pair<FeatureSet, FeatureSet> transform_pair(const DcaTransform& t, const FeatureSet& x,
                                                 const FeatureSet& y);

FeatureSet fuse(const FeatureSet& xh, const FeatureSet& yh, FusionMode mode = FusionMode::kConcat,
                std::string name = "fused");

/// Count of singular values above max(p, n) * sigma_max * machine epsilon.
Eigen::Index numerical_rank(const Eigen::MatrixXd& x);

/// Sorts the sets by descending numerical rank (stable) and chains pairwise
/// DCA + fuse. Requires at least two sets sharing sample ids.
std::pair<MdcaPlan, FeatureSet> fit_mdca(std::span<const FeatureSet> sets, std::span<const int> classes,
                                         FusionMode mode = FusionMode::kConcat,
                                         std::string output = "fused");
std::pair<MdcaPlan, FeatureSet> fit_mdca(std::span<const FeatureSet> sets, const LabelVector& labels,
                                         FusionMode mode = FusionMode::kConcat,
                                         std::string output = "fused");

/// Re-applies a fitted plan; sets are looked up by name.
FeatureSet apply_mdca(const MdcaPlan& plan, std::span<const FeatureSet> sets);

}  // namespace dcamkl
