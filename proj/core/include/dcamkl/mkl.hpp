#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcamkl/dataset.hpp"
#include "dcamkl/kernels.hpp"
#include "dcamkl/svm.hpp"

namespace dcamkl {

struct MklOptions {
  double C = 1.0;
  double svm_tol = 1e-3;
  std::size_t max_svm_iterations = 1'000'000;
  double outer_tol = 1e-4;  ///< max |delta d|
  double gap_tol = 1e-2;    ///< duality gap relative to |J|
  std::size_t max_outer = 200;

  SvmOptions svm() const { return {C, svm_tol, max_svm_iterations}; }
};

struct MklObjective {
  double J = 0.0;
  SvmSolution svm;
};

/// J(d): the SVM dual optimum on sum_m d_m K_m. `warm_start` seeds SMO.
MklObjective objective(std::span<const double> d, std::span<const Eigen::MatrixXd> grams,
                       const Eigen::VectorXd& y, const SvmOptions& options,
                       const Eigen::VectorXd* warm_start = nullptr);

/// dJ/dd_m = -1/2 (alpha.y)^T K_m (alpha.y).
std::vector<double> gradient(std::span<const Eigen::MatrixXd> grams, const SvmSolution& svm,
                             const Eigen::VectorXd& y);

/// 1/2 (max_m a^T Q_m a - sum_m d_m a^T Q_m a).
double duality_gap(std::span<const double> d, std::span<const Eigen::MatrixXd> grams,
                   const SvmSolution& svm, const Eigen::VectorXd& y);

struct MklResult {
  std::vector<double> d;
  SvmSolution svm;
  std::vector<double> objective_trace;          ///< J after the start and every accepted step
  std::vector<std::vector<double>> weight_trace;  ///< d matching each trace entry
  std::size_t outer_iterations = 0;
  double gap = 0.0;
  std::string stop_reason;
};

/// SimpleMKL: reduced-gradient descent on the simplex with Armijo
/// backtracking, re-solving the SVM at every trial point.
MklResult train(std::span<const Eigen::MatrixXd> grams, const Eigen::VectorXd& y, const MklOptions& options = {});
MklResult train(std::span<const GramMatrix> grams, const LabelVector& y, const MklOptions& options = {});

/// One kernel group of a trained model: its kernel, the normalizer fit on the
/// training group, and the normalized support-sample features.
struct MklGroup {
  std::string name;
  KernelSpec spec;
  Normalizer normalizer;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd support;  ///< dims x n_support, normalized
};

struct MklModel {
  std::vector<MklGroup> groups;
  std::vector<double> d;
  double C = 1.0;
  double bias = 0.0;
  std::vector<std::string> support_ids;
  Eigen::VectorXd alpha;   ///< support entries only
  Eigen::VectorXd labels;  ///< +1/-1 of the support samples
  std::vector<double> objective_trace;
  std::vector<std::vector<double>> weight_trace;
  std::size_t outer_iterations = 0;
  double gap = 0.0;
  std::string stop_reason;
};

/// Per-group kernel request. When `median_sigma` is set the RBF width is
/// resolved from the normalized training group.
struct KernelChoice {
  KernelSpec spec;
  bool median_sigma = false;
};

/// Fits normalizers per group, builds Grams, trains and keeps the support
/// samples. Groups must share sample ids with `labels`.
MklModel fit_model(std::span<const FeatureSet> groups, const LabelVector& labels,
                   std::span<const KernelChoice> kernels, const MklOptions& options = {});

struct Prediction {
  std::vector<std::string> sample_ids;
  std::vector<int> labels;
  Eigen::VectorXd decision;
};

/// Test groups are matched to model groups by name; samples follow the first
/// group's order.
Prediction predict(const MklModel& model, std::span<const FeatureSet> groups);

}  // namespace dcamkl
