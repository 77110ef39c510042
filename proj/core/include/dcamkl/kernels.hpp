#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcamkl/dataset.hpp"

namespace dcamkl {

enum class KernelKind { kRbf, kPolynomial };

/// rbf: exp(-|u-v|^2 / (2 sigma^2)).
/// polynomial: (scale * u.v + offset)^degree.
struct KernelSpec {
  KernelKind kind = KernelKind::kRbf;
  double sigma = 1.0;
  int degree = 2;
  double scale = 1.0;
  double offset = 1.0;

  static KernelSpec rbf(double sigma);
  static KernelSpec polynomial(int degree, double scale = 1.0, double offset = 1.0);

  /// Throws ValidationError for non-positive sigma/scale, degree < 1, or a
  /// negative offset.
  void validate() const;
  std::string describe() const;
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

struct GramMatrix {
  Eigen::MatrixXd values;
  KernelSpec spec;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v);

/// Symmetric n x n Gram over the columns of `x`. Callers standardize the
/// features first.
GramMatrix gram(const KernelSpec& spec, const FeatureSet& x);
GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& x);

/// n_test x n_train kernel evaluations.
Eigen::MatrixXd gram_cross(const KernelSpec& spec, const Eigen::MatrixXd& train,
                           const Eigen::MatrixXd& test);
Eigen::MatrixXd gram_cross(const KernelSpec& spec, const FeatureSet& train, const FeatureSet& test);

inline constexpr double kSimplexTolerance = 1e-8;

/// Throws ValidationError unless sum(d) = 1 within kSimplexTolerance and
/// every d_m >= 0.
void require_simplex(std::span<const double> d);

/// Weighted sum of equally shaped matrices with simplex weights.
Eigen::MatrixXd combine(std::span<const Eigen::MatrixXd> mats, std::span<const double> d);
GramMatrix combine(std::span<const GramMatrix> grams, std::span<const double> d);

/// Median pairwise Euclidean distance over sqrt(2), floored at 1e-6.
double median_sigma(const FeatureSet& x);
double median_sigma(const Eigen::MatrixXd& x);

}  // namespace dcamkl
