#include "dcamkl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dcamkl/errors.hpp"
#include "text_util.hpp"

namespace dcamkl {

KernelSpec KernelSpec::rbf(double sigma) {
  KernelSpec s;
  s.kind = KernelKind::kRbf;
  s.sigma = sigma;
  s.validate();
  return s;
}

KernelSpec KernelSpec::polynomial(int degree, double scale, double offset) {
  KernelSpec s;
  s.kind = KernelKind::kPolynomial;
  s.degree = degree;
  s.scale = scale;
  s.offset = offset;
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  if (kind == KernelKind::kRbf) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("rbf kernel: sigma must be > 0");
  } else {
    if (degree < 1) throw ValidationError("polynomial kernel: degree must be >= 1");
    if (!(scale > 0.0)) throw ValidationError("polynomial kernel: scale must be > 0");
    if (!(offset >= 0.0)) throw ValidationError("polynomial kernel: offset must be >= 0");
  }
}

std::string KernelSpec::describe() const {
  if (kind == KernelKind::kRbf) return "rbf(sigma=" + detail::format_double(sigma) + ")";
  return "polynomial(degree=" + std::to_string(degree) + ", scale=" + detail::format_double(scale) +
         ", offset=" + detail::format_double(offset) + ")";
}

std::string to_string(KernelKind kind) { return kind == KernelKind::kRbf ? "rbf" : "polynomial"; }

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "rbf") return KernelKind::kRbf;
  if (name == "polynomial" || name == "poly") return KernelKind::kPolynomial;
  throw ValidationError("unknown kernel kind '" + name + "'");
}

namespace {

inline double eval_raw(const KernelSpec& spec, const double* u, const double* v, Eigen::Index d) {
  if (spec.kind == KernelKind::kRbf) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double diff = u[i] - v[i];
      s += diff * diff;
    }
    return std::exp(-s / (2.0 * spec.sigma * spec.sigma));
  }
  double dot = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) dot += u[i] * v[i];
  const double base = spec.scale * dot + spec.offset;
  double out = base;
  for (int k = 1; k < spec.degree; ++k) out *= base;
  return out;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ValidationError("kernel_eval: vector lengths " + std::to_string(u.size()) + " and " +
                          std::to_string(v.size()) + " differ");
  }
  return eval_raw(spec, u.data(), v.data(), static_cast<Eigen::Index>(u.size()));
}

GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& x) {
  spec.validate();
  const Eigen::Index n = x.cols(), d = x.rows();
  GramMatrix g{Eigen::MatrixXd(n, n), spec};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = eval_raw(spec, x.col(i).data(), x.col(j).data(), d);
      g.values(i, j) = v;
      g.values(j, i) = v;
    }
  }
  return g;
}

GramMatrix gram(const KernelSpec& spec, const FeatureSet& x) { return gram(spec, x.values()); }

Eigen::MatrixXd gram_cross(const KernelSpec& spec, const Eigen::MatrixXd& train,
                           const Eigen::MatrixXd& test) {
  spec.validate();
  if (train.rows() != test.rows()) {
    throw ValidationError("gram_cross: train has " + std::to_string(train.rows()) +
                          " features, test has " + std::to_string(test.rows()));
  }
  Eigen::MatrixXd k(test.cols(), train.cols());
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    for (Eigen::Index i = 0; i < test.cols(); ++i) {
      k(i, j) = eval_raw(spec, test.col(i).data(), train.col(j).data(), train.rows());
    }
  }
  return k;
}

Eigen::MatrixXd gram_cross(const KernelSpec& spec, const FeatureSet& train, const FeatureSet& test) {
  return gram_cross(spec, train.values(), test.values());
}

void require_simplex(std::span<const double> d) {
  if (d.empty()) throw ValidationError("kernel weights are empty");
  double sum = 0.0;
  for (double v : d) {
    if (!(v >= 0.0)) throw ValidationError("kernel weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw ValidationError("kernel weights sum to " + detail::format_double(sum) + ", not 1");
  }
}

Eigen::MatrixXd combine(std::span<const Eigen::MatrixXd> mats, std::span<const double> d) {
  if (mats.size() != d.size()) throw ValidationError("combine: weight count does not match kernel count");
  require_simplex(d);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mats[0].rows(), mats[0].cols());
  for (std::size_t m = 0; m < mats.size(); ++m) {
    if (mats[m].rows() != out.rows() || mats[m].cols() != out.cols()) {
      throw ValidationError("combine: kernel matrices differ in shape");
    }
    if (d[m] != 0.0) out += d[m] * mats[m];
  }
  return out;
}

GramMatrix combine(std::span<const GramMatrix> grams, std::span<const double> d) {
  if (grams.empty()) throw ValidationError("combine: no kernels");
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(grams.size());
  for (const auto& g : grams) mats.push_back(g.values);
  // Provenance of a combination is the dominant kernel.
  const auto top = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
  return {combine(mats, d), grams[std::min(top, grams.size() - 1)].spec};
}

double median_sigma(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.cols();
  if (n < 2) throw ValidationError("median_sigma: need at least 2 samples");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) dist.push_back((x.col(i) - x.col(j)).norm());
  }
  std::sort(dist.begin(), dist.end());
  const std::size_t m = dist.size();
  const double median = m % 2 == 1 ? dist[m / 2] : 0.5 * (dist[m / 2 - 1] + dist[m / 2]);
  return std::max(median / std::sqrt(2.0), 1e-6);
}

double median_sigma(const FeatureSet& x) { return median_sigma(x.values()); }

}  // namespace dcamkl
