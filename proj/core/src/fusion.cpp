#include "dcamkl/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "dcamkl/errors.hpp"

namespace dcamkl {

std::string to_string(FusionMode mode) { return mode == FusionMode::kConcat ? "concat" : "sum"; }

FusionMode fusion_mode_from_string(const std::string& name) {
  if (name == "concat") return FusionMode::kConcat;
  if (name == "sum") return FusionMode::kSum;
  throw ValidationError("unknown fusion mode '" + name + "'");
}

ScatterDecomposition between_class_scatter(const Eigen::MatrixXd& x, std::span<const int> classes) {
  if (static_cast<Eigen::Index>(classes.size()) != x.cols()) {
    throw ValidationError("between_class_scatter: " + std::to_string(classes.size()) +
                          " labels for " + std::to_string(x.cols()) + " samples");
  }
  std::map<int, std::vector<Eigen::Index>> members;
  for (Eigen::Index j = 0; j < x.cols(); ++j) members[classes[static_cast<std::size_t>(j)]].push_back(j);
  if (members.size() < 2) throw ValidationError("between_class_scatter: need at least two classes");

  const Eigen::VectorXd global = x.rowwise().mean();
  ScatterDecomposition out;
  out.phi.resize(x.rows(), static_cast<Eigen::Index>(members.size()));
  Eigen::Index c = 0;
  for (const auto& [label, cols] : members) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(x.rows());
    for (auto j : cols) mean += x.col(j);
    mean /= static_cast<double>(cols.size());
    out.phi.col(c++) = std::sqrt(static_cast<double>(cols.size())) * (mean - global);
  }
  return out;
}

ScatterDecomposition between_class_scatter(const FeatureSet& x, const LabelVector& labels) {
  const auto aligned = labels.aligned_to(x.sample_ids());
  return between_class_scatter(x.values(), aligned.labels());
}

ScatterDecomposition unitize_scatter(ScatterDecomposition decomp, double tol) {
  const Eigen::MatrixXd gram = decomp.phi.transpose() * decomp.phi;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  const double lmax = lambda.size() > 0 ? lambda(lambda.size() - 1) : 0.0;
  if (!(lmax > 0.0)) throw DegenerateFusionError("between-class scatter is zero");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = lambda.size() - 1; i >= 0; --i) {
    if (lambda(i) > tol * lmax) keep.push_back(i);
  }
  decomp.r = static_cast<Eigen::Index>(keep.size());
  decomp.w_b.resize(decomp.phi.rows(), decomp.r);
  for (Eigen::Index k = 0; k < decomp.r; ++k) {
    const Eigen::Index i = keep[static_cast<std::size_t>(k)];
    // phi * q has norm sqrt(lambda); a second 1/sqrt(lambda) makes the
    // projected scatter the identity.
    decomp.w_b.col(k) = decomp.phi * eig.eigenvectors().col(i) / lambda(i);
  }
  return decomp;
}

DcaTransform fit_dca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::span<const int> classes) {
  if (x.cols() != y.cols()) throw ValidationError("fit_dca: sample counts differ");
  const auto dx = unitize_scatter(between_class_scatter(x, classes));
  const auto dy = unitize_scatter(between_class_scatter(y, classes));
  const Eigen::Index r = std::min(dx.r, dy.r);
  const Eigen::MatrixXd wbx = dx.w_b.leftCols(r);
  const Eigen::MatrixXd wby = dy.w_b.leftCols(r);

  const Eigen::MatrixXd xp = wbx.transpose() * x;
  const Eigen::MatrixXd yp = wby.transpose() * y;
  const Eigen::MatrixXd sxy = xp * yp.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sxy, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (!(smax > 0.0)) throw DegenerateFusionError("between-set covariance is zero");
  Eigen::Index k = 0;
  while (k < s.size() && s(k) > kSingularTolerance * smax) ++k;

  const Eigen::VectorXd inv_sqrt = s.head(k).array().rsqrt();
  const Eigen::MatrixXd wcx = svd.matrixU().leftCols(k) * inv_sqrt.asDiagonal();
  const Eigen::MatrixXd wcy = svd.matrixV().leftCols(k) * inv_sqrt.asDiagonal();

  DcaTransform t;
  t.w_x = wcx.transpose() * wbx.transpose();
  t.w_y = wcy.transpose() * wby.transpose();
  t.r = k;
  t.sigma = s.head(k);
  return t;
}

DcaTransform fit_dca(const FeatureSet& x, const FeatureSet& y, const LabelVector& labels) {
  if (x.sample_ids() != y.sample_ids()) {
    throw ValidationError("fit_dca: '" + x.name() + "' and '" + y.name() + "' are not aligned");
  }
  const auto aligned = labels.aligned_to(x.sample_ids());
  aligned.require_both_classes("fit_dca");
  return fit_dca(x.values(), y.values(), aligned.labels());
}

namespace {

FeatureSet project(const Eigen::MatrixXd& w, const FeatureSet& s) {
  if (w.cols() != s.dims()) {
    throw ValidationError("DCA transform expects " + std::to_string(w.cols()) + " features, '" +
                          s.name() + "' has " + std::to_string(s.dims()));
  }
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < w.rows(); ++i) names.push_back("dca" + std::to_string(i));
  return FeatureSet(s.name(), w * s.values(), s.sample_ids(), std::move(names));
}

}  // namespace

std::pair<FeatureSet, FeatureSet> transform_pair(const DcaTransform& t, const FeatureSet& x,
                                                 const FeatureSet& y) {
  return {project(t.w_x, x), project(t.w_y, y)};
}

FeatureSet fuse(const FeatureSet& xh, const FeatureSet& yh, FusionMode mode, std::string name) {
  if (xh.sample_ids() != yh.sample_ids()) {
    throw ValidationError("fuse: '" + xh.name() + "' and '" + yh.name() + "' are not aligned");
  }
  if (mode == FusionMode::kConcat) {
    const FeatureSet parts[2] = {xh, yh};
    return concatenate(parts, std::move(name));
  }
  if (xh.dims() != yh.dims()) {
    throw ValidationError("fuse(sum): dimensions " + std::to_string(xh.dims()) + " and " +
                          std::to_string(yh.dims()) + " differ");
  }
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < xh.dims(); ++i) names.push_back("dcf" + std::to_string(i));
  return FeatureSet(std::move(name), xh.values() + yh.values(), xh.sample_ids(), std::move(names));
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& x) {
  if (x.size() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double tol = static_cast<double>(std::max(x.rows(), x.cols())) * s(0) *
                     std::numeric_limits<double>::epsilon();
  return (s.array() > tol).count();
}

std::pair<MdcaPlan, FeatureSet> fit_mdca(std::span<const FeatureSet> sets, std::span<const int> classes,
                                         FusionMode mode, std::string output) {
  if (sets.size() < 2) throw ValidationError("fit_mdca: need at least two feature sets");
  std::vector<std::size_t> order(sets.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Eigen::Index> ranks;
  for (const auto& s : sets) ranks.push_back(numerical_rank(s.values()));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks[a] > ranks[b]; });

  MdcaPlan plan;
  plan.output = output;
  plan.mode = mode;
  for (auto i : order) plan.order.push_back(sets[i].name());

  FeatureSet current = sets[order[0]];
  for (std::size_t s = 1; s < order.size(); ++s) {
    const FeatureSet& next = sets[order[s]];
    if (next.sample_ids() != current.sample_ids()) {
      throw ValidationError("fit_mdca: '" + next.name() + "' is not aligned with '" +
                            sets[order[0]].name() + "'");
    }
    MdcaStep step;
    step.left = current.name();
    step.right = next.name();
    step.output = s + 1 == order.size() ? output : output + ".step" + std::to_string(s);
    try {
      step.transform = fit_dca(current.values(), next.values(), classes);
    } catch (const DegenerateFusionError& e) {
      throw DegenerateFusionError("fusion '" + output + "' step " + std::to_string(s) + " (" +
                                  step.left + " + " + step.right + "): " + e.what());
    }
    auto [xh, yh] = transform_pair(step.transform, current, next);
    current = fuse(xh, yh, mode, step.output);
    plan.steps.push_back(std::move(step));
  }
  return {std::move(plan), std::move(current)};
}

std::pair<MdcaPlan, FeatureSet> fit_mdca(std::span<const FeatureSet> sets, const LabelVector& labels,
                                         FusionMode mode, std::string output) {
  if (sets.empty()) throw ValidationError("fit_mdca: need at least two feature sets");
  const auto aligned = labels.aligned_to(sets.front().sample_ids());
  aligned.require_both_classes("fit_mdca");
  return fit_mdca(sets, aligned.labels(), mode, std::move(output));
}

FeatureSet apply_mdca(const MdcaPlan& plan, std::span<const FeatureSet> sets) {
  auto find = [&](const std::string& name) -> const FeatureSet& {
    for (const auto& s : sets) {
      if (s.name() == name) return s;
    }
    throw ValidationError("fusion plan '" + plan.output + "' needs missing feature set '" + name + "'");
  };
  if (plan.steps.empty()) throw ValidationError("fusion plan '" + plan.output + "' has no steps");
  FeatureSet current = find(plan.steps.front().left);
  for (const auto& step : plan.steps) {
    const FeatureSet& next = find(step.right);
    auto [xh, yh] = transform_pair(step.transform, current, next);
    current = fuse(xh, yh, plan.mode, step.output);
  }
  return current;
}

}  // namespace dcamkl
