#include "dcamkl/mkl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcamkl/errors.hpp"

namespace dcamkl {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxBacktracks = 40;
constexpr double kSnap = 1e-8;

void check_grams(std::span<const Eigen::MatrixXd> grams, const Eigen::VectorXd& y) {
  if (grams.empty()) throw ValidationError("mkl: at least one kernel is required");
  for (std::size_t m = 0; m < grams.size(); ++m) {
    if (grams[m].rows() != y.size() || grams[m].cols() != y.size()) {
      throw ValidationError("mkl: kernel " + std::to_string(m) + " is " + std::to_string(grams[m].rows()) + "x" +
                            std::to_string(grams[m].cols()) + ", expected " + std::to_string(y.size()) +
                            " samples");
    }
  }
}

double quad(const Eigen::MatrixXd& K, const Eigen::VectorXd& ay) { return ay.dot(K * ay); }

/// Snap tiny weights to zero and renormalize.
void clean_simplex(std::vector<double>& d) {
  double sum = 0.0;
  for (double& v : d) {
    if (v < kSnap) v = 0.0;
    sum += v;
  }
  for (double& v : d) v /= sum;
}

}  // namespace

MklObjective objective(std::span<const double> d, std::span<const Eigen::MatrixXd> grams,
                       const Eigen::VectorXd& y, const SvmOptions& options, const Eigen::VectorXd* warm_start) {
  check_grams(grams, y);
  if (d.size() != grams.size()) throw ValidationError("mkl: weight count does not match kernel count");
  const Eigen::MatrixXd K = combine(grams, d);
  MklObjective out;
  out.svm = solve_dual(K, y, options, warm_start);
  out.J = out.svm.objective;
  return out;
}

std::vector<double> gradient(std::span<const Eigen::MatrixXd> grams, const SvmSolution& svm,
                             const Eigen::VectorXd& y) {
  const Eigen::VectorXd ay = svm.alpha.cwiseProduct(y);
  std::vector<double> g(grams.size());
  for (std::size_t m = 0; m < grams.size(); ++m) g[m] = -0.5 * quad(grams[m], ay);
  return g;
}

double duality_gap(std::span<const double> d, std::span<const Eigen::MatrixXd> grams, const SvmSolution& svm,
                   const Eigen::VectorXd& y) {
  const Eigen::VectorXd ay = svm.alpha.cwiseProduct(y);
  double mx = -std::numeric_limits<double>::infinity(), weighted = 0.0;
  for (std::size_t m = 0; m < grams.size(); ++m) {
    const double q = quad(grams[m], ay);
    mx = std::max(mx, q);
    weighted += d[m] * q;
  }
  return 0.5 * (mx - weighted);
}

MklResult train(std::span<const Eigen::MatrixXd> grams, const Eigen::VectorXd& y, const MklOptions& options) {
  check_grams(grams, y);
  const std::size_t M = grams.size();
  const SvmOptions svm_opts = options.svm();

  auto solve = [&](const std::vector<double>& d, const Eigen::VectorXd* warm, std::size_t outer) {
    try {
      return objective(d, grams, y, svm_opts, warm);
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError("MKL outer iteration " + std::to_string(outer) + ": " + e.what(), e.violation());
    }
  };

  MklResult res;
  res.d.assign(M, 1.0 / static_cast<double>(M));
  MklObjective cur = solve(res.d, nullptr, 0);
  res.objective_trace.push_back(cur.J);
  res.weight_trace.push_back(res.d);

  std::size_t outer = 0;
  for (; outer < options.max_outer; ++outer) {
    res.gap = duality_gap(res.d, grams, cur.svm, y);
    if (res.gap <= options.gap_tol * std::max(std::abs(cur.J), 1e-12)) {
      res.stop_reason = "duality_gap";
      break;
    }

    const std::vector<double> g = gradient(grams, cur.svm, y);
    const std::size_t mu = static_cast<std::size_t>(std::max_element(res.d.begin(), res.d.end()) - res.d.begin());
    std::vector<double> D(M, 0.0);
    double dmu = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      if (m == mu) continue;
      const double reduced = g[m] - g[mu];
      if (res.d[m] == 0.0 && reduced > 0.0) continue;
      D[m] = -reduced;
      dmu += reduced;
    }
    D[mu] = dmu;

    double slope = 0.0, step_max = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < M; ++m) {
      slope += g[m] * D[m];
      if (D[m] < 0.0) step_max = std::min(step_max, -res.d[m] / D[m]);
    }
    if (!(slope < 0.0) || !std::isfinite(step_max)) {
      res.stop_reason = "stationary";
      break;
    }

    bool accepted = false;
    std::vector<double> trial(M);
    MklObjective next;
    double step = step_max;
    for (int k = 0; k < kMaxBacktracks; ++k, step *= kBacktrack) {
      for (std::size_t m = 0; m < M; ++m) trial[m] = std::max(0.0, res.d[m] + step * D[m]);
      if (step == step_max) {
        // The coordinate that limits the step lands exactly on zero.
        for (std::size_t m = 0; m < M; ++m) {
          if (D[m] < 0.0 && -res.d[m] / D[m] == step_max) trial[m] = 0.0;
        }
      }
      clean_simplex(trial);
      next = solve(trial, &cur.svm.alpha, outer + 1);
      if (next.J <= cur.J + kArmijo * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.stop_reason = "line_search";
      break;
    }

    double change = 0.0;
    for (std::size_t m = 0; m < M; ++m) change = std::max(change, std::abs(trial[m] - res.d[m]));
    res.d = trial;
    cur = std::move(next);
    res.objective_trace.push_back(cur.J);
    res.weight_trace.push_back(res.d);
    if (change < options.outer_tol) {
      ++outer;
      res.stop_reason = "weight_change";
      break;
    }
  }
  if (res.stop_reason.empty()) res.stop_reason = "max_outer";
  res.outer_iterations = outer;
  res.gap = duality_gap(res.d, grams, cur.svm, y);
  res.svm = std::move(cur.svm);
  return res;
}

MklResult train(std::span<const GramMatrix> grams, const LabelVector& y, const MklOptions& options) {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(grams.size());
  for (const auto& g : grams) mats.push_back(g.values);
  return train(mats, y.as_vector(), options);
}

MklModel fit_model(std::span<const FeatureSet> groups, const LabelVector& labels,
                   std::span<const KernelChoice> kernels, const MklOptions& options) {
  if (groups.empty()) throw ValidationError("fit_model: no feature groups");
  if (groups.size() != kernels.size()) {
    throw ValidationError("fit_model: " + std::to_string(groups.size()) + " feature groups but " +
                          std::to_string(kernels.size()) + " kernels");
  }
  const auto& ids = groups.front().sample_ids();
  const LabelVector y_lab = labels.aligned_to(ids);
  y_lab.require_both_classes("fit_model");
  const Eigen::VectorXd y = y_lab.as_vector();

  MklModel model;
  std::vector<Eigen::MatrixXd> grams;
  std::vector<Eigen::MatrixXd> normalized;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const FeatureSet aligned = groups[g].select(groups[g].indices_of(ids));
    MklGroup grp;
    grp.name = groups[g].name();
    grp.normalizer = fit_normalizer(aligned);
    grp.feature_names = aligned.feature_names();
    const FeatureSet z = apply_normalizer(grp.normalizer, aligned);
    grp.spec = kernels[g].spec;
    if (kernels[g].median_sigma) {
      if (grp.spec.kind != KernelKind::kRbf) throw ValidationError("fit_model: median sigma needs an rbf kernel");
      grp.spec.sigma = median_sigma(z.values());
    }
    grp.spec.validate();
    grams.push_back(gram(grp.spec, z.values()).values);
    normalized.push_back(z.values());
    model.groups.push_back(std::move(grp));
  }

  MklResult res = train(grams, y, options);
  model.d = res.d;
  model.C = options.C;
  model.bias = res.svm.bias;
  model.objective_trace = std::move(res.objective_trace);
  model.weight_trace = std::move(res.weight_trace);
  model.outer_iterations = res.outer_iterations;
  model.gap = res.gap;
  model.stop_reason = res.stop_reason;

  const auto& sv = res.svm.support;
  model.alpha.resize(static_cast<Eigen::Index>(sv.size()));
  model.labels.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    model.alpha(static_cast<Eigen::Index>(k)) = res.svm.alpha(static_cast<Eigen::Index>(sv[k]));
    model.labels(static_cast<Eigen::Index>(k)) = y(static_cast<Eigen::Index>(sv[k]));
    model.support_ids.push_back(ids[sv[k]]);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Eigen::MatrixXd s(normalized[g].rows(), static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) s.col(static_cast<Eigen::Index>(k)) = normalized[g].col(static_cast<Eigen::Index>(sv[k]));
    model.groups[g].support = std::move(s);
  }
  return model;
}

Prediction predict(const MklModel& model, std::span<const FeatureSet> groups) {
  if (groups.empty()) throw ValidationError("predict: no feature groups");
  const auto find = [&](const std::string& name) -> const FeatureSet& {
    for (const auto& g : groups) {
      if (g.name() == name) return g;
    }
    throw ValidationError("predict: missing feature group '" + name + "'");
  };

  Prediction out;
  out.sample_ids = find(model.groups.front().name).sample_ids();
  const Eigen::Index n = static_cast<Eigen::Index>(out.sample_ids.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, model.alpha.size());
  for (std::size_t g = 0; g < model.groups.size(); ++g) {
    const MklGroup& grp = model.groups[g];
    const FeatureSet& raw = find(grp.name);
    if (raw.dims() != static_cast<Eigen::Index>(grp.feature_names.size())) {
      throw ValidationError("predict: group '" + grp.name + "' has " + std::to_string(raw.dims()) +
                            " features, model expects " + std::to_string(grp.feature_names.size()));
    }
    if (model.d[g] == 0.0) continue;
    const FeatureSet z = apply_normalizer(grp.normalizer, raw.select(raw.indices_of(out.sample_ids)));
    K += model.d[g] * gram_cross(grp.spec, grp.support, z.values());
  }
  out.decision = decision_values(model.alpha, model.bias, model.labels, K);
  out.labels = predicted_labels(out.decision);
  return out;
}

}  // namespace dcamkl
