#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcamkl/errors.hpp"
#include "dcamkl/features.hpp"

namespace dcamkl {

double chi_squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("chi-squared distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = a[i] + b[i];
    if (denom > 0.0) {
      const double d = a[i] - b[i];
      s += d * d / denom;
    }
  }
  return 0.5 * s;
}

namespace {

std::span<const double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

double euclidean(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double d = a(r, i) - b(r, j);
    s += d * d;
  }
  return std::sqrt(s);
}

constexpr double kReachFloor = 1e-12;

}  // namespace

Eigen::VectorXd familiarity(const FeatureSet& targets, const FeatureSet& reference, int k) {
  if (targets.dims() != reference.dims()) {
    throw ValidationError("familiarity: targets and reference differ in feature dimension");
  }
  if (k <= 0) throw ValidationError("familiarity: k must be positive");
  Eigen::VectorXd out(targets.size());
  std::vector<double> dist;
  for (Eigen::Index t = 0; t < targets.size(); ++t) {
    const auto& tid = targets.sample_ids()[static_cast<std::size_t>(t)];
    dist.clear();
    for (Eigen::Index r = 0; r < reference.size(); ++r) {
      if (reference.sample_ids()[static_cast<std::size_t>(r)] == tid) continue;
      dist.push_back(chi_squared_distance(column(targets.values(), t), column(reference.values(), r)));
    }
    if (static_cast<std::size_t>(k) > dist.size()) {
      throw ValidationError("familiarity: k=" + std::to_string(k) + " exceeds the " +
                            std::to_string(dist.size()) + " usable reference samples");
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += dist[static_cast<std::size_t>(i)];
    out(t) = s / k;
  }
  return out;
}

namespace {

struct Neighbourhood {
  double k_distance = 0.0;
  std::vector<std::pair<Eigen::Index, double>> members;  // (reference column, distance)
};

Neighbourhood neighbourhood(std::vector<std::pair<Eigen::Index, double>> candidates, int k) {
  std::vector<double> d;
  d.reserve(candidates.size());
  for (const auto& c : candidates) d.push_back(c.second);
  std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
  Neighbourhood nb;
  nb.k_distance = d[static_cast<std::size_t>(k - 1)];
  for (const auto& c : candidates) {
    if (c.second <= nb.k_distance) nb.members.push_back(c);
  }
  return nb;
}

double local_reachability_density(const Neighbourhood& nb, const std::vector<double>& k_dist) {
  double s = 0.0;
  for (const auto& [o, d] : nb.members) s += std::max(k_dist[static_cast<std::size_t>(o)], d);
  return 1.0 / std::max(s / static_cast<double>(nb.members.size()), kReachFloor);
}

}  // namespace

Eigen::VectorXd lof_scores_against(const FeatureSet& reference, const FeatureSet& queries, int k) {
  if (reference.dims() != queries.dims()) {
    throw ValidationError("lof: reference and queries differ in feature dimension");
  }
  if (k <= 0) throw ValidationError("lof: k must be positive");
  const Eigen::Index n = reference.size();
  if (n <= k) {
    throw ValidationError("lof: need more than k=" + std::to_string(k) + " reference samples");
  }
  const auto& ref = reference.values();

  std::vector<Neighbourhood> ref_nb(static_cast<std::size_t>(n));
  std::vector<double> k_dist(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) {
    std::vector<std::pair<Eigen::Index, double>> cand;
    cand.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index o = 0; o < n; ++o) {
      if (o != p) cand.emplace_back(o, euclidean(ref, p, ref, o));
    }
    ref_nb[static_cast<std::size_t>(p)] = neighbourhood(std::move(cand), k);
    k_dist[static_cast<std::size_t>(p)] = ref_nb[static_cast<std::size_t>(p)].k_distance;
  }
  std::vector<double> ref_lrd(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) {
    ref_lrd[static_cast<std::size_t>(p)] = local_reachability_density(ref_nb[static_cast<std::size_t>(p)], k_dist);
  }

  Eigen::VectorXd out(queries.size());
  for (Eigen::Index q = 0; q < queries.size(); ++q) {
    const auto& qid = queries.sample_ids()[static_cast<std::size_t>(q)];
    std::vector<std::pair<Eigen::Index, double>> cand;
    for (Eigen::Index o = 0; o < n; ++o) {
      if (reference.sample_ids()[static_cast<std::size_t>(o)] == qid) continue;
      cand.emplace_back(o, euclidean(queries.values(), q, ref, o));
    }
    if (cand.size() < static_cast<std::size_t>(k)) {
      throw ValidationError("lof: fewer than k usable reference samples for '" + qid + "'");
    }
    const Neighbourhood nb = neighbourhood(std::move(cand), k);
    const double lrd = local_reachability_density(nb, k_dist);
    double s = 0.0;
    for (const auto& [o, d] : nb.members) s += ref_lrd[static_cast<std::size_t>(o)] / lrd;
    out(q) = s / static_cast<double>(nb.members.size());
  }
  return out;
}

Eigen::VectorXd lof_scores(const FeatureSet& points, int k) {
  return lof_scores_against(points, points, k);
}

}  // namespace dcamkl
