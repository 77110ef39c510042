#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

namespace {

// Clip(v - lambda y) is non-increasing in lambda along y; bisect for y.a = 0.
Eigen::VectorXd project(const Eigen::VectorXd& v, const Eigen::VectorXd& y, double C) {
  auto at = [&](double lam) {
    Eigen::VectorXd a(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) a(i) = std::clamp(v(i) - lam * y(i), 0.0, C);
    return a;
  };
  double lo = -1.0, hi = 1.0;
  while (y.dot(at(lo)) < 0.0) lo *= 2.0;
  while (y.dot(at(hi)) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (y.dot(at(mid)) > 0.0) lo = mid; else hi = mid;
  }
  return at(0.5 * (lo + hi));
}

}  // namespace

double dual_value(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const Eigen::VectorXd& a) {
  double quad = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < a.size(); ++j) quad += a(i) * a(j) * y(i) * y(j) * K(i, j);
  return a.sum() - 0.5 * quad;
}

QpSolution svm_dual(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C, int iterations) {
  const Eigen::Index n = y.size();
  const Eigen::MatrixXd Q = (y * y.transpose()).cwiseProduct(K);
  const double L = std::max(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q).eigenvalues().maxCoeff(), 1e-12);

  Eigen::VectorXd a = Eigen::VectorXd::Zero(n), prev = a, z = a;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - Q * z;
    a = project(z + grad / L, y, C);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = a + ((t - 1.0) / t_next) * (a - prev);
    // Restart momentum when the objective drops.
    if (dual_value(K, y, a) < dual_value(K, y, prev)) {
      z = a;
      t = 1.0;
    } else {
      t = t_next;
    }
    if ((a - prev).lpNorm<Eigen::Infinity>() < 1e-15 && it > 100) break;
    prev = a;
  }

  QpSolution out;
  out.alpha = a;
  out.objective = dual_value(K, y, a);

  const double eps = 1e-6 * C;
  double sum = 0.0, lo = -std::numeric_limits<double>::infinity(), hi = -lo;
  int count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double f = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) f += a(j) * y(j) * K(i, j);
    const double b = y(i) - f;
    if (a(i) > eps && a(i) < C - eps) {
      sum += b;
      ++count;
    } else if ((a(i) <= eps) == (y(i) > 0)) {
      lo = std::max(lo, b);  // y f >= 1 side
    } else {
      hi = std::min(hi, b);
    }
  }
  if (count > 0) {
    out.bias = sum / count;
  } else if (std::isfinite(lo) && std::isfinite(hi)) {
    out.bias = 0.5 * (lo + hi);
  } else {
    out.bias = std::isfinite(lo) ? lo : hi;
  }
  return out;
}

Eigen::VectorXd decision(const Eigen::VectorXd& a, double b, const Eigen::VectorXd& y,
                         const Eigen::MatrixXd& K_cross) {
  Eigen::VectorXd f(K_cross.rows());
  for (Eigen::Index t = 0; t < K_cross.rows(); ++t) {
    double s = b;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += a(i) * y(i) * K_cross(t, i);
    f(t) = s;
  }
  return f;
}

Eigen::MatrixXd scatter(const Eigen::MatrixXd& x, std::span<const int> classes) {
  const Eigen::Index p = x.rows(), n = x.cols();
  std::vector<int> ids(classes.begin(), classes.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::vector<double> mean(static_cast<std::size_t>(p), 0.0);
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index j = 0; j < n; ++j) mean[r] += x(r, j);
    mean[r] /= static_cast<double>(n);
  }
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
  for (int c : ids) {
    std::vector<double> m(static_cast<std::size_t>(p), 0.0);
    int nc = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (classes[static_cast<std::size_t>(j)] != c) continue;
      ++nc;
      for (Eigen::Index r = 0; r < p; ++r) m[r] += x(r, j);
    }
    for (auto& v : m) v /= nc;
    for (Eigen::Index r = 0; r < p; ++r)
      for (Eigen::Index s = 0; s < p; ++s) S(r, s) += nc * (m[r] - mean[r]) * (m[s] - mean[s]);
  }
  return S;
}

double auc_pairs(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == 1) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

double kernel(const dcamkl::KernelSpec& spec, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (spec.kind == dcamkl::KernelKind::kRbf) {
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) d2 += (u(i) - v(i)) * (u(i) - v(i));
    return std::exp(-d2 / (2.0 * spec.sigma * spec.sigma));
  }
  double dot = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) dot += u(i) * v(i);
  return std::pow(spec.scale * dot + spec.offset, spec.degree);
}

Eigen::MatrixXd gram(const dcamkl::KernelSpec& spec, const Eigen::MatrixXd& train, const Eigen::MatrixXd& test) {
  Eigen::MatrixXd K(test.cols(), train.cols());
  for (Eigen::Index t = 0; t < test.cols(); ++t)
    for (Eigen::Index i = 0; i < train.cols(); ++i) K(t, i) = kernel(spec, test.col(t), train.col(i));
  return K;
}

double median_sigma(const Eigen::MatrixXd& x) {
  std::vector<double> d;
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    for (Eigen::Index j = i + 1; j < x.cols(); ++j) d.push_back((x.col(i) - x.col(j)).norm());
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size();
  const double med = m % 2 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
  return std::max(med / std::sqrt(2.0), 1e-6);
}

Eigen::VectorXd familiarity(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& reference, int k,
                            bool exclude_same_index) {
  Eigen::VectorXd out(targets.cols());
  for (Eigen::Index t = 0; t < targets.cols(); ++t) {
    std::vector<double> d;
    for (Eigen::Index r = 0; r < reference.cols(); ++r) {
      if (exclude_same_index && r == t) continue;
      double s = 0.0;
      for (Eigen::Index i = 0; i < targets.rows(); ++i) {
        const double a = targets(i, t), b = reference(i, r);
        if (a + b > 0.0) s += (a - b) * (a - b) / (a + b);
      }
      d.push_back(0.5 * s);
    }
    std::sort(d.begin(), d.end());
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += d[static_cast<std::size_t>(i)];
    out(t) = sum / k;
  }
  return out;
}

Eigen::VectorXd lof(const Eigen::MatrixXd& points, int k) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd D(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) D(i, j) = (points.col(i) - points.col(j)).norm();

  std::vector<double> kdist(static_cast<std::size_t>(n));
  std::vector<std::vector<Eigen::Index>> nbrs(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) {
    std::vector<double> row;
    for (Eigen::Index o = 0; o < n; ++o)
      if (o != p) row.push_back(D(p, o));
    std::sort(row.begin(), row.end());
    kdist[p] = row[static_cast<std::size_t>(k - 1)];
    for (Eigen::Index o = 0; o < n; ++o)
      if (o != p && D(p, o) <= kdist[p]) nbrs[p].push_back(o);
  }
  std::vector<double> lrd(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) {
    double s = 0.0;
    for (Eigen::Index o : nbrs[p]) s += std::max(kdist[o], D(p, o));
    lrd[p] = 1.0 / std::max(s / static_cast<double>(nbrs[p].size()), 1e-12);
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    double s = 0.0;
    for (Eigen::Index o : nbrs[p]) s += lrd[o] / lrd[p];
    out(p) = s / static_cast<double>(nbrs[p].size());
  }
  return out;
}

Eigen::MatrixXd class_gaussians(Eigen::Index rows, std::span<const int> classes, double spread,
                                std::mt19937_64& rng) {
  const int c = *std::max_element(classes.begin(), classes.end()) + 1;
  const Eigen::MatrixXd means = random_matrix(rows, c, rng) * spread;
  Eigen::MatrixXd x = random_matrix(rows, static_cast<Eigen::Index>(classes.size()), rng);
  for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j) += means.col(classes[static_cast<std::size_t>(j)]);
  return x;
}

std::vector<int> cyclic_classes(std::size_t n, int c) {
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<int>(i % static_cast<std::size_t>(c));
  return out;
}

double off_diagonal(const Eigen::MatrixXd& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j) s += std::abs(m(i, j));
  return s;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

std::vector<std::string> make_ids(std::size_t n, const std::string& prefix) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

}  // namespace oracle

namespace fixture {

KernelTask three_kernel_task(std::uint64_t seed, std::size_t n, std::size_t train) {
  std::mt19937_64 rng(seed);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = i % 2 ? -1 : 1;

  auto group = [&](double shift) {
    Eigen::MatrixXd m = oracle::random_matrix(5, static_cast<Eigen::Index>(n), rng);
    for (std::size_t j = 0; j < n; ++j) {
      m(0, static_cast<Eigen::Index>(j)) += shift * y[j];
      m(1, static_cast<Eigen::Index>(j)) += 0.5 * shift * y[j];
    }
    return m;
  };
  const Eigen::MatrixXd a = group(0.9), b = group(0.9), noise = group(0.0);

  const auto ids = oracle::make_ids(n);
  const std::vector<std::string> train_ids(ids.begin(), ids.begin() + static_cast<long>(train));
  const std::vector<std::string> test_ids(ids.begin() + static_cast<long>(train), ids.end());
  const auto cols = static_cast<Eigen::Index>(train);
  const auto rest = static_cast<Eigen::Index>(n - train);

  KernelTask t;
  for (const auto& [name, m] : {std::pair<std::string, Eigen::MatrixXd>{"a", a}, {"b", b}, {"noise", noise}}) {
    t.train.emplace_back(name, m.leftCols(cols), train_ids);
    t.test.emplace_back(name, m.rightCols(rest), test_ids);
  }
  t.train_labels = {std::vector<int>(y.begin(), y.begin() + static_cast<long>(train)), train_ids};
  t.test_labels = {std::vector<int>(y.begin() + static_cast<long>(train), y.end()), test_ids};
  return t;
}

}  // namespace fixture
