#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "dcamkl/errors.hpp"
#include "dcamkl/kernels.hpp"
#include "dcamkl/mkl.hpp"
#include "oracles.hpp"

using namespace dcamkl;

namespace {

struct Grams {
  std::vector<Eigen::MatrixXd> K;
  Eigen::VectorXd y;
};

Grams small_problem(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  Grams g;
  g.y.resize(n);
  for (int i = 0; i < n; ++i) g.y(i) = i % 2 ? -1.0 : 1.0;
  Eigen::MatrixXd a = oracle::random_matrix(3, n, rng), b = oracle::random_matrix(3, n, rng),
                  c = oracle::random_matrix(3, n, rng);
  a.row(0) += 0.8 * g.y.transpose();
  b.row(1) += 0.6 * g.y.transpose();
  g.K = {gram(KernelSpec::rbf(1.5), a).values, gram(KernelSpec::polynomial(2, 0.3), b).values,
         gram(KernelSpec::rbf(1.0), c).values};
  return g;
}

Eigen::MatrixXd weighted(const std::vector<Eigen::MatrixXd>& K, const std::vector<double>& d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K[0].rows(), K[0].cols());
  for (std::size_t m = 0; m < K.size(); ++m) out += d[m] * K[m];
  return out;
}

}  // namespace

TEST(MklObjective, SingleKernelIsPlainSvm) {
  Grams g = small_problem(1, 20);
  std::vector<Eigen::MatrixXd> one = {g.K[0]};
  std::vector<double> d = {1.0};
  auto J = objective(d, one, g.y, {1.0, 1e-6});
  EXPECT_EQ(J.J, solve_dual(g.K[0], g.y, {1.0, 1e-6}).objective);
}

TEST(MklObjective, SymmetricUnderPermutingIdenticalKernels) {
  Grams g = small_problem(2, 20);
  std::vector<Eigen::MatrixXd> dup = {g.K[0], g.K[0], g.K[1]};
  std::vector<double> d1 = {0.2, 0.5, 0.3}, d2 = {0.5, 0.2, 0.3};
  EXPECT_NEAR(objective(d1, dup, g.y, {1.0, 1e-8}).J, objective(d2, dup, g.y, {1.0, 1e-8}).J, 1e-8);
}

TEST(MklObjective, MatchesQpOracle) {
  Grams g = small_problem(3, 12);
  std::vector<double> d = {0.2, 0.3, 0.5};
  auto J = objective(d, g.K, g.y, {1.0, 1e-7});
  EXPECT_NEAR(J.J, oracle::svm_dual(weighted(g.K, d), g.y, 1.0).objective, 1e-4);
}

TEST(MklGradient, ZeroAlphaAndSymmetry) {
  Grams g = small_problem(4, 10);
  SvmSolution zero;
  zero.alpha = Eigen::VectorXd::Zero(10);
  for (double v : gradient(g.K, zero, g.y)) EXPECT_EQ(v, 0.0);

  std::vector<Eigen::MatrixXd> dup = {g.K[1], g.K[1]};
  std::vector<double> d = {0.5, 0.5};
  auto grad = gradient(dup, objective(d, dup, g.y, {}).svm, g.y);
  EXPECT_EQ(grad[0], grad[1]);
}

TEST(MklGradient, CentralDifferences) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Grams g = small_problem(seed, 16 + static_cast<int>(seed) * 4);
    std::vector<double> d = {0.3, 0.45, 0.25};
    const SvmOptions tight{1.0, 1e-10};
    auto at = objective(d, g.K, g.y, tight);
    auto grad = gradient(g.K, at.svm, g.y);
    const double eps = 1e-4;
    for (std::size_t m = 0; m < 3; ++m) {
      std::vector<double> up = d, down = d;
      up[m] += eps;
      down[m] -= eps;
      const double fd = (solve_dual(weighted(g.K, up), g.y, tight).objective -
                         solve_dual(weighted(g.K, down), g.y, tight).objective) /
                        (2 * eps);
      EXPECT_LE(std::abs(fd - grad[m]), 1e-3 * std::abs(grad[m])) << "seed " << seed << " m " << m;
    }
  }
}

TEST(MklTrain, SimplexAndMonotoneTrace) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Grams g = small_problem(seed, 40);
    auto r = train(g.K, g.y, {1.0, 1e-6});
    ASSERT_EQ(r.objective_trace.size(), r.weight_trace.size());
    for (const auto& d : r.weight_trace) {
      double s = 0;
      for (double v : d) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-8);
    }
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      EXPECT_LE(r.objective_trace[i], r.objective_trace[i - 1] + 1e-9);
    EXPECT_FALSE(r.stop_reason.empty());
  }
}

TEST(MklTrain, SingleKernelReducesToSvm) {
  Grams g = small_problem(7, 30);
  std::vector<Eigen::MatrixXd> one = {g.K[2]};
  auto r = train(one, g.y, {1.0, 1e-6});
  EXPECT_EQ(r.d, std::vector<double>{1.0});
  auto s = solve_dual(g.K[2], g.y, {1.0, 1e-6});
  Eigen::VectorXd fm = decision_values(r.svm.alpha, r.svm.bias, g.y, g.K[2]);
  Eigen::VectorXd fs = decision_values(s.alpha, s.bias, g.y, g.K[2]);
  EXPECT_LE((fm - fs).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(MklTrain, DuplicatedKernelMatchesSingle) {
  Grams g = small_problem(8, 30);
  std::vector<Eigen::MatrixXd> dup = {g.K[0], g.K[0]};
  auto r = train(dup, g.y, {1.0, 1e-8});
  EXPECT_NEAR(r.d[0] + r.d[1], 1.0, 1e-12);
  EXPECT_NEAR(r.objective_trace.back(), solve_dual(g.K[0], g.y, {1.0, 1e-8}).objective, 1e-6);
}

TEST(MklTrain, NonConvergenceNamesOuterIteration) {
  Grams g = small_problem(9, 40);
  MklOptions o;
  o.C = 100.0;
  o.svm_tol = 1e-9;
  o.max_svm_iterations = 3;
  try {
    train(g.K, g.y, o);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("MKL outer iteration"), std::string::npos);
  }
}

TEST(MklTrain, RejectsMisshapenGrams) {
  Grams g = small_problem(10, 10);
  std::vector<Eigen::MatrixXd> bad = {g.K[0], Eigen::MatrixXd::Identity(4, 4)};
  EXPECT_THROW(train(bad, g.y), ValidationError);
  std::vector<Eigen::MatrixXd> none;
  EXPECT_THROW(train(none, g.y), ValidationError);
}

// ---- model-level ----------------------------------------------------------

TEST(MklModel, SeparableTrainingSetIsFit) {
  auto task = fixture::three_kernel_task(1, 60, 60);
  std::vector<FeatureSet> groups;
  for (const auto& s : task.train) {
    Eigen::MatrixXd v = s.values();
    for (Eigen::Index j = 0; j < v.cols(); ++j) v(0, j) += 6.0 * task.train_labels[static_cast<std::size_t>(j)];
    groups.emplace_back(s.name(), v, s.sample_ids());
  }
  std::vector<KernelChoice> k(3, KernelChoice{KernelSpec::rbf(1.0), true});
  MklOptions o;
  o.C = 100.0;
  auto model = fit_model(groups, task.train_labels, k, o);
  auto p = predict(model, groups);
  EXPECT_EQ(p.labels, task.train_labels.labels());
}

TEST(MklModel, PredictMatchesUnrolledSum) {
  auto task = fixture::three_kernel_task(2, 80, 50);
  std::vector<KernelChoice> k = {{KernelSpec::rbf(1.0), true}, {KernelSpec::polynomial(2, 0.2), false},
                                 {KernelSpec::rbf(2.0), false}};
  auto model = fit_model(task.train, task.train_labels, k);
  auto p = predict(model, task.test);
  for (Eigen::Index t = 0; t < task.test[0].size(); ++t) {
    double f = model.bias;
    for (std::size_t m = 0; m < model.groups.size(); ++m) {
      const auto& grp = model.groups[m];
      Eigen::VectorXd z = (task.test[m].values().col(t) - grp.normalizer.means).cwiseQuotient(grp.normalizer.stds);
      for (Eigen::Index i = 0; i < grp.support.cols(); ++i)
        f += model.d[m] * model.alpha(i) * model.labels(i) * oracle::kernel(grp.spec, z, grp.support.col(i));
    }
    EXPECT_NEAR(p.decision(t), f, 1e-10);
  }
}

TEST(MklModel, SingleGroupEqualsPlainSvm) {
  auto task = fixture::three_kernel_task(3, 80, 50);
  std::vector<FeatureSet> one = {task.train[0]};
  std::vector<KernelChoice> k = {{KernelSpec::rbf(1.0), true}};
  auto model = fit_model(one, task.train_labels, k);
  auto z = apply_normalizer(fit_normalizer(one[0]), one[0]);
  const KernelSpec spec = KernelSpec::rbf(median_sigma(z));
  auto s = solve_dual(gram(spec, z).values, task.train_labels.as_vector(), {1.0, 1e-3});
  std::vector<FeatureSet> test = {task.test[0]};
  auto zt = apply_normalizer(fit_normalizer(one[0]), task.test[0]);
  Eigen::VectorXd f = decision_values(s.alpha, s.bias, task.train_labels.as_vector(), gram_cross(spec, z, zt));
  EXPECT_LE((predict(model, test).decision - f).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(MklModel, MissingGroupRejected) {
  auto task = fixture::three_kernel_task(4, 60, 40);
  std::vector<KernelChoice> k(3, KernelChoice{KernelSpec::rbf(1.0), true});
  auto model = fit_model(task.train, task.train_labels, k);
  std::vector<FeatureSet> partial = {task.test[0], task.test[1]};
  EXPECT_THROW(predict(model, partial), ValidationError);
}
