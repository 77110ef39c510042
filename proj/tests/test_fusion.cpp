#include <random>

#include <gtest/gtest.h>

#include "dcamkl/errors.hpp"
#include "dcamkl/fusion.hpp"
#include "oracles.hpp"

using namespace dcamkl;

namespace {

LabelVector binary_labels(std::span<const int> classes) {
  std::vector<int> l;
  for (int c : classes) l.push_back(c == 0 ? 1 : -1);
  return {l, oracle::make_ids(classes.size())};
}

FeatureSet named(const std::string& name, const Eigen::MatrixXd& m) {
  return {name, m, oracle::make_ids(static_cast<std::size_t>(m.cols()))};
}

}  // namespace

TEST(Scatter, SymmetricMeans) {
  Eigen::MatrixXd x(1, 4);
  x << 2, -2, 2, -2;
  auto cls = oracle::cyclic_classes(4, 2);
  auto d = between_class_scatter(x, cls);
  ASSERT_EQ(d.phi.cols(), 2);
  EXPECT_NEAR(d.phi(0, 0), std::sqrt(2.0) * 2.0, 1e-12);
  EXPECT_NEAR(d.phi(0, 1), -std::sqrt(2.0) * 2.0, 1e-12);
}

TEST(Scatter, IdenticalMeansGiveZero) {
  Eigen::MatrixXd x(2, 4);
  x << 1, 1, 3, 3, 0, 0, 0, 0;
  auto cls = std::vector<int>{0, 1, 0, 1};
  EXPECT_EQ(between_class_scatter(x, cls).phi.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(unitize_scatter(between_class_scatter(x, cls)), DegenerateFusionError);
}

TEST(Scatter, MatchesDoubleLoop) {
  std::mt19937_64 rng(1);
  auto cls = oracle::cyclic_classes(40, 2);
  Eigen::MatrixXd x = oracle::random_matrix(5, 40, rng);
  auto d = between_class_scatter(x, cls);
  EXPECT_LE((d.phi * d.phi.transpose() - oracle::scatter(x, cls)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Scatter, SingleClassRejected) {
  std::vector<int> l(5, 1);
  LabelVector labels(l, oracle::make_ids(5));
  EXPECT_THROW(between_class_scatter(named("x", Eigen::MatrixXd::Ones(2, 5)), labels), ValidationError);
}

TEST(Unitize, BinaryGivesUnitScatter) {
  std::mt19937_64 rng(2);
  auto cls = oracle::cyclic_classes(30, 2);
  Eigen::MatrixXd x = oracle::class_gaussians(6, cls, 2.0, rng);
  auto d = unitize_scatter(between_class_scatter(x, cls));
  EXPECT_EQ(d.r, 1);
  Eigen::MatrixXd s = d.w_b.transpose() * d.phi * d.phi.transpose() * d.w_b;
  EXPECT_NEAR(s(0, 0), 1.0, 1e-10);
}

TEST(Unitize, RankBoundedByClassesMinusOne) {
  std::mt19937_64 rng(3);
  for (int c = 2; c <= 5; ++c) {
    auto cls = oracle::cyclic_classes(50, c);
    auto d = unitize_scatter(between_class_scatter(oracle::class_gaussians(8, cls, 2.0, rng), cls));
    EXPECT_LE(d.r, c - 1);
    Eigen::MatrixXd s = d.w_b.transpose() * d.phi * d.phi.transpose() * d.w_b;
    EXPECT_LE((s - Eigen::MatrixXd::Identity(d.r, d.r)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Dca, IdenticalInputs) {
  std::mt19937_64 rng(4);
  auto cls = oracle::cyclic_classes(40, 2);
  Eigen::MatrixXd x = oracle::class_gaussians(5, cls, 2.0, rng);
  auto t = fit_dca(x, x, cls);
  Eigen::MatrixXd xh = t.w_x * x, yh = t.w_y * x;
  EXPECT_LE((xh - yh).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR((xh * yh.transpose())(0, 0), 1.0, 1e-8);
}

TEST(Dca, RandomBinaryHasUnitCovariance) {
  std::mt19937_64 rng(5);
  auto cls = oracle::cyclic_classes(60, 2);
  Eigen::MatrixXd x = oracle::random_matrix(10, 60, rng), y = oracle::random_matrix(7, 60, rng);
  auto t = fit_dca(x, y, cls);
  EXPECT_EQ(t.r, 1);
  EXPECT_NEAR(((t.w_x * x) * (t.w_y * y).transpose())(0, 0), 1.0, 1e-6);
}

TEST(Dca, FourClassesDiagonalizeScatter) {
  std::mt19937_64 rng(6);
  auto cls = oracle::cyclic_classes(80, 4);
  Eigen::MatrixXd x = oracle::class_gaussians(9, cls, 3.0, rng), y = oracle::class_gaussians(6, cls, 3.0, rng);
  auto t = fit_dca(x, y, cls);
  EXPECT_EQ(t.r, 3);
  for (const Eigen::MatrixXd& h : {Eigen::MatrixXd(t.w_x * x), Eigen::MatrixXd(t.w_y * y)}) {
    Eigen::MatrixXd s = oracle::scatter(h, cls);
    EXPECT_LT(oracle::off_diagonal(s), 1e-6 * s.trace());
  }
}

// Invariants over many shapes, class counts and seeds.
TEST(Dca, InvariantsHoldOnRandomFixtures) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 30), samples(20, 200), classes(2, 4);
  for (int trial = 0; trial < 40; ++trial) {
    const int c = classes(rng), p = dim(rng), q = dim(rng), n = samples(rng);
    auto cls = oracle::cyclic_classes(static_cast<std::size_t>(n), c);
    Eigen::MatrixXd x = oracle::class_gaussians(p, cls, 1.5, rng), y = oracle::class_gaussians(q, cls, 1.5, rng);
    auto t = fit_dca(x, y, cls);
    const Eigen::Index bound = std::min<Eigen::Index>({c - 1, numerical_rank(x), numerical_rank(y)});
    EXPECT_LE(t.r, bound) << "trial " << trial;
    Eigen::MatrixXd xh = t.w_x * x, yh = t.w_y * y;
    EXPECT_LE((xh * yh.transpose() - Eigen::MatrixXd::Identity(t.r, t.r)).cwiseAbs().maxCoeff(), 1e-6)
        << "trial " << trial;
    for (const auto& h : {xh, yh}) {
      Eigen::MatrixXd s = oracle::scatter(h, cls);
      EXPECT_LE(oracle::off_diagonal(s), 1e-6 * s.trace()) << "trial " << trial;
    }
  }
}

TEST(TransformPair, LinearAndChecked) {
  std::mt19937_64 rng(8);
  auto cls = oracle::cyclic_classes(30, 2);
  Eigen::MatrixXd x = oracle::random_matrix(4, 30, rng), y = oracle::random_matrix(3, 30, rng);
  auto t = fit_dca(x, y, cls);
  Eigen::MatrixXd dx = oracle::random_matrix(4, 30, rng);
  auto [a, b] = transform_pair(t, named("x", x), named("y", y));
  auto [a2, b2] = transform_pair(t, named("x", x + dx), named("y", y));
  EXPECT_LE((a2.values() - a.values() - t.w_x * dx).cwiseAbs().maxCoeff(), 1e-12);
  auto [z, zy] = transform_pair(t, named("x", Eigen::MatrixXd::Zero(4, 30)), named("y", y));
  EXPECT_EQ(z.values().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(transform_pair(t, named("x", y), named("y", y)), ValidationError);
}

TEST(Fuse, ConcatAndSum) {
  Eigen::MatrixXd a(1, 3), b(1, 3);
  a << 1, 2, 3;
  b << 4, 5, 6;
  FeatureSet c = fuse(named("a", a), named("b", b));
  EXPECT_EQ(c.dims(), 2);
  EXPECT_EQ(c.size(), 3);
  EXPECT_EQ(fuse(named("a", a), named("b", Eigen::MatrixXd(-a)), FusionMode::kSum).values().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(fuse(named("a", a), named("b", Eigen::MatrixXd::Zero(2, 3)), FusionMode::kSum), ValidationError);
  EXPECT_EQ(MdcaPlan{}.mode, FusionMode::kConcat);
}

TEST(NumericalRank, Basics) {
  EXPECT_EQ(numerical_rank(Eigen::MatrixXd::Identity(3, 3)), 3);
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(4, 1, 4), v = Eigen::VectorXd::LinSpaced(6, -1, 2);
  EXPECT_EQ(numerical_rank(u * v.transpose()), 1);
  std::mt19937_64 rng(9);
  Eigen::MatrixXd r = oracle::random_matrix(6, 50, rng);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const double tol = 50 * svd.singularValues()(0) * std::numeric_limits<double>::epsilon();
  EXPECT_EQ(numerical_rank(r), (svd.singularValues().array() > tol).count());
  EXPECT_EQ(numerical_rank(r), 6);
}

TEST(Mdca, TwoSetsEqualSingleDca) {
  std::mt19937_64 rng(10);
  auto cls = oracle::cyclic_classes(40, 2);
  auto labels = binary_labels(cls);
  std::vector<FeatureSet> sets = {named("a", oracle::random_matrix(5, 40, rng)),
                                  named("b", oracle::random_matrix(4, 40, rng))};
  auto [plan, out] = fit_mdca(sets, labels);
  auto t = fit_dca(sets[0], sets[1], labels);
  auto [xh, yh] = transform_pair(t, sets[0], sets[1]);
  EXPECT_EQ(out.values(), fuse(xh, yh).values());
  EXPECT_EQ(plan.steps.size(), 1u);
}

TEST(Mdca, FollowsDescendingRankWithStableTies) {
  std::mt19937_64 rng(11);
  auto cls = oracle::cyclic_classes(60, 2);
  Eigen::MatrixXd low = oracle::random_matrix(3, 60, rng);
  Eigen::MatrixXd low6(6, 60);
  low6 << oracle::random_matrix(3, 60, rng), Eigen::MatrixXd::Zero(3, 60);
  std::vector<FeatureSet> sets = {named("b", low), named("a", oracle::random_matrix(5, 60, rng)), named("c", low6)};
  auto [plan, out] = fit_mdca(sets, binary_labels(cls), FusionMode::kConcat, "texture");
  EXPECT_EQ(plan.order, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(plan.steps.size(), 2u);
  EXPECT_EQ(plan.steps[0].left, "a");
  EXPECT_EQ(plan.steps[0].right, "b");
  EXPECT_EQ(plan.steps[1].left, plan.steps[0].output);
  EXPECT_EQ(plan.steps[1].right, "c");
  EXPECT_EQ(out.name(), "texture");
}

TEST(Mdca, ReplayMatchesTrainingAndKeepsShape) {
  std::mt19937_64 rng(12);
  auto cls = oracle::cyclic_classes(50, 2);
  std::vector<FeatureSet> sets;
  for (const char* n : {"glcm", "haar", "lbp"}) sets.push_back(named(n, oracle::class_gaussians(6, cls, 1.0, rng)));
  auto [plan, out] = fit_mdca(sets, binary_labels(cls));
  EXPECT_LE((apply_mdca(plan, sets).values() - out.values()).cwiseAbs().maxCoeff(), 1e-12);

  std::vector<FeatureSet> held;
  for (const char* n : {"lbp", "glcm", "haar"})
    held.push_back(FeatureSet(n, oracle::random_matrix(6, 9, rng), oracle::make_ids(9, "h")));
  EXPECT_EQ(apply_mdca(plan, held).dims(), out.dims());
}

TEST(Mdca, DegenerateStepIsNamed) {
  auto cls = oracle::cyclic_classes(20, 2);
  std::vector<FeatureSet> sets = {named("a", Eigen::MatrixXd::Ones(3, 20)), named("b", Eigen::MatrixXd::Ones(2, 20))};
  try {
    fit_mdca(sets, binary_labels(cls), FusionMode::kConcat, "shape");
    FAIL() << "expected DegenerateFusionError";
  } catch (const DegenerateFusionError& e) {
    EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos);
  }
}

TEST(Mdca, BinaryLabelsGiveTwoDimsPerStep) {
  std::mt19937_64 rng(13);
  auto cls = oracle::cyclic_classes(40, 2);
  std::vector<FeatureSet> sets = {named("a", oracle::random_matrix(7, 40, rng)),
                                  named("b", oracle::random_matrix(5, 40, rng))};
  EXPECT_EQ(fit_mdca(sets, binary_labels(cls)).second.dims(), 2);
  EXPECT_EQ(fit_mdca(sets, binary_labels(cls), FusionMode::kSum).second.dims(), 1);
}
