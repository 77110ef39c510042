#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dcamkl/errors.hpp"
#include "dcamkl/kernels.hpp"
#include "oracles.hpp"

using namespace dcamkl;

TEST(KernelEval, PlugIns) {
  std::vector<double> u = {0.3, -1.2}, v = {0.3, -1.2};
  EXPECT_DOUBLE_EQ(kernel_eval(KernelSpec::rbf(0.7), u, v), 1.0);
  std::vector<double> a = {1.0, 0.0}, b = {0.0, 1.0};
  EXPECT_NEAR(kernel_eval(KernelSpec::rbf(1.0), a, b), std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(kernel_eval(KernelSpec::polynomial(2), a, b), 1.0);
  std::vector<double> one = {1.0};
  EXPECT_DOUBLE_EQ(kernel_eval(KernelSpec::polynomial(3), one, one), 8.0);
}

TEST(KernelSpec, Validation) {
  EXPECT_THROW(KernelSpec::rbf(0.0).validate(), ValidationError);
  EXPECT_THROW(KernelSpec::polynomial(0).validate(), ValidationError);
  EXPECT_THROW(KernelSpec::polynomial(2, -1.0).validate(), ValidationError);
  EXPECT_THROW(KernelSpec::polynomial(2, 1.0, -0.5).validate(), ValidationError);
  EXPECT_NO_THROW(KernelSpec::polynomial(3, 0.1, 0.0).validate());
}

TEST(Gram, Basics) {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd x = oracle::random_matrix(3, 7, rng);
  EXPECT_EQ(gram(KernelSpec::rbf(1.3), x).values.diagonal(), Eigen::VectorXd::Ones(7));
  Eigen::MatrixXd two(1, 2);
  two << 1, 1;
  EXPECT_EQ(gram(KernelSpec::polynomial(2), two).values, Eigen::MatrixXd::Constant(2, 2, 4.0));
}

TEST(Gram, MatchesDoubleLoop) {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd x = oracle::random_matrix(5, 20, rng), t = oracle::random_matrix(5, 6, rng);
  for (const auto& spec : {KernelSpec::rbf(1.7), KernelSpec::polynomial(2), KernelSpec::polynomial(3, 0.2, 0.5)}) {
    Eigen::MatrixXd G = gram(spec, x).values;
    EXPECT_LE((G - oracle::gram(spec, x, x)).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, G.cwiseAbs().maxCoeff()));
    EXPECT_EQ(G, G.transpose());
    Eigen::MatrixXd C = gram_cross(spec, x, t);
    ASSERT_EQ(C.rows(), 6);
    EXPECT_LE((C - oracle::gram(spec, x, t)).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, C.cwiseAbs().maxCoeff()));
    EXPECT_LE((gram_cross(spec, x, x) - G).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, G.cwiseAbs().maxCoeff()));
  }
}

TEST(Gram, SingleTestPointIsRow) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd x = oracle::random_matrix(2, 4, rng), t = oracle::random_matrix(2, 1, rng);
  Eigen::MatrixXd C = gram_cross(KernelSpec::rbf(1.0), x, t);
  ASSERT_EQ(C.rows(), 1);
  for (int i = 0; i < 4; ++i) {
    std::vector<double> u(t.col(0).data(), t.col(0).data() + 2), v(x.col(i).data(), x.col(i).data() + 2);
    EXPECT_DOUBLE_EQ(C(0, i), kernel_eval(KernelSpec::rbf(1.0), u, v));
  }
}

TEST(Combine, SimplexWeights) {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd x = oracle::random_matrix(3, 8, rng);
  std::vector<Eigen::MatrixXd> g = {gram(KernelSpec::rbf(1.0), x).values, gram(KernelSpec::polynomial(2), x).values,
                                    gram(KernelSpec::polynomial(3), x).values};
  std::vector<double> onehot = {0.0, 1.0, 0.0};
  EXPECT_EQ(combine(g, onehot), g[1]);
  std::vector<Eigen::MatrixXd> same = {g[0], g[0]};
  std::vector<double> half = {0.5, 0.5};
  EXPECT_LE((combine(same, half) - g[0]).cwiseAbs().maxCoeff(), 1e-15);
  std::vector<double> w = {0.1126, 0.2751, 0.6123};
  EXPECT_LE((combine(g, w) - (0.1126 * g[0] + 0.2751 * g[1] + 0.6123 * g[2])).cwiseAbs().maxCoeff(), 1e-12);
  std::vector<double> bad = {0.5, 0.6, 0.0};
  EXPECT_THROW(combine(g, bad), ValidationError);
  std::vector<double> negative = {1.2, -0.2, 0.0};
  EXPECT_THROW(combine(g, negative), ValidationError);
}

TEST(MedianSigma, Cases) {
  Eigen::MatrixXd two(2, 2);
  two << 0, 1, 0, 1;
  EXPECT_NEAR(median_sigma(two), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(median_sigma(Eigen::MatrixXd::Ones(3, 5)), 1e-6);
  std::mt19937_64 rng(5);
  for (int n : {10, 11}) {
    Eigen::MatrixXd x = oracle::random_matrix(4, n, rng);
    EXPECT_DOUBLE_EQ(median_sigma(x), oracle::median_sigma(x));
  }
}
