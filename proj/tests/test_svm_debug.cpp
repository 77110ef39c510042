// Built against svm.cpp with assertions enabled: every solve checks that the
// dual objective never decreases between pair updates.
#include <random>

#include <gtest/gtest.h>

#include "dcamkl/kernels.hpp"
#include "dcamkl/svm.hpp"
#include "oracles.hpp"

using namespace dcamkl;

#ifdef NDEBUG
#error "this test needs assertions"
#endif

TEST(SmoMonotone, ObjectiveNeverDecreases) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 5 + trial;
    Eigen::MatrixXd x = oracle::random_matrix(4, n, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = i % 2 ? -1.0 : 1.0;
    const KernelSpec spec = trial % 2 ? KernelSpec::rbf(0.8) : KernelSpec::polynomial(3, 0.2);
    auto s = solve_dual(gram(spec, x).values, y, {trial % 3 == 0 ? 100.0 : 1.0, 1e-7});
    EXPECT_LT(s.violation, 1e-7);
  }
}
