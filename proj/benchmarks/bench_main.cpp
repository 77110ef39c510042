#include <random>

#include <benchmark/benchmark.h>

#include "dcamkl/features.hpp"
#include "dcamkl/fusion.hpp"
#include "dcamkl/kernels.hpp"
#include "dcamkl/mkl.hpp"
#include "dcamkl/svm.hpp"

using namespace dcamkl;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

Eigen::VectorXd alternating(Eigen::Index n) {
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = i % 2 ? -1.0 : 1.0;
  return y;
}

}  // namespace

static void BM_GramRbf(benchmark::State& state) {
  const Eigen::MatrixXd x = gaussian(64, state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(gram(KernelSpec::rbf(8.0), x).values.data());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GramRbf)->RangeMultiplier(2)->Range(64, 512)->Complexity();

static void BM_Smo(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::VectorXd y = alternating(n);
  Eigen::MatrixXd x = gaussian(10, n, 2);
  x.row(0) += 0.7 * y.transpose();
  const Eigen::MatrixXd K = gram(KernelSpec::rbf(3.0), x).values;
  for (auto _ : state) benchmark::DoNotOptimize(solve_dual(K, y).objective);
}
BENCHMARK(BM_Smo)->RangeMultiplier(2)->Range(64, 512);

static void BM_SimpleMkl(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::VectorXd y = alternating(n);
  std::vector<Eigen::MatrixXd> grams;
  for (std::uint64_t s = 0; s < 3; ++s) {
    Eigen::MatrixXd x = gaussian(8, n, 10 + s);
    if (s < 2) x.row(0) += 0.8 * y.transpose();
    grams.push_back(gram(KernelSpec::rbf(3.0), x).values);
  }
  for (auto _ : state) benchmark::DoNotOptimize(train(grams, y).d.data());
}
BENCHMARK(BM_SimpleMkl)->Arg(140)->Arg(280);

static void BM_FitDca(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  std::vector<int> classes(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) classes[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
  Eigen::MatrixXd x = gaussian(256, n, 3), y = gaussian(20, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(fit_dca(x, y, classes).w_x.data());
}
BENCHMARK(BM_FitDca)->Arg(140)->Arg(1000);

static void BM_Hog(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u;
  std::vector<double> px(static_cast<std::size_t>(state.range(0) * state.range(0) * 3));
  for (double& v : px) v = u(rng);
  const RasterImage img(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 3, px);
  for (auto _ : state) benchmark::DoNotOptimize(hog_features(img).data());
}
BENCHMARK(BM_Hog)->Arg(64)->Arg(256);

static void BM_AllExtractors(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u;
  std::vector<double> px(64 * 64 * 3);
  for (double& v : px) v = u(rng);
  const RasterImage img(64, 64, 3, px);
  for (auto _ : state)
    for (const auto& e : image_extractors()) benchmark::DoNotOptimize(e.run(img).data());
}
BENCHMARK(BM_AllExtractors);
BENCHMARK_MAIN();
