#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dcamkl/dataset.hpp"
#include "dcamkl/kernels.hpp"

namespace dcamkl {

struct SvmOptions {
  double C = 1.0;
  double tol = 1e-3;                         ///< stop when max KKT violation < tol
  std::size_t max_iterations = 1'000'000;    ///< pair updates
};

/// Solution of max_a  sum(a) - 1/2 a^T (yy^T .* K) a  s.t.  y^T a = 0, 0 <= a <= C.
struct SvmSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  double objective = 0.0;  ///< dual objective at alpha
  std::vector<std::size_t> support;  ///< indices with alpha > 1e-8
  std::size_t iterations = 0;
  double violation = 0.0;  ///< final maximal KKT violation
};

inline constexpr double kSupportThreshold = 1e-8;

/// SMO with maximal-violating-pair selection. `initial_alpha`, when given,
/// must be dual feasible; it seeds the solver.
///
/// Throws ValidationError for a non-symmetric K, labels outside {+1, -1} or
/// C <= 0, and NonConvergenceError when the iteration cap is reached.
SvmSolution solve_dual(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const SvmOptions& options = {},
                       const Eigen::VectorXd* initial_alpha = nullptr);
SvmSolution solve_dual(const GramMatrix& K, const LabelVector& y, double C = 1.0, double tol = 1e-3);

/// Dual objective sum(a) - 1/2 a^T Q a evaluated directly.
double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha);

/// f(x_t) = sum_i alpha_i y_i K(x_t, x_i) + b for each row of K_cross.
Eigen::VectorXd decision_values(const Eigen::VectorXd& alpha, double bias, const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& K_cross);

/// sign(f) with sign(0) = +1.
std::vector<int> predicted_labels(const Eigen::VectorXd& decision);

}  // namespace dcamkl
