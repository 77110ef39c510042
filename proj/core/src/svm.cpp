#include "dcamkl/svm.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "dcamkl/errors.hpp"
#include "text_util.hpp"

namespace dcamkl {

namespace {

constexpr double kTau = 1e-12;

void validate_problem(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C) {
  if (K.rows() != K.cols()) throw ValidationError("solve_dual: kernel matrix is not square");
  if (K.rows() != y.size()) {
    throw ValidationError("solve_dual: " + std::to_string(y.size()) + " labels for a " +
                          std::to_string(K.rows()) + "x" + std::to_string(K.cols()) + " kernel");
  }
  if (!(C > 0.0)) throw ValidationError("solve_dual: C must be > 0");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 1.0 && y(i) != -1.0) throw ValidationError("solve_dual: labels must be +1 or -1");
  }
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < K.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (std::abs(K(i, j) - K(j, i)) > 1e-12 * scale) {
        throw ValidationError("solve_dual: kernel matrix is not symmetric");
      }
    }
  }
}

}  // namespace

double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd ay = alpha.cwiseProduct(y);
  return alpha.sum() - 0.5 * ay.dot(K * ay);
}

SvmSolution solve_dual(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const SvmOptions& options,
                       const Eigen::VectorXd* initial_alpha) {
  validate_problem(K, y, options.C);
  const Eigen::Index n = y.size();
  const double C = options.C;

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  // G = Q alpha - 1 with Q_ij = y_i y_j K_ij.
  Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);
  if (initial_alpha != nullptr) {
    if (initial_alpha->size() != n) throw ValidationError("solve_dual: initial alpha has wrong length");
    alpha = initial_alpha->cwiseMax(0.0).cwiseMin(C);
    const Eigen::VectorXd ay = alpha.cwiseProduct(y);
    G = y.cwiseProduct(K * ay) - Eigen::VectorXd::Ones(n);
  }

  auto in_up = [&](Eigen::Index t) { return (y(t) > 0 && alpha(t) < C) || (y(t) < 0 && alpha(t) > 0); };
  auto in_low = [&](Eigen::Index t) { return (y(t) > 0 && alpha(t) > 0) || (y(t) < 0 && alpha(t) < C); };

#ifndef NDEBUG
  auto running_objective = [&] { return 0.5 * alpha.dot(Eigen::VectorXd::Ones(n) - G); };
  double last_objective = running_objective();
#endif

  SvmSolution sol;
  double violation = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (;; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1, j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y(t) * G(t);
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    violation = (i < 0 || j < 0) ? 0.0 : gmax - gmin;
    if (violation < options.tol) break;
    if (iter >= options.max_iterations) {
      throw NonConvergenceError("SMO did not converge within " + std::to_string(options.max_iterations) +
                                    " pair updates (violation " + detail::format_double(violation) + ")",
                                violation);
    }

    const double old_i = alpha(i), old_j = alpha(j);
    const double kii = K(i, i), kjj = K(j, j), kij = K(i, j);
    if (y(i) != y(j)) {
      double quad = kii + kjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G(i) - G(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) {
          alpha(j) = 0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = -diff;
      }
      if (diff > 0) {
        if (alpha(i) > C) {
          alpha(i) = C;
          alpha(j) = C - diff;
        }
      } else if (alpha(j) > C) {
        alpha(j) = C;
        alpha(i) = C + diff;
      }
    } else {
      double quad = kii + kjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G(i) - G(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > C) {
        if (alpha(i) > C) {
          alpha(i) = C;
          alpha(j) = sum - C;
        }
      } else if (alpha(j) < 0) {
        alpha(j) = 0;
        alpha(i) = sum;
      }
      if (sum > C) {
        if (alpha(j) > C) {
          alpha(j) = C;
          alpha(i) = sum - C;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = sum;
      }
    }

    const double di = alpha(i) - old_i, dj = alpha(j) - old_j;
    for (Eigen::Index t = 0; t < n; ++t) {
      G(t) += y(t) * (y(i) * K(t, i) * di + y(j) * K(t, j) * dj);
    }
#ifndef NDEBUG
    const double now = running_objective();
    assert(now >= last_objective - 1e-9 * std::max(1.0, std::abs(last_objective)));
    last_objective = now;
#endif
  }

  // Bias from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  int free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * G(t);
    if (alpha(t) >= C) {
      if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha(t) <= 0) {
      if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free;
      sum_free += yg;
    }
  }
  double rho;
  if (free > 0) {
    rho = sum_free / free;
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = 0.5 * (ub + lb);
  } else {
    rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }

  sol.alpha = std::move(alpha);
  sol.bias = -rho;
  sol.objective = dual_objective(K, y, sol.alpha);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (sol.alpha(t) > kSupportThreshold) sol.support.push_back(static_cast<std::size_t>(t));
  }
  sol.iterations = iter;
  sol.violation = violation;
  return sol;
}

SvmSolution solve_dual(const GramMatrix& K, const LabelVector& y, double C, double tol) {
  SvmOptions opts;
  opts.C = C;
  opts.tol = tol;
  return solve_dual(K.values, y.as_vector(), opts);
}

Eigen::VectorXd decision_values(const Eigen::VectorXd& alpha, double bias, const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& K_cross) {
  if (alpha.size() != y.size() || K_cross.cols() != alpha.size()) {
    throw ValidationError("decision_values: expected " + std::to_string(alpha.size()) +
                          " training columns, got " + std::to_string(K_cross.cols()));
  }
  Eigen::VectorXd f(K_cross.rows());
  for (Eigen::Index t = 0; t < K_cross.rows(); ++t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (alpha(i) != 0.0) s += alpha(i) * y(i) * K_cross(t, i);
    }
    f(t) = s + bias;
  }
  return f;
}

std::vector<int> predicted_labels(const Eigen::VectorXd& decision) {
  std::vector<int> out(static_cast<std::size_t>(decision.size()));
  for (Eigen::Index i = 0; i < decision.size(); ++i) out[static_cast<std::size_t>(i)] = decision(i) >= 0.0 ? 1 : -1;
  return out;
}

}  // namespace dcamkl
