#pragma once

// Box-constrained nonlinear least squares: projected Levenberg-Marquardt, and
// an augmented-Lagrangian wrapper that folds extra constraints into the
// residual vector.

#include <functional>

#include <Eigen/Dense>

namespace atdecor::detail {

// Fills r (resized by the callee) and, when J is non-null, the Jacobian.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r,
                                      Eigen::MatrixXd* J)>;

struct LmOptions {
  int max_iterations = 500;
  double cost_tolerance = 1e-30;      // on 0.5 * |r|^2
  double gradient_tolerance = 1e-14;  // on the projected gradient, infinity norm
};

struct LmResult {
  Eigen::VectorXd x;
  double cost = 0.0;  // 0.5 * |r|^2
  double projected_gradient = 0.0;
  int iterations = 0;
  bool finite = true;
};

LmResult minimize_box_lsq(const ResidualFn& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper, const LmOptions& options);

// Infinity norm of x - clamp(x - g).
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

// Constraint values c(x): equalities want c = 0, inequalities c <= 0.
using ConstraintFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& c,
                                        Eigen::MatrixXd* J)>;

struct AlOptions {
  LmOptions inner;
  int max_outer = 30;
  double violation_tolerance = 1e-9;
  double initial_penalty = 10.0;
};

struct AlResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // |r|^2 of the objective residuals only
  double violation = 0.0;  // max constraint violation
  double kkt = 0.0;        // projected gradient of the Lagrangian, infinity norm
  bool finite = true;
};

// Minimizes |r(x)|^2 subject to the constraints and the box. `is_eq[i]`
// marks equality rows of c. With no constraint rows this is a single LM run.
AlResult minimize_al(const ResidualFn& objective, const ConstraintFn& constraints,
                     const std::vector<bool>& is_eq, Eigen::VectorXd x0,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const AlOptions& options);

}  // namespace atdecor::detail
