#include "lsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace atdecor::detail {

namespace {

constexpr double kDiagFloor = 1e-8;

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = std::clamp(x[i] - g[i], lower[i], upper[i]);
    m = std::max(m, std::abs(x[i] - step));
  }
  return m;
}

LmResult minimize_box_lsq(const ResidualFn& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper, const LmOptions& options) {
  const Eigen::Index n = x0.size();
  LmResult out;
  out.x = x0.cwiseMax(lower).cwiseMin(upper);
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  f(out.x, r, &J);
  if (!all_finite(r) || !J.allFinite()) {
    out.finite = false;
    out.cost = std::numeric_limits<double>::infinity();
    return out;
  }
  out.cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;
  Eigen::VectorXd r_new;
  Eigen::VectorXd x_new(n);
  std::vector<Eigen::Index> free;
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it;
    const Eigen::VectorXd g = J.transpose() * r;
    out.projected_gradient = projected_gradient_norm(out.x, g, lower, upper);
    if (out.cost <= options.cost_tolerance ||
        out.projected_gradient <= options.gradient_tolerance) {
      return out;
    }
    // Variables pinned at a bound by the gradient stay fixed this iteration.
    free.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lower = out.x[i] <= lower[i] && g[i] > 0.0;
      const bool at_upper = out.x[i] >= upper[i] && g[i] < 0.0;
      if (!at_lower && !at_upper) free.push_back(i);
    }
    if (free.empty()) return out;
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd Jf(J.rows(), nf);
    Eigen::VectorXd gf(nf);
    for (Eigen::Index k = 0; k < nf; ++k) {
      Jf.col(k) = J.col(free[k]);
      gf[k] = g[free[k]];
    }
    const Eigen::MatrixXd H = Jf.transpose() * Jf;
    const Eigen::VectorXd diag = H.diagonal().cwiseMax(kDiagFloor);
    bool accepted = false;
    while (lambda < 1e20) {
      Eigen::MatrixXd A = H;
      A.diagonal() += lambda * diag;
      const Eigen::VectorXd step = A.ldlt().solve(-gf);
      x_new = out.x;
      for (Eigen::Index k = 0; k < nf; ++k) {
        const Eigen::Index i = free[k];
        x_new[i] = std::clamp(out.x[i] + step[k], lower[i], upper[i]);
      }
      if ((x_new - out.x).cwiseAbs().maxCoeff() <= 1e-16 * (1.0 + out.x.cwiseAbs().maxCoeff())) {
        return out;  // step underflow
      }
      f(x_new, r_new, nullptr);
      const double cost_new = all_finite(r_new) ? 0.5 * r_new.squaredNorm()
                                                : std::numeric_limits<double>::infinity();
      if (cost_new < out.cost) {
        out.x = x_new;
        out.cost = cost_new;
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) return out;
    f(out.x, r, &J);
    if (!J.allFinite()) {
      out.finite = false;
      return out;
    }
  }
  out.iterations = options.max_iterations;
  const Eigen::VectorXd g = J.transpose() * r;
  out.projected_gradient = projected_gradient_norm(out.x, g, lower, upper);
  return out;
}

AlResult minimize_al(const ResidualFn& objective, const ConstraintFn& constraints,
                     const std::vector<bool>& is_eq, Eigen::VectorXd x0,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const AlOptions& options) {
  const auto m = static_cast<Eigen::Index>(is_eq.size());
  AlResult out;
  if (m == 0) {
    const LmResult lm = minimize_box_lsq(objective, std::move(x0), lower, upper, options.inner);
    out.x = lm.x;
    out.objective = 2.0 * lm.cost;
    out.kkt = lm.projected_gradient;
    out.finite = lm.finite;
    return out;
  }
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  double mu = options.initial_penalty;
  double previous = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd r, c;
  Eigen::MatrixXd Jr, Jc;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    const ResidualFn augmented = [&](const Eigen::VectorXd& z, Eigen::VectorXd& R,
                                     Eigen::MatrixXd* J) {
      Eigen::VectorXd ro, co;
      Eigen::MatrixXd Jro, Jco;
      objective(z, ro, J ? &Jro : nullptr);
      constraints(z, co, J ? &Jco : nullptr);
      const double s = std::sqrt(mu);
      R.resize(ro.size() + m);
      R.head(ro.size()) = ro;
      if (J) {
        J->resize(ro.size() + m, z.size());
        J->topRows(ro.size()) = Jro;
      }
      for (Eigen::Index i = 0; i < m; ++i) {
        double v = co[i] + lambda[i] / mu;
        bool active = true;
        if (!is_eq[i] && v < 0.0) {
          v = 0.0;
          active = false;
        }
        R[ro.size() + i] = s * v;
        if (J) {
          J->row(ro.size() + i) = active ? (s * Jco.row(i)).eval()
                                         : Eigen::RowVectorXd::Zero(z.size()).eval();
        }
      }
    };
    const LmResult lm = minimize_box_lsq(augmented, x, lower, upper, options.inner);
    x = lm.x;
    out.finite = lm.finite;
    if (!lm.finite) break;
    objective(x, r, &Jr);
    constraints(x, c, &Jc);
    double violation = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      violation = std::max(violation, is_eq[i] ? std::abs(c[i]) : std::max(0.0, c[i]));
      lambda[i] = is_eq[i] ? lambda[i] + mu * c[i] : std::max(0.0, lambda[i] + mu * c[i]);
    }
    const Eigen::VectorXd g = Jr.transpose() * r + Jc.transpose() * lambda;
    out.x = x;
    out.objective = r.squaredNorm();
    out.violation = violation;
    out.kkt = projected_gradient_norm(x, g, lower, upper);
    if (violation <= options.violation_tolerance && out.kkt <= 1e-9) break;
    if (violation > 0.25 * previous) mu = std::min(mu * 10.0, 1e12);
    previous = violation;
  }
  return out;
}

}  // namespace atdecor::detail
