#pragma once

#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "atdecor/solver.hpp"
#include "interval.hpp"
#include "lsq.hpp"
#include "program.hpp"

namespace atdecor::detail {

// Violation residuals (hinge for inequalities) of the listed constraints and
// their Jacobian with respect to the inputs. With `signed_raw` every component
// reports its raw value instead, so inequality rows read c <= 0.
class ConstraintResiduals {
 public:
  ConstraintResiduals(const Program& program, std::vector<int> constraints,
                      bool signed_raw = false);

  int rows() const noexcept { return rows_; }
  void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J);

 private:
  const Program& program_;
  std::vector<int> constraints_;
  bool signed_raw_ = false;
  int rows_ = 0;
  std::vector<double> values_;
  std::vector<double> adjoint_;
  std::vector<Component> comps_;
};

std::vector<int> all_constraints(const Program& program);

// Restart k's starting point inside `box`: the midpoint for k = 0, then
// shifted Halton points. Unbounded sides are sampled over `scale`.
Eigen::VectorXd start_point(const Box& box, int k, const std::vector<double>& shift, double scale);
std::vector<double> halton_shift(std::size_t dims, unsigned long long seed);

// Lower/upper bounds of a box as vectors.
Eigen::VectorXd box_lower(const Box& box);
Eigen::VectorXd box_upper(const Box& box);

// Full pipeline on a compiled program: contraction, then multi-start search.
SolveOutcome solve_program(const Program& program, const SolveOptions& options);

bool holds_all(const Program& program, const Valuation& valuation);

// Runs fn(k) for k in [0, count) on up to `jobs` threads, in batches; stops
// after the first batch in which stop(k) holds for some k. Returns the
// number of tasks run.
template <typename Fn, typename Stop>
int run_batches(int count, int jobs, Fn&& fn, Stop&& stop) {
  jobs = jobs < 1 ? 1 : jobs;
  int done = 0;
  while (done < count) {
    const int batch = std::min(jobs, count - done);
    if (batch == 1) {
      fn(done);
    } else {
      std::vector<std::thread> workers;
      for (int t = 0; t < batch; ++t) workers.emplace_back([&, k = done + t] { fn(k); });
      for (std::thread& w : workers) w.join();
    }
    const int first = done;
    done += batch;
    for (int k = first; k < done; ++k) {
      if (stop(k)) return done;
    }
  }
  return done;
}

}  // namespace atdecor::detail
