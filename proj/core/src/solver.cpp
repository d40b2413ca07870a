#include "atdecor/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "atdecor/errors.hpp"
#include "solver_internal.hpp"

namespace atdecor {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kFeasible: return "FEASIBLE";
    case SolveStatus::kInfeasibleProved: return "INFEASIBLE_PROVED";
    case SolveStatus::kInfeasiblePresumed: return "INFEASIBLE_PRESUMED";
    case SolveStatus::kUnknown: return "UNKNOWN";
  }
  return "?";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kDetermined: return "DETERMINED";
    case Verdict::kUndetermined: return "UNDETERMINED";
    case Verdict::kInconsistent: return "INCONSISTENT";
  }
  return "?";
}

namespace detail {

ConstraintResiduals::ConstraintResiduals(const Program& program, std::vector<int> constraints,
                                         bool signed_raw)
    : program_(program), constraints_(std::move(constraints)), signed_raw_(signed_raw) {
  for (int c : constraints_) rows_ += program_.constraints[c].width;
}

void ConstraintResiduals::operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r,
                                     Eigen::MatrixXd* J) {
  program_.tape.forward(x.data(), values_);
  r.resize(rows_);
  if (J) J->setZero(rows_, x.size());
  int row = 0;
  std::vector<double> grad(static_cast<std::size_t>(x.size()));
  for (int c : constraints_) {
    comps_.clear();
    program_.components(program_.constraints[c], values_, comps_);
    for (const Component& comp : comps_) {
      r[row] = signed_raw_ ? comp.raw : comp.violation();
      if (J && comp.atom >= 0 && (signed_raw_ || comp.eq || comp.raw > 0.0)) {
        const Atom& a = program_.atoms[comp.atom];
        std::fill(grad.begin(), grad.end(), 0.0);
        program_.tape.gradient({{a.lhs, 1.0}, {a.rhs, -1.0}}, values_, adjoint_, grad.data());
        for (Eigen::Index i = 0; i < x.size(); ++i) (*J)(row, i) = grad[i];
      }
      ++row;
    }
  }
}

std::vector<int> all_constraints(const Program& program) {
  std::vector<int> out(program.constraints.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
  return out;
}

namespace {

double radical_inverse(unsigned long long k, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

std::vector<unsigned> primes(std::size_t count) {
  std::vector<unsigned> out;
  for (unsigned c = 2; out.size() < count; ++c) {
    bool prime = true;
    for (unsigned p : out) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) out.push_back(c);
  }
  return out;
}

}  // namespace

std::vector<double> halton_shift(std::size_t dims, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> shift(dims);
  for (double& s : shift) s = u(rng);
  return shift;
}

Eigen::VectorXd start_point(const Box& box, int k, const std::vector<double>& shift, double scale) {
  static const std::vector<unsigned> kPrimes = primes(256);
  const auto n = static_cast<Eigen::Index>(box.size());
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = 0.5;
    if (k > 0) {
      t = radical_inverse(static_cast<unsigned long long>(k), kPrimes[i % kPrimes.size()]) +
          shift[i];
      t -= std::floor(t);
    }
    const Interval& b = box[i];
    const bool lo = std::isfinite(b.lo);
    const bool hi = std::isfinite(b.hi);
    if (lo && hi) {
      x[i] = b.lo + t * (b.hi - b.lo);
    } else if (lo) {
      x[i] = b.lo + t * scale;
    } else if (hi) {
      x[i] = b.hi - t * scale;
    } else {
      x[i] = (2.0 * t - 1.0) * scale;
    }
  }
  return x;
}

Eigen::VectorXd box_lower(const Box& box) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) v[static_cast<Eigen::Index>(i)] = box[i].lo;
  return v;
}

Eigen::VectorXd box_upper(const Box& box) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) v[static_cast<Eigen::Index>(i)] = box[i].hi;
  return v;
}

bool holds_all(const Program& program, const Valuation& valuation) {
  for (const Predicate& p : program.predicates) {
    if (!holds(p, valuation)) return false;
  }
  return true;
}

SolveOutcome solve_program(const Program& program, const SolveOptions& options) {
  SolveOutcome out;
  const std::vector<int> all = all_constraints(program);
  const Hc4Result contracted = hc4(program, input_box(program), all);
  if (contracted.empty) {
    out.status = SolveStatus::kInfeasibleProved;
    IntervalCertificate cert;
    std::vector<int> ids = contracted.contributors;
    std::sort(ids.begin(), ids.end());
    for (int c : ids) cert.constraint_ids.push_back(program.constraints[c].id);
    cert.emptied_by = program.constraints[contracted.emptied].id;
    out.certificate = std::move(cert);
    return out;
  }
  if (options.restarts <= 0) return out;

  const Box& box = contracted.box;
  const Eigen::VectorXd lower = box_lower(box);
  const Eigen::VectorXd upper = box_upper(box);
  const std::vector<double> shift = halton_shift(box.size(), options.seed);
  LmOptions lm;
  lm.max_iterations = options.iterations;

  struct Attempt {
    bool finite = false;
    bool feasible = false;
    double violation = std::numeric_limits<double>::infinity();
    Valuation valuation;
  };
  std::vector<Attempt> attempts(static_cast<std::size_t>(options.restarts));
  auto run = [&](int k) {
    ConstraintResiduals residuals(program, all);
    const ResidualFn f = [&residuals](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                                      Eigen::MatrixXd* J) { residuals(x, r, J); };
    const LmResult res =
        minimize_box_lsq(f, start_point(box, k, shift, program.scale), lower, upper, lm);
    Attempt& a = attempts[k];
    std::vector<double> v;
    program.tape.forward(res.x.data(), v);
    a.finite = res.finite && std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
    if (!a.finite) return;
    a.violation = program.max_violation(v);
    a.valuation = program.valuation(v);
    a.feasible = a.violation <= options.feasibility_tolerance && holds_all(program, a.valuation);
  };
  double best = std::numeric_limits<double>::infinity();
  const int used = run_batches(options.restarts, options.jobs, run, [&](int k) {
    if (attempts[k].finite) best = std::min(best, attempts[k].violation);
    const bool last_in_batch = (k + 1) % std::max(1, options.jobs) == 0 || k + 1 == options.restarts;
    if (options.on_progress && (attempts[k].feasible || last_in_batch)) options.on_progress(k + 1, best);
    return attempts[k].feasible;
  });
  out.restarts_used = used;
  bool any_finite = false;
  for (int k = 0; k < used; ++k) {
    const Attempt& a = attempts[k];
    if (!a.finite) continue;
    any_finite = true;
    if (a.feasible) {
      out.status = SolveStatus::kFeasible;
      out.valuation = a.valuation;
      out.residual = a.violation;
      out.restarts_used = k + 1;
      return out;
    }
    out.residual = std::min(out.residual, a.violation);
  }
  out.status = any_finite ? SolveStatus::kInfeasiblePresumed : SolveStatus::kUnknown;
  return out;
}

}  // namespace detail

SolveOutcome solve(const AttackTree& tree, const AttributeDomain& domain,
                   const ConstraintSet& constraints, const SolveOptions& options) {
  return detail::solve_program(detail::compile_program(tree, domain, constraints), options);
}

bool replay_certificate(const AttackTree& tree, const AttributeDomain& domain,
                        const ConstraintSet& constraints, const IntervalCertificate& certificate) {
  const detail::Program program = detail::compile_program(tree, domain, constraints);
  std::vector<int> subset;
  for (const std::string& id : certificate.constraint_ids) {
    const int c = program.constraint_index(id);
    if (c < 0) return false;
    subset.push_back(c);
  }
  if (std::find(certificate.constraint_ids.begin(), certificate.constraint_ids.end(),
                certificate.emptied_by) == certificate.constraint_ids.end()) {
    return false;
  }
  std::sort(subset.begin(), subset.end());
  return detail::hc4(program, detail::input_box(program), subset).empty;
}

Classification classify(const AttackTree& tree, const AttributeDomain& domain,
                        const ConstraintSet& constraints, const SolveOptions& options) {
  using namespace detail;
  Classification out;
  const Program program = compile_program(tree, domain, constraints);
  const SolveOutcome base = solve_program(program, options);
  out.status = base.status;
  if (base.infeasible()) {
    out.verdict = Verdict::kInconsistent;
    if (base.status == SolveStatus::kInfeasiblePresumed) {
      out.note = "no feasible point found; infeasibility not proved";
    }
    return out;
  }
  if (!base.feasible()) {
    out.verdict = Verdict::kUndetermined;
    out.caveat = true;
    out.note = "solver returned UNKNOWN";
    return out;
  }
  const Hc4Result contracted = hc4(program, input_box(program), all_constraints(program));
  const double domain_width = domain.upper - domain.lower;
  const double sep = 1e-4 * (std::isfinite(domain_width) ? domain_width
                                                         : std::max(1.0, program.scale));
  const Valuation& v0 = *base.valuation;
  for (std::size_t i = 0; i < program.input_count(); ++i) {
    if (contracted.box[i].width() <= sep) continue;
    const std::string& label = program.input_labels[i];
    const double x0 = v0.at(label);
    for (int dir = 0; dir < 2; ++dir) {
      const double target = dir == 0 ? x0 + sep : x0 - sep;
      if (dir == 0 ? target > contracted.box[i].hi : target < contracted.box[i].lo) continue;
      Program probe = program;
      probe.add_constraint("probe:" + label,
                           Formula::compare(Expr::ref(label), dir == 0 ? Cmp::kGe : Cmp::kLe,
                                            Expr::constant(target)),
                           true);
      const SolveOutcome other = solve_program(probe, options);
      if (other.feasible()) {
        out.verdict = Verdict::kUndetermined;
        out.witness_pair = std::make_pair(v0, *other.valuation);
        out.note = "\"" + label + "\" can move by at least " + std::to_string(sep);
        return out;
      }
      if (other.status == SolveStatus::kUnknown) out.caveat = true;
    }
  }
  out.verdict = Verdict::kDetermined;
  if (out.caveat) out.note = "a range probe returned UNKNOWN";
  return out;
}

UnsatCore unsat_core(const AttackTree& tree, const AttributeDomain& domain,
                     const ConstraintSet& constraints, const SolveOptions& options) {
  UnsatCore out;
  const SolveOutcome full = solve(tree, domain, constraints, options);
  out.status = full.status;
  if (full.feasible()) throw PreconditionError("constraint set is satisfiable; no core exists");
  ConstraintSet hard_only;
  hard_only.hard = constraints.hard;
  if (!solve(tree, domain, hard_only, options).feasible()) {
    throw PreconditionError("hard predicates alone are not satisfiable");
  }
  std::vector<std::string> core;
  for (const Predicate& p : constraints.soft) core.push_back(p.id);
  std::vector<CoreCheck> checks;
  for (const Predicate& p : constraints.soft) {
    std::vector<std::string> trial;
    for (const std::string& id : core) {
      if (id != p.id) trial.push_back(id);
    }
    const SolveOutcome without = solve(tree, domain, constraints.with_soft(trial), options);
    if (without.infeasible()) {
      core = std::move(trial);
    } else {
      checks.push_back(CoreCheck{p.id, without.status});
    }
  }
  out.core = std::move(core);
  out.checks = std::move(checks);
  out.minimal = std::all_of(out.checks.begin(), out.checks.end(), [](const CoreCheck& c) {
    return c.status_without == SolveStatus::kFeasible;
  });
  return out;
}

}  // namespace atdecor
