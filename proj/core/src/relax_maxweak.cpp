#include <algorithm>
#include <cmath>
#include <limits>

#include "atdecor/errors.hpp"
#include "atdecor/relax.hpp"
#include "solver_internal.hpp"

namespace atdecor {

namespace {

// Converged when the objective's projected gradient and the hard violation
// are both negligible.
constexpr double kKktTolerance = 1e-6;
constexpr double kViolationTolerance = 1e-7;

bool is_le(IneqKind kind) { return kind != IneqKind::kGeConst; }

// The weakened constant that makes the predicate hold exactly at v: the
// original when it already holds, otherwise the attained value.
double attained_constant(const IneqPredicate& p, const Valuation& v) {
  switch (p.kind) {
    case IneqKind::kLeConst: return std::max(p.constant, v.at(p.left));
    case IneqKind::kGeConst: return std::min(p.constant, v.at(p.left));
    case IneqKind::kLeLabelPlus: return std::max(p.constant, v.at(p.left) - v.at(p.right));
  }
  return p.constant;
}

struct Setup {
  Normalization norm;
  detail::Program program;
  std::vector<int> hard;  // constraint indices
  std::vector<int> soft;
  detail::Box box;        // hard-contracted input box
};

Setup prepare(const AttackTree& tree, const AttributeDomain& domain,
              const ConstraintSet& constraints) {
  Setup s;
  s.norm = ineq_normalize(constraints.soft);
  if (!s.norm.rejected.empty()) {
    std::string msg = "soft predicates outside the inequality class:";
    for (const auto& [id, reason] : s.norm.rejected) msg += " " + id + " (" + reason + ")";
    throw PreconditionError(msg);
  }
  if (s.norm.predicates.empty()) throw PreconditionError("no soft predicate to weaken");
  ConstraintSet hard_only;
  hard_only.hard = constraints.hard;
  s.program = detail::compile_program(tree, domain, hard_only);
  s.hard = detail::all_constraints(s.program);
  const detail::Hc4Result contracted = detail::hc4(s.program, detail::input_box(s.program), s.hard);
  if (contracted.empty) throw PreconditionError("hard predicates alone are not satisfiable");
  s.box = contracted.box;
  for (const NormalizedPredicate& np : s.norm.predicates) {
    s.soft.push_back(s.program.add_constraint(np.id, np.ineq.to_formula(), false));
  }
  return s;
}

MaxWeakResult finish(const Setup& s, const std::vector<double>& values,
                     const std::vector<double>* constants) {
  MaxWeakResult out;
  out.valuation = s.program.valuation(values);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.norm.predicates.size(); ++i) {
    const NormalizedPredicate& np = s.norm.predicates[i];
    Shift shift{np.id, np.origin, np.ineq, np.ineq, 0.0};
    shift.weakened.constant =
        constants ? (*constants)[i] : attained_constant(np.ineq, out.valuation);
    shift.shift = std::abs(shift.weakened.constant - np.ineq.constant);
    sum += shift.shift * shift.shift;
    out.per_predicate.push_back(std::move(shift));
  }
  out.distance = std::sqrt(sum);
  return out;
}

struct Candidate {
  bool finite = false;
  double objective = std::numeric_limits<double>::infinity();
  double violation = std::numeric_limits<double>::infinity();
  double kkt = 0.0;
  Eigen::VectorXd z;
};

// Lowest objective among runs meeting the violation tolerance, else the least
// violating run. Ties keep the earliest restart.
int pick_best(const std::vector<Candidate>& runs) {
  int best = -1;
  for (int k = 0; k < static_cast<int>(runs.size()); ++k) {
    const Candidate& c = runs[k];
    if (!c.finite) continue;
    if (best < 0) {
      best = k;
      continue;
    }
    const Candidate& b = runs[best];
    const bool c_ok = c.violation <= kViolationTolerance;
    const bool b_ok = b.violation <= kViolationTolerance;
    if (c_ok != b_ok ? c_ok : (c_ok ? c.objective < b.objective : c.violation < b.violation)) {
      best = k;
    }
  }
  return best;
}

detail::ResidualFn as_fn(detail::ConstraintResiduals& r) {
  return [&r](const Eigen::VectorXd& x, Eigen::VectorXd& out, Eigen::MatrixXd* J) { r(x, out, J); };
}

}  // namespace

std::vector<IneqPredicate> MaxWeakResult::weakened() const {
  std::vector<IneqPredicate> out;
  for (const Shift& s : per_predicate) out.push_back(s.weakened);
  return out;
}

Normalization ineq_normalize(const std::vector<Predicate>& soft) {
  Normalization out;
  for (const Predicate& p : soft) {
    const Formula& f = p.formula;
    if (f.connective == Connective::kCompare && f.cmp == Cmp::kEq) {
      const auto le = classify_ineq(Formula::compare(f.lhs, Cmp::kLe, f.rhs));
      const auto ge = classify_ineq(Formula::compare(f.lhs, Cmp::kGe, f.rhs));
      if (le && ge) {
        out.predicates.push_back({p.id + "#le", p.id, *le});
        out.predicates.push_back({p.id + "#ge", p.id, *ge});
      } else {
        out.rejected.emplace_back(p.id, "equality is not between a label and a label plus constant");
      }
      continue;
    }
    if (f.connective != Connective::kCompare) {
      out.rejected.emplace_back(p.id, "boolean connectives are outside the inequality class");
      continue;
    }
    if (const auto ineq = classify_ineq(f)) {
      out.predicates.push_back({p.id, p.id, *ineq});
    } else {
      out.rejected.emplace_back(p.id, "not of the form l <= a, l >= a or l <= l' + a");
    }
  }
  return out;
}

MaxWeakResult relax_maxweak(const AttackTree& tree, const AttributeDomain& domain,
                            const ConstraintSet& constraints, const SolveOptions& options) {
  const Setup s = prepare(tree, domain, constraints);
  const Eigen::VectorXd lower = detail::box_lower(s.box);
  const Eigen::VectorXd upper = detail::box_upper(s.box);
  const std::vector<double> shift = detail::halton_shift(s.box.size(), options.seed);
  detail::AlOptions al;
  al.inner.max_iterations = options.iterations;

  const int restarts = std::max(1, options.restarts);
  std::vector<Candidate> runs(static_cast<std::size_t>(restarts));
  auto run = [&](int k) {
    detail::ConstraintResiduals objective(s.program, s.soft);
    // Hard rows as equalities on their violation: zero exactly when satisfied.
    detail::ConstraintResiduals hard(s.program, s.hard);
    const std::vector<bool> is_eq(static_cast<std::size_t>(hard.rows()), true);
    const detail::AlResult res =
        detail::minimize_al(as_fn(objective), as_fn(hard), is_eq,
                            detail::start_point(s.box, k, shift, s.program.scale), lower, upper, al);
    Candidate& c = runs[k];
    c.finite = res.finite && res.x.allFinite();
    c.objective = res.objective;
    c.violation = res.violation;
    c.kkt = res.kkt;
    c.z = res.x;
  };
  detail::run_batches(restarts, options.jobs, run, [](int) { return false; });

  const int best = pick_best(runs);
  if (best < 0) throw NumericError("every weakening restart produced non-finite values");
  const Candidate& c = runs[best];
  std::vector<double> values;
  s.program.tape.forward(c.z.data(), values);
  MaxWeakResult out = finish(s, values, nullptr);
  out.violation = 0.0;
  {
    std::vector<detail::Component> comps;
    for (int h : s.hard) {
      comps.clear();
      s.program.components(s.program.constraints[h], values, comps);
      for (const auto& comp : comps) out.violation = std::max(out.violation, std::abs(comp.violation()));
    }
  }
  out.kkt = 2.0 * c.kkt;  // gradient of the sum of squares, not half of it
  out.converged = out.kkt <= kKktTolerance && out.violation <= kViolationTolerance;
  return out;
}

MaxWeakResult relax_maxweak_joint(const AttackTree& tree, const AttributeDomain& domain,
                                  const ConstraintSet& constraints,
                                  const SolveOptions& options) {
  const Setup s = prepare(tree, domain, constraints);
  const auto n = static_cast<Eigen::Index>(s.box.size());
  const auto m = static_cast<Eigen::Index>(s.norm.predicates.size());
  Eigen::VectorXd lower(n + m);
  Eigen::VectorXd upper(n + m);
  lower.head(n) = detail::box_lower(s.box);
  upper.head(n) = detail::box_upper(s.box);
  Eigen::VectorXd a(m);
  std::vector<double> sign(static_cast<std::size_t>(m));  // +1: constant may only grow
  for (Eigen::Index i = 0; i < m; ++i) {
    const IneqPredicate& p = s.norm.predicates[i].ineq;
    a[i] = p.constant;
    sign[i] = is_le(p.kind) ? 1.0 : -1.0;
    lower[n + i] = sign[i] > 0 ? p.constant : -std::numeric_limits<double>::infinity();
    upper[n + i] = sign[i] > 0 ? std::numeric_limits<double>::infinity() : p.constant;
  }
  const std::vector<double> shift = detail::halton_shift(s.box.size(), options.seed);
  detail::AlOptions al;
  al.inner.max_iterations = options.iterations;

  const int restarts = std::max(1, options.restarts);
  std::vector<Candidate> runs(static_cast<std::size_t>(restarts));
  auto run = [&](int k) {
    detail::ConstraintResiduals soft_raw(s.program, s.soft, true);
    detail::ConstraintResiduals hard(s.program, s.hard);
    const detail::ResidualFn objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd& r,
                                             Eigen::MatrixXd* J) {
      r = z.tail(m) - a;
      if (J) {
        J->setZero(m, n + m);
        J->rightCols(m).setIdentity();
      }
    };
    // Soft rows: raw(x) - sign * (t - a) <= 0. Hard rows: violation = 0.
    const detail::ResidualFn cons = [&](const Eigen::VectorXd& z, Eigen::VectorXd& c,
                                        Eigen::MatrixXd* J) {
      const Eigen::VectorXd x = z.head(n);
      Eigen::VectorXd rs, rh;
      Eigen::MatrixXd Js, Jh;
      soft_raw(x, rs, J ? &Js : nullptr);
      hard(x, rh, J ? &Jh : nullptr);
      c.resize(m + rh.size());
      for (Eigen::Index i = 0; i < m; ++i) c[i] = rs[i] - sign[i] * (z[n + i] - a[i]);
      c.tail(rh.size()) = rh;
      if (J) {
        J->setZero(m + rh.size(), n + m);
        J->topLeftCorner(m, n) = Js;
        for (Eigen::Index i = 0; i < m; ++i) (*J)(i, n + i) = -sign[i];
        J->bottomLeftCorner(rh.size(), n) = Jh;
      }
    };
    std::vector<bool> is_eq(static_cast<std::size_t>(m), false);
    is_eq.resize(static_cast<std::size_t>(m + hard.rows()), true);

    Eigen::VectorXd z0(n + m);
    z0.head(n) = detail::start_point(s.box, k, shift, s.program.scale);
    std::vector<double> values;
    s.program.tape.forward(z0.data(), values);
    const Valuation v0 = s.program.valuation(values);
    for (Eigen::Index i = 0; i < m; ++i) {
      z0[n + i] = attained_constant(s.norm.predicates[i].ineq, v0);
    }
    const detail::AlResult res = detail::minimize_al(objective, cons, is_eq, z0, lower, upper, al);
    Candidate& c = runs[k];
    c.finite = res.finite && res.x.allFinite();
    c.objective = res.objective;
    c.violation = res.violation;
    c.kkt = res.kkt;
    c.z = res.x;
  };
  detail::run_batches(restarts, options.jobs, run, [](int) { return false; });

  const int best = pick_best(runs);
  if (best < 0) throw NumericError("every weakening restart produced non-finite values");
  const Candidate& c = runs[best];
  const Eigen::VectorXd x = c.z.head(n);
  std::vector<double> values;
  s.program.tape.forward(x.data(), values);
  std::vector<double> constants(c.z.data() + n, c.z.data() + n + m);
  MaxWeakResult out = finish(s, values, &constants);
  out.violation = c.violation;
  out.kkt = 2.0 * c.kkt;
  out.converged = out.kkt <= kKktTolerance && out.violation <= kViolationTolerance;
  return out;
}

WeakeningReport verify_weakening(const ConstraintSet& constraints, const MaxWeakResult& result) {
  WeakeningReport report;
  auto fail = [&](std::string msg) {
    report.ok = false;
    report.failures.push_back(std::move(msg));
  };
  for (const Shift& s : result.per_predicate) {
    if (!implies_ineq(s.original, s.weakened)) {
      fail(s.id + ": " + to_string(s.original) + " does not imply " + to_string(s.weakened));
    }
    for (const std::string& l : referenced_labels(s.weakened.to_formula())) {
      if (result.valuation.count(l) == 0) fail(s.id + ": valuation has no \"" + l + "\"");
    }
    if (report.ok && !holds(s.weakened.to_formula(), result.valuation)) {
      fail(s.id + ": " + to_string(s.weakened) + " does not hold at the valuation");
    }
  }
  for (const Predicate& p : constraints.hard) {
    bool present = true;
    for (const std::string& l : referenced_labels(p.formula)) present &= result.valuation.count(l) > 0;
    if (!present || !holds(p, result.valuation)) fail(p.id + ": hard predicate does not hold");
  }
  return report;
}

}  // namespace atdecor
