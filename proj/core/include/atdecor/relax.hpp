#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atdecor/solver.hpp"

namespace atdecor {

// ---------------------------------------------------------------------------
// Set-inclusion relaxation: keep as many soft predicates as possible.

struct InclusionResult {
  std::vector<std::string> kept;     // in processing order
  std::vector<std::string> dropped;  // in processing order
  Valuation valuation;               // satisfies hard plus kept
  bool exact = false;                // |kept| proved maximum
  std::vector<std::string> unknown;  // dropped because feasibility came back UNKNOWN
  int solver_calls = 0;
};

// Adds soft predicates one at a time in `order` (soft ids; empty means input
// order) and drops each one whose addition is not feasible. The kept set is
// maximal with respect to inclusion, not necessarily of maximum size.
// Throws PreconditionError when the hard set is infeasible or `order` is not a
// permutation of the soft ids.
InclusionResult relax_inclusion_greedy(const AttackTree& tree, const AttributeDomain& domain,
                                       const ConstraintSet& constraints,
                                       const std::vector<std::string>& order = {},
                                       const SolveOptions& options = {});

struct ExactOptions {
  int max_soft = 24;
  int max_solver_calls = 20000;  // exhausting it returns the greedy answer, exact = false
};

// Maximum-cardinality kept set. Drop sets are tried by increasing size; any
// candidate containing a known infeasible core is skipped without a solve.
InclusionResult relax_inclusion_exact(const AttackTree& tree, const AttributeDomain& domain,
                                      const ConstraintSet& constraints,
                                      const SolveOptions& options = {},
                                      const ExactOptions& exact = {});

// ---------------------------------------------------------------------------
// Maximal weakening: shift constants of inequality predicates as little as
// possible (root sum of squares) until the hard set plus shifted soft set is
// satisfiable.

struct NormalizedPredicate {
  std::string id;      // "<origin>#le" / "<origin>#ge" for split equalities
  std::string origin;  // id of the soft predicate it came from
  IneqPredicate ineq;
};

struct Normalization {
  std::vector<NormalizedPredicate> predicates;
  std::vector<std::pair<std::string, std::string>> rejected;  // (id, reason)
};

// Rewrites soft predicates into the inequality class. `l = r` splits into
// `l <= r` and `l >= r`, each classified on its own.
Normalization ineq_normalize(const std::vector<Predicate>& soft);

struct Shift {
  std::string id;
  std::string origin;
  IneqPredicate original;
  IneqPredicate weakened;
  double shift = 0.0;  // |weakened constant - original constant|
};

struct MaxWeakResult {
  std::vector<Shift> per_predicate;  // one per normalized predicate, in order
  Valuation valuation;
  double distance = 0.0;  // root sum of squared shifts
  bool converged = false;
  double kkt = 0.0;        // projected gradient of the Lagrangian at the optimum
  double violation = 0.0;  // of the hard constraints

  std::vector<IneqPredicate> weakened() const;
};

// Throws PreconditionError when the hard set is infeasible, when a soft
// predicate cannot be normalized, or when no soft predicate remains.
MaxWeakResult relax_maxweak(const AttackTree& tree, const AttributeDomain& domain,
                            const ConstraintSet& constraints, const SolveOptions& options = {});

// Same problem over the joint variables (valuation, weakened constants), with
// the direction of each shift as a bound. Used to cross-check relax_maxweak.
MaxWeakResult relax_maxweak_joint(const AttackTree& tree, const AttributeDomain& domain,
                                  const ConstraintSet& constraints,
                                  const SolveOptions& options = {});

struct WeakeningReport {
  bool ok = true;
  std::vector<std::string> failures;  // one message per offending predicate
};

// Each weakened predicate must be implied by its original, and the hard set
// plus the weakened set must hold at the result's valuation.
WeakeningReport verify_weakening(const ConstraintSet& constraints, const MaxWeakResult& result);

}  // namespace atdecor
