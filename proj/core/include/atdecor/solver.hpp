#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atdecor/domain.hpp"
#include "atdecor/predicate.hpp"
#include "atdecor/tree.hpp"

namespace atdecor {

enum class SolveStatus { kFeasible, kInfeasibleProved, kInfeasiblePresumed, kUnknown };

std::string_view to_string(SolveStatus status);

struct SolveOptions {
  int restarts = 64;
  int iterations = 500;
  unsigned long long seed = 1;
  double feasibility_tolerance = 1e-7;  // on the max constraint violation
  int jobs = 1;                         // parallel restarts; results do not depend on it
  // Called after each batch of restarts with the restarts run so far and the
  // best max-violation seen. Must not throw.
  std::function<void(int restarts, double best_residual)> on_progress;
};

// The constraints whose interval contraction emptied the box, in input order.
// Replaying contraction over just these reproduces the empty box.
struct IntervalCertificate {
  std::vector<std::string> constraint_ids;
  std::string emptied_by;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::kUnknown;
  std::optional<Valuation> valuation;
  double residual = std::numeric_limits<double>::infinity();
  int restarts_used = 0;
  std::optional<IntervalCertificate> certificate;

  bool feasible() const noexcept { return status == SolveStatus::kFeasible; }
  bool infeasible() const noexcept {
    return status == SolveStatus::kInfeasibleProved || status == SolveStatus::kInfeasiblePresumed;
  }
};

// Searches for a valuation satisfying every hard and soft predicate.
// Preconditions (PreconditionError): unique tree labels, every referenced
// label in the tree, unique predicate ids.
SolveOutcome solve(const AttackTree& tree, const AttributeDomain& domain,
                   const ConstraintSet& constraints, const SolveOptions& options = {});

// Re-runs interval contraction over the certificate's constraints only.
bool replay_certificate(const AttackTree& tree, const AttributeDomain& domain,
                        const ConstraintSet& constraints, const IntervalCertificate& certificate);

enum class Verdict { kDetermined, kUndetermined, kInconsistent };

std::string_view to_string(Verdict verdict);

struct Classification {
  Verdict verdict = Verdict::kUndetermined;
  // Two feasible valuations that differ on some label by more than the
  // separation threshold (UNDETERMINED only).
  std::optional<std::pair<Valuation, Valuation>> witness_pair;
  // Set when a solver call came back UNKNOWN and the verdict is not certain.
  bool caveat = false;
  std::string note;
  SolveStatus status = SolveStatus::kUnknown;  // of the underlying solve
};

// Separation threshold: 1e-4 of the domain width, or of max(1, constant
// magnitude) for unbounded domains.
Classification classify(const AttackTree& tree, const AttributeDomain& domain,
                        const ConstraintSet& constraints, const SolveOptions& options = {});

struct CoreCheck {
  std::string id;
  SolveStatus status_without = SolveStatus::kUnknown;
};

struct UnsatCore {
  std::vector<std::string> core;  // soft ids, in input order
  bool minimal = false;
  std::vector<CoreCheck> checks;  // one per core member
  SolveStatus status = SolveStatus::kUnknown;  // of the full constraint set
};

// Deletion-based minimization over the soft predicates in input order.
// Throws PreconditionError when the full set is feasible or the hard set alone
// is not.
UnsatCore unsat_core(const AttackTree& tree, const AttributeDomain& domain,
                     const ConstraintSet& constraints, const SolveOptions& options = {});

}  // namespace atdecor
