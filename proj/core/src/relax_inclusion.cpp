#include <algorithm>
#include <cstdint>

#include "atdecor/errors.hpp"
#include "atdecor/relax.hpp"

namespace atdecor {

namespace {

using Mask = std::uint32_t;

struct Problem {
  const AttackTree& tree;
  const AttributeDomain& domain;
  const ConstraintSet& constraints;
  const SolveOptions& options;
  std::vector<std::string> order;  // soft ids in processing order
  int calls = 0;

  SolveOutcome check(Mask members) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (members & (Mask{1} << i)) ids.push_back(order[i]);
    }
    ++calls;
    return solve(tree, domain, constraints.with_soft(ids), options);
  }

  std::vector<std::string> ids_of(Mask members) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (members & (Mask{1} << i)) out.push_back(order[i]);
    }
    return out;
  }
};

std::vector<std::string> resolve_order(const ConstraintSet& constraints,
                                       const std::vector<std::string>& order) {
  std::vector<std::string> soft_ids;
  for (const Predicate& p : constraints.soft) soft_ids.push_back(p.id);
  if (order.empty()) return soft_ids;
  std::vector<std::string> a = soft_ids;
  std::vector<std::string> b = order;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw PreconditionError("order must be a permutation of the soft predicate ids");
  return order;
}

Valuation require_hard_feasible(const AttackTree& tree, const AttributeDomain& domain,
                                const ConstraintSet& constraints, const SolveOptions& options) {
  ConstraintSet hard_only;
  hard_only.hard = constraints.hard;
  const SolveOutcome out = solve(tree, domain, hard_only, options);
  if (!out.feasible()) throw PreconditionError("hard predicates alone are not satisfiable");
  return *out.valuation;
}

}  // namespace

InclusionResult relax_inclusion_greedy(const AttackTree& tree, const AttributeDomain& domain,
                                       const ConstraintSet& constraints,
                                       const std::vector<std::string>& order,
                                       const SolveOptions& options) {
  InclusionResult out;
  out.valuation = require_hard_feasible(tree, domain, constraints, options);
  out.solver_calls = 1;
  std::vector<std::string> kept;
  for (const std::string& id : resolve_order(constraints, order)) {
    kept.push_back(id);
    const SolveOutcome trial = solve(tree, domain, constraints.with_soft(kept), options);
    ++out.solver_calls;
    if (trial.feasible()) {
      out.valuation = *trial.valuation;
      continue;
    }
    kept.pop_back();
    out.dropped.push_back(id);
    if (trial.status == SolveStatus::kUnknown) out.unknown.push_back(id);
  }
  out.kept = std::move(kept);
  out.exact = out.dropped.empty();
  return out;
}

InclusionResult relax_inclusion_exact(const AttackTree& tree, const AttributeDomain& domain,
                                      const ConstraintSet& constraints,
                                      const SolveOptions& options, const ExactOptions& exact) {
  const auto n = static_cast<int>(constraints.soft.size());
  if (n > exact.max_soft || n > 31) {
    throw PreconditionError("exact inclusion relaxation is limited to " +
                            std::to_string(std::min(exact.max_soft, 31)) + " soft predicates");
  }
  InclusionResult greedy = relax_inclusion_greedy(tree, domain, constraints, {}, options);
  if (greedy.dropped.empty()) return greedy;

  Problem problem{tree, domain, constraints, options, resolve_order(constraints, {}), 0};
  const Mask all = (Mask{1} << n) - 1;
  std::vector<Mask> cores;  // known infeasible subsets; any superset is infeasible too
  bool unproved = false;
  auto budget_left = [&] { return greedy.solver_calls + problem.calls < exact.max_solver_calls; };

  // Shrinks an infeasible set to an irreducible one by deletion.
  auto shrink = [&](Mask members) {
    Mask core = members;
    for (int i = 0; i < n && budget_left(); ++i) {
      const Mask bit = Mask{1} << i;
      if (!(core & bit)) continue;
      if (problem.check(core & ~bit).infeasible()) core &= ~bit;
    }
    return core;
  };

  const int greedy_drops = static_cast<int>(greedy.dropped.size());
  for (int k = 0; k < greedy_drops; ++k) {
    // Drop sets of size k in lexicographic order of positions.
    std::vector<int> pick(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      Mask drop = 0;
      for (int i : pick) drop |= Mask{1} << i;
      const Mask candidate = all & ~drop;
      const bool pruned = std::any_of(cores.begin(), cores.end(),
                                      [&](Mask c) { return (c & candidate) == c; });
      if (!pruned) {
        if (!budget_left()) {
          greedy.exact = false;
          greedy.solver_calls += problem.calls;
          return greedy;
        }
        const SolveOutcome out = problem.check(candidate);
        if (out.feasible()) {
          InclusionResult best;
          best.kept = problem.ids_of(candidate);
          best.dropped = problem.ids_of(drop);
          best.valuation = *out.valuation;
          best.exact = !unproved;
          best.solver_calls = greedy.solver_calls + problem.calls;
          return best;
        }
        if (out.infeasible()) {
          cores.push_back(shrink(candidate));
        } else {
          unproved = true;  // UNKNOWN: cannot prune with it, cannot prove anything either
        }
      }
      // Next combination.
      int i = k - 1;
      while (i >= 0 && pick[i] == n - k + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  greedy.exact = !unproved;
  greedy.solver_calls += problem.calls;
  return greedy;
}

}  // namespace atdecor
