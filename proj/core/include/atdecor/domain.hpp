#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "atdecor/predicate.hpp"
#include "atdecor/tree.hpp"

namespace atdecor {

// Unranked, symmetric combinators. A single argument is returned unchanged by
// every rule.
enum class Combinator { kSum, kProduct, kMin, kMax, kNoisyOr };

std::string_view to_string(Combinator combinator);

struct AttributeDomain {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;  // may be +infinity
  Combinator or_rule = Combinator::kNoisyOr;
  Combinator and_rule = Combinator::kProduct;
  // Reject valuations leaving [lower, upper] instead of trusting the rules to
  // stay closed (true for "prob-sum", where a sum can exceed 1).
  bool check_closure = false;

  Combinator rule_for(Refinement refinement) const;
};

double combine(Combinator combinator, const std::vector<double>& values);

// The expression `rule(children...)` as a predicate term; one child gives the
// bare label.
Expr combine_expr(Combinator combinator, const std::vector<std::string>& labels);

// "prob-independent", "prob-sum", "cost", "min-time". Throws PreconditionError.
AttributeDomain builtin_domain(std::string_view name);
std::vector<std::string> builtin_domain_names();

// One equality per refined node, in pre-order, with id "bu:<label>".
std::vector<Predicate> bottom_up_constraints(const AttackTree& tree,
                                             const AttributeDomain& domain);

// Classic bottom-up evaluation. `leaves` must bind exactly the leaf labels,
// each within the domain bounds.
Valuation evaluate_bottom_up(const AttackTree& tree, const AttributeDomain& domain,
                             const Valuation& leaves);

nlohmann::json valuation_to_json(const Valuation& valuation);
Valuation valuation_from_json(const nlohmann::json& j);
Valuation parse_valuation_json(std::string_view source);
// `label,value` rows under a header line; labels are quoted when needed.
std::string valuation_to_csv(const Valuation& valuation);

}  // namespace atdecor
