#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "atdecor/tree.hpp"

namespace atdecor {

// Valuation: label -> attribute value. Kept ordered so that serialized output
// is deterministic.
using Valuation = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// Arithmetic expressions over labels.

enum class Op {
  kConst,
  kLabel,
  kAdd,      // n-ary
  kSub,      // binary
  kMul,      // n-ary
  kNeg,
  kMin,      // n-ary
  kMax,      // n-ary
  kNoisyOr,  // n-ary: 1 - prod(1 - x_i), spelled or_indep(...)
};

struct Expr {
  Op op = Op::kConst;
  double value = 0.0;      // kConst
  std::string label;       // kLabel
  std::vector<Expr> args;  // everything else

  static Expr constant(double v);
  static Expr ref(std::string label);
  static Expr apply(Op op, std::vector<Expr> args);

  friend bool operator==(const Expr&, const Expr&) = default;
};

enum class Cmp { kEq, kLe, kGe };

enum class Connective { kCompare, kAnd, kOr, kNot };

// Boolean formula: a comparison between two expressions, or a connective.
struct Formula {
  Connective connective = Connective::kCompare;
  Cmp cmp = Cmp::kEq;
  Expr lhs;
  Expr rhs;
  std::vector<Formula> operands;

  static Formula compare(Expr lhs, Cmp cmp, Expr rhs);
  static Formula all_of(std::vector<Formula> operands);
  static Formula any_of(std::vector<Formula> operands);
  static Formula negate(Formula operand);

  friend bool operator==(const Formula&, const Formula&) = default;
};

enum class Provenance { kHardStructural, kSoftHistorical, kSoftDomainKnowledge };

std::string_view to_string(Provenance provenance);

struct Predicate {
  std::string id;
  Provenance provenance = Provenance::kSoftDomainKnowledge;
  Formula formula;

  bool is_hard() const noexcept { return provenance == Provenance::kHardStructural; }
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

// Hard and soft predicates in input order.
struct ConstraintSet {
  std::vector<Predicate> hard;
  std::vector<Predicate> soft;

  std::size_t size() const noexcept { return hard.size() + soft.size(); }
  const Predicate* find(std::string_view id) const;

  // Concatenates; throws PreconditionError on a repeated id.
  void append(const std::vector<Predicate>& predicates);
  // Keeps the hard set and only the listed soft ids (in current order).
  ConstraintSet with_soft(const std::vector<std::string>& soft_ids) const;
};

// ---------------------------------------------------------------------------
// Text forms.

std::string to_string(const Expr& expr);
std::string to_string(const Formula& formula);

// Parses a bare predicate such as `"hack account" <= 0.01`.
Formula parse_formula(std::string_view source);

// Parses a predicate and wraps it with an id and provenance.
Predicate parse_predicate(std::string_view source, std::string id = "p",
                          Provenance provenance = Provenance::kSoftDomainKnowledge);

// Predicate file: one predicate per line, `#` comments.
//   hard: <formula>
//   soft: <formula>                       (domain knowledge)
//   soft(historical): <formula>
//   soft(knowledge): <formula>
// An optional `[id]` may follow the kind, e.g. `soft(historical)[cash]: ...`.
// Lines without an explicit id get `<id_prefix>.<n>` (1-based ordinal).
std::vector<Predicate> parse_predicate_file(std::string_view source,
                                            const std::string& id_prefix = "p");

// One line of the predicate file format, round-trips through the parser.
std::string to_line(const Predicate& predicate);

nlohmann::json expr_to_json(const Expr& expr);
Expr expr_from_json(const nlohmann::json& j);
nlohmann::json formula_to_json(const Formula& formula);
Formula formula_from_json(const nlohmann::json& j);
nlohmann::json predicate_to_json(const Predicate& predicate);
Predicate predicate_from_json(const nlohmann::json& j);
// Accepts `[predicate...]` or `{"predicates": [...]}`.
std::vector<Predicate> parse_predicate_json(std::string_view source);

// ---------------------------------------------------------------------------
// Semantics.

LabelSet referenced_labels(const Expr& expr);
LabelSet referenced_labels(const Formula& formula);

// Throws UnboundLabelError when a referenced label is missing.
double evaluate(const Expr& expr, const Valuation& valuation);

// Relative tolerance used by the satisfaction relation.
inline constexpr double kHoldsTolerance = 1e-9;

// The satisfaction relation. Equality holds when the two sides are within
// kHoldsTolerance * max(1, |lhs|, |rhs|); <= and >= get the same one-sided
// slack.
bool holds(const Formula& formula, const Valuation& valuation);
bool holds(const Predicate& predicate, const Valuation& valuation);

// Searches `samples` random valuations in `box` for a point where `p` holds
// and `q` fails. Returns the counterexample, or nullopt when none was seen.
// This is a falsifier, not a proof of entailment.
std::optional<Valuation> find_entailment_counterexample(
    const Formula& p, const Formula& q, const std::map<std::string, std::pair<double, double>>& box,
    int samples, unsigned long long seed);

// ---------------------------------------------------------------------------
// Inequality class: l <= a, l >= a, l <= l' + a.

enum class IneqKind { kLeConst, kGeConst, kLeLabelPlus };

std::string_view to_string(IneqKind kind);

struct IneqPredicate {
  IneqKind kind = IneqKind::kLeConst;
  std::string left;
  std::string right;  // kLeLabelPlus only
  double constant = 0.0;

  Formula to_formula() const;
  friend bool operator==(const IneqPredicate&, const IneqPredicate&) = default;
};

std::string to_string(const IneqPredicate& p);

// Recognizes the three inequality shapes after moving everything affine to one
// side (so `l >= l' + a` is returned as `l' <= l + (-a)`). Equalities are not
// in the class.
std::optional<IneqPredicate> classify_ineq(const Formula& formula);

// True when p entails q: same kind and labels, and q's bound is no tighter.
bool implies_ineq(const IneqPredicate& p, const IneqPredicate& q);

// |a_p - a_q| for the same kind and labels, +infinity otherwise.
double pred_distance(const IneqPredicate& p, const IneqPredicate& q);

struct SetDistance {
  double distance = 0.0;  // +infinity when no admissible bijection exists
  // matching[i] = index into the second set for element i of the first.
  std::vector<std::size_t> matching;
};

// Minimum over bijections f: from -> to with f(p) implies p of the root sum of
// squared constant gaps.
SetDistance set_distance(const std::vector<IneqPredicate>& from,
                         const std::vector<IneqPredicate>& to);

}  // namespace atdecor
