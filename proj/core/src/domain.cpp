#include "atdecor/domain.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>

#include <nlohmann/json.hpp>

#include "atdecor/errors.hpp"

namespace atdecor {

std::string_view to_string(Combinator combinator) {
  switch (combinator) {
    case Combinator::kSum: return "sum";
    case Combinator::kProduct: return "product";
    case Combinator::kMin: return "min";
    case Combinator::kMax: return "max";
    case Combinator::kNoisyOr: return "or_indep";
  }
  return "?";
}

Combinator AttributeDomain::rule_for(Refinement refinement) const {
  if (refinement == Refinement::kLeaf) throw PreconditionError("leaves have no combinator");
  return refinement == Refinement::kOr ? or_rule : and_rule;
}

double combine(Combinator combinator, const std::vector<double>& values) {
  if (values.empty()) throw PreconditionError("combinator applied to no values");
  if (values.size() == 1) return values[0];
  double acc = values[0];
  if (combinator == Combinator::kNoisyOr) acc = 1.0 - values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double v = values[i];
    switch (combinator) {
      case Combinator::kSum: acc += v; break;
      case Combinator::kProduct: acc *= v; break;
      case Combinator::kMin: acc = std::min(acc, v); break;
      case Combinator::kMax: acc = std::max(acc, v); break;
      case Combinator::kNoisyOr: acc *= 1.0 - v; break;
    }
  }
  return combinator == Combinator::kNoisyOr ? 1.0 - acc : acc;
}

Expr combine_expr(Combinator combinator, const std::vector<std::string>& labels) {
  if (labels.empty()) throw PreconditionError("combinator applied to no labels");
  if (labels.size() == 1) return Expr::ref(labels[0]);
  std::vector<Expr> args;
  for (const std::string& l : labels) args.push_back(Expr::ref(l));
  switch (combinator) {
    case Combinator::kSum: return Expr::apply(Op::kAdd, std::move(args));
    case Combinator::kProduct: return Expr::apply(Op::kMul, std::move(args));
    case Combinator::kMin: return Expr::apply(Op::kMin, std::move(args));
    case Combinator::kMax: return Expr::apply(Op::kMax, std::move(args));
    case Combinator::kNoisyOr: return Expr::apply(Op::kNoisyOr, std::move(args));
  }
  return {};
}

AttributeDomain builtin_domain(std::string_view name) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (name == "prob-independent") {
    return {"prob-independent", 0.0, 1.0, Combinator::kNoisyOr, Combinator::kProduct, false};
  }
  if (name == "prob-sum") {
    return {"prob-sum", 0.0, 1.0, Combinator::kSum, Combinator::kProduct, true};
  }
  if (name == "cost") return {"cost", 0.0, kInf, Combinator::kMin, Combinator::kSum, false};
  if (name == "min-time") return {"min-time", 0.0, kInf, Combinator::kMin, Combinator::kMax, false};
  throw PreconditionError("unknown attribute domain \"" + std::string(name) + "\"");
}

std::vector<std::string> builtin_domain_names() {
  return {"prob-independent", "prob-sum", "cost", "min-time"};
}

std::vector<Predicate> bottom_up_constraints(const AttackTree& tree,
                                             const AttributeDomain& domain) {
  require_unique_labels(tree);
  std::vector<Predicate> out;
  for_each_node(tree, [&](const AttackTree& node) {
    if (node.is_leaf()) return;
    std::vector<std::string> children;
    for (const AttackTree& c : node.children()) children.push_back(c.label());
    out.push_back(Predicate{
        "bu:" + node.label(), Provenance::kHardStructural,
        Formula::compare(Expr::ref(node.label()), Cmp::kEq,
                         combine_expr(domain.rule_for(node.refinement()), children))});
  });
  return out;
}

Valuation evaluate_bottom_up(const AttackTree& tree, const AttributeDomain& domain,
                             const Valuation& leaves) {
  require_unique_labels(tree);
  const LabelSet leaf_labels = leaf_labels_of(tree);
  for (const auto& [label, value] : leaves) {
    if (leaf_labels.count(label) == 0) {
      throw PreconditionError("\"" + label + "\" is not a leaf of the tree");
    }
  }
  auto in_bounds = [&](const std::string& label, double v) {
    if (!std::isfinite(v) || v < domain.lower || v > domain.upper) {
      throw PreconditionError("value " + std::to_string(v) + " for \"" + label +
                              "\" is outside the bounds of domain " + domain.name);
    }
  };
  Valuation out;
  std::function<double(const AttackTree&)> visit = [&](const AttackTree& node) -> double {
    double v;
    if (node.is_leaf()) {
      const auto it = leaves.find(node.label());
      if (it == leaves.end()) throw PreconditionError("no value for leaf \"" + node.label() + "\"");
      v = it->second;
      in_bounds(node.label(), v);
    } else {
      std::vector<double> values;
      for (const AttackTree& c : node.children()) values.push_back(visit(c));
      v = combine(domain.rule_for(node.refinement()), values);
      if (domain.check_closure) in_bounds(node.label(), v);
    }
    out[node.label()] = v;
    return v;
  };
  visit(tree);
  return out;
}

nlohmann::json valuation_to_json(const Valuation& valuation) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [label, value] : valuation) j[label] = value;
  return j;
}

Valuation valuation_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("valuation must be a JSON object", 0, 0);
  Valuation out;
  for (const auto& [label, value] : j.items()) {
    if (!value.is_number()) throw ParseError("value for \"" + label + "\" is not a number", 0, 0);
    out[label] = value.get<double>();
  }
  return out;
}

Valuation parse_valuation_json(std::string_view source) {
  try {
    return valuation_from_json(nlohmann::json::parse(source));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON valuation: ") + e.what(), 0, 0);
  }
}

std::string valuation_to_csv(const Valuation& valuation) {
  std::string out = "label,value\n";
  for (const auto& [label, value] : valuation) {
    if (label.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (char c : label) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    } else {
      out += label;
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out += ',';
    out.append(buf, ptr);
    out += '\n';
  }
  return out;
}

}  // namespace atdecor
