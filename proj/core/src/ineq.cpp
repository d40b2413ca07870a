#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "atdecor/predicate.hpp"

namespace atdecor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Affine {
  std::map<std::string, double> coeffs;
  double constant = 0.0;
};

bool has_labels(const Expr& e) {
  if (e.op == Op::kLabel) return true;
  return std::any_of(e.args.begin(), e.args.end(), has_labels);
}

// Accumulates scale * e into out. Fails on anything non-affine.
bool linearize(const Expr& e, double scale, Affine& out) {
  if (!has_labels(e)) {
    out.constant += scale * evaluate(e, {});
    return true;
  }
  switch (e.op) {
    case Op::kLabel:
      out.coeffs[e.label] += scale;
      return true;
    case Op::kAdd:
      for (const Expr& a : e.args) {
        if (!linearize(a, scale, out)) return false;
      }
      return true;
    case Op::kSub:
      return linearize(e.args[0], scale, out) && linearize(e.args[1], -scale, out);
    case Op::kNeg:
      return linearize(e.args[0], -scale, out);
    case Op::kMul: {
      double factor = 1.0;
      const Expr* variable = nullptr;
      for (const Expr& a : e.args) {
        if (has_labels(a)) {
          if (variable != nullptr) return false;
          variable = &a;
        } else {
          factor *= evaluate(a, {});
        }
      }
      return linearize(*variable, scale * factor, out);
    }
    default:
      return false;
  }
}

double clean(double v) { return v == 0.0 ? 0.0 : v; }

}  // namespace

std::string_view to_string(IneqKind kind) {
  switch (kind) {
    case IneqKind::kLeConst: return "le-const";
    case IneqKind::kGeConst: return "ge-const";
    case IneqKind::kLeLabelPlus: return "le-label";
  }
  return "?";
}

Formula IneqPredicate::to_formula() const {
  switch (kind) {
    case IneqKind::kLeConst:
      return Formula::compare(Expr::ref(left), Cmp::kLe, Expr::constant(constant));
    case IneqKind::kGeConst:
      return Formula::compare(Expr::ref(left), Cmp::kGe, Expr::constant(constant));
    case IneqKind::kLeLabelPlus:
      if (constant == 0.0) return Formula::compare(Expr::ref(left), Cmp::kLe, Expr::ref(right));
      return Formula::compare(Expr::ref(left), Cmp::kLe,
                              Expr::apply(Op::kAdd, {Expr::ref(right), Expr::constant(constant)}));
  }
  return {};
}

std::string to_string(const IneqPredicate& p) { return to_string(p.to_formula()); }

std::optional<IneqPredicate> classify_ineq(const Formula& formula) {
  if (formula.connective != Connective::kCompare || formula.cmp == Cmp::kEq) return std::nullopt;
  // Normal form: sum(c_i l_i) + k <= 0.
  Affine a;
  const double sign = formula.cmp == Cmp::kLe ? 1.0 : -1.0;
  if (!linearize(formula.lhs, sign, a) || !linearize(formula.rhs, -sign, a)) return std::nullopt;
  std::vector<std::pair<std::string, double>> terms;
  for (const auto& [label, c] : a.coeffs) {
    if (c != 0.0) terms.emplace_back(label, c);
  }
  const double k = a.constant;
  if (terms.size() == 1) {
    if (terms[0].second == 1.0) return IneqPredicate{IneqKind::kLeConst, terms[0].first, "", clean(-k)};
    if (terms[0].second == -1.0) return IneqPredicate{IneqKind::kGeConst, terms[0].first, "", clean(k)};
    return std::nullopt;
  }
  if (terms.size() == 2) {
    const auto& [l0, c0] = terms[0];
    const auto& [l1, c1] = terms[1];
    if (c0 == 1.0 && c1 == -1.0) return IneqPredicate{IneqKind::kLeLabelPlus, l0, l1, clean(-k)};
    if (c0 == -1.0 && c1 == 1.0) return IneqPredicate{IneqKind::kLeLabelPlus, l1, l0, clean(-k)};
  }
  return std::nullopt;
}

bool implies_ineq(const IneqPredicate& p, const IneqPredicate& q) {
  if (p.kind != q.kind || p.left != q.left || p.right != q.right) return false;
  return p.kind == IneqKind::kGeConst ? p.constant >= q.constant : p.constant <= q.constant;
}

double pred_distance(const IneqPredicate& p, const IneqPredicate& q) {
  if (p.kind != q.kind || p.left != q.left || p.right != q.right) return kInf;
  return std::abs(p.constant - q.constant);
}

SetDistance set_distance(const std::vector<IneqPredicate>& from,
                         const std::vector<IneqPredicate>& to) {
  SetDistance result;
  if (from.size() != to.size()) {
    result.distance = kInf;
    return result;
  }
  using Key = std::tuple<IneqKind, std::string, std::string>;
  std::map<Key, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < from.size(); ++i) {
    groups[{from[i].kind, from[i].left, from[i].right}].first.push_back(i);
  }
  for (std::size_t j = 0; j < to.size(); ++j) {
    groups[{to[j].kind, to[j].left, to[j].right}].second.push_back(j);
  }
  // Within a group the implication constraint is a threshold on the constants,
  // so matching in sorted order is both admissible whenever any bijection is
  // and optimal for the squared gap.
  result.matching.assign(from.size(), 0);
  double sum = 0.0;
  for (auto& [key, group] : groups) {
    auto& [fi, ti] = group;
    if (fi.size() != ti.size()) {
      result.distance = kInf;
      result.matching.clear();
      return result;
    }
    auto by_constant = [](const std::vector<IneqPredicate>& set) {
      return [&set](std::size_t x, std::size_t y) { return set[x].constant < set[y].constant; };
    };
    std::stable_sort(fi.begin(), fi.end(), by_constant(from));
    std::stable_sort(ti.begin(), ti.end(), by_constant(to));
    for (std::size_t k = 0; k < fi.size(); ++k) {
      if (!implies_ineq(to[ti[k]], from[fi[k]])) {
        result.distance = kInf;
        result.matching.clear();
        return result;
      }
      const double gap = from[fi[k]].constant - to[ti[k]].constant;
      sum += gap * gap;
      result.matching[fi[k]] = ti[k];
    }
  }
  result.distance = std::sqrt(sum);
  return result;
}

}  // namespace atdecor
