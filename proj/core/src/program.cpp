#include "program.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "atdecor/errors.hpp"
#include "interval.hpp"

namespace atdecor::detail {

int Tape::constant(double v) {
  nodes_.push_back(TapeNode{NodeKind::kConst, v, -1, {}});
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(int index) {
  const auto it = inputs_.find(index);
  if (it != inputs_.end()) return it->second;
  nodes_.push_back(TapeNode{NodeKind::kInput, 0.0, index, {}});
  const int id = static_cast<int>(nodes_.size()) - 1;
  inputs_[index] = id;
  return id;
}

int Tape::apply(NodeKind kind, std::vector<int> args) {
  nodes_.push_back(TapeNode{kind, 0.0, -1, std::move(args)});
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::forward(const double* x, std::vector<double>& v) const {
  v.resize(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const TapeNode& n = nodes_[k];
    double r = 0.0;
    switch (n.kind) {
      case NodeKind::kConst: r = n.value; break;
      case NodeKind::kInput: r = x[n.input]; break;
      case NodeKind::kAdd:
        for (int a : n.args) r += v[a];
        break;
      case NodeKind::kSub: r = v[n.args[0]] - v[n.args[1]]; break;
      case NodeKind::kMul:
        r = 1.0;
        for (int a : n.args) r *= v[a];
        break;
      case NodeKind::kNeg: r = -v[n.args[0]]; break;
      case NodeKind::kMin:
        r = v[n.args[0]];
        for (int a : n.args) r = std::min(r, v[a]);
        break;
      case NodeKind::kMax:
        r = v[n.args[0]];
        for (int a : n.args) r = std::max(r, v[a]);
        break;
      case NodeKind::kNoisyOr: {
        double miss = 1.0;
        for (int a : n.args) miss *= 1.0 - v[a];
        r = 1.0 - miss;
        break;
      }
    }
    v[k] = r;
  }
}

void Tape::gradient(const std::vector<std::pair<int, double>>& seeds, const std::vector<double>& v,
                    std::vector<double>& adjoint, double* grad) const {
  int top = -1;
  for (const auto& [node, w] : seeds) top = std::max(top, node);
  if (top < 0) return;
  adjoint.assign(static_cast<std::size_t>(top) + 1, 0.0);
  for (const auto& [node, w] : seeds) adjoint[node] += w;
  std::vector<double> prefix;
  for (int k = top; k >= 0; --k) {
    const double a = adjoint[k];
    if (a == 0.0) continue;
    const TapeNode& n = nodes_[k];
    switch (n.kind) {
      case NodeKind::kConst: break;
      case NodeKind::kInput: grad[n.input] += a; break;
      case NodeKind::kAdd:
        for (int arg : n.args) adjoint[arg] += a;
        break;
      case NodeKind::kSub:
        adjoint[n.args[0]] += a;
        adjoint[n.args[1]] -= a;
        break;
      case NodeKind::kNeg: adjoint[n.args[0]] -= a; break;
      case NodeKind::kMul:
      case NodeKind::kNoisyOr: {
        // d/dx_i of prod_j f(x_j) is f'(x_i) prod_{j != i} f(x_j).
        const bool noisy = n.kind == NodeKind::kNoisyOr;
        const std::size_t m = n.args.size();
        prefix.assign(m + 1, 1.0);
        for (std::size_t i = 0; i < m; ++i) {
          const double f = noisy ? 1.0 - v[n.args[i]] : v[n.args[i]];
          prefix[i + 1] = prefix[i] * f;
        }
        double suffix = 1.0;
        for (std::size_t i = m; i-- > 0;) {
          adjoint[n.args[i]] += a * prefix[i] * suffix;
          suffix *= noisy ? 1.0 - v[n.args[i]] : v[n.args[i]];
        }
        break;
      }
      case NodeKind::kMin:
      case NodeKind::kMax: {
        int pick = n.args[0];
        for (int arg : n.args) {
          if (n.kind == NodeKind::kMin ? v[arg] < v[pick] : v[arg] > v[pick]) pick = arg;
        }
        adjoint[pick] += a;
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------------

int Program::constraint_index(const std::string& id) const {
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (constraints[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

namespace {

class Compiler {
 public:
  explicit Compiler(Program& p) : p_(p) {}

  int expr(const Expr& e) {
    switch (e.op) {
      case Op::kConst: return p_.tape.constant(e.value);
      case Op::kLabel: {
        const auto it = p_.label_node.find(e.label);
        if (it == p_.label_node.end()) throw UnboundLabelError(e.label);
        return it->second;
      }
      default: break;
    }
    std::vector<int> args;
    for (const Expr& a : e.args) args.push_back(expr(a));
    switch (e.op) {
      case Op::kAdd: return p_.tape.apply(NodeKind::kAdd, std::move(args));
      case Op::kSub: return p_.tape.apply(NodeKind::kSub, std::move(args));
      case Op::kMul: return p_.tape.apply(NodeKind::kMul, std::move(args));
      case Op::kNeg: return p_.tape.apply(NodeKind::kNeg, std::move(args));
      case Op::kMin: return p_.tape.apply(NodeKind::kMin, std::move(args));
      case Op::kMax: return p_.tape.apply(NodeKind::kMax, std::move(args));
      case Op::kNoisyOr: return p_.tape.apply(NodeKind::kNoisyOr, std::move(args));
      default: return -1;
    }
  }

  CNode formula(const Formula& f, bool negated) {
    CNode out;
    switch (f.connective) {
      case Connective::kNot:
        return formula(f.operands[0], !negated);
      case Connective::kAnd:
      case Connective::kOr: {
        const bool conj = (f.connective == Connective::kAnd) != negated;
        out.kind = conj ? CNode::kAnd : CNode::kOr;
        for (const Formula& g : f.operands) out.children.push_back(formula(g, negated));
        return out;
      }
      case Connective::kCompare:
        break;
    }
    const int l = expr(f.lhs);
    const int r = expr(f.rhs);
    if (!negated) {
      switch (f.cmp) {
        case Cmp::kEq: return atom(l, r, 0.0, true);
        case Cmp::kLe: return atom(l, r, 0.0, false);
        case Cmp::kGe: return atom(r, l, 0.0, false);
      }
    }
    switch (f.cmp) {
      case Cmp::kLe: return atom(r, l, kStrictMargin, false);  // l >= r + d
      case Cmp::kGe: return atom(l, r, kStrictMargin, false);  // l <= r - d
      case Cmp::kEq:
        out.kind = CNode::kOr;
        out.children.push_back(atom(l, r, kStrictMargin, false));
        out.children.push_back(atom(r, l, kStrictMargin, false));
        return out;
    }
    return out;
  }

 private:
  CNode atom(int lhs, int rhs, double offset, bool eq) {
    p_.atoms.push_back(Atom{lhs, rhs, offset, eq});
    CNode n;
    n.kind = CNode::kAtom;
    n.atom = static_cast<int>(p_.atoms.size()) - 1;
    return n;
  }

  Program& p_;
};

int width_of(const CNode& n) {
  if (n.kind == CNode::kAtom) return 1;
  int w = 0;
  for (const CNode& c : n.children) {
    w = n.kind == CNode::kAnd ? w + width_of(c) : std::max(w, width_of(c));
  }
  return w;
}

void append_components(const Program& p, const CNode& n, const std::vector<double>& v,
                       std::vector<Component>& out) {
  if (n.kind == CNode::kAtom) {
    const Atom& a = p.atoms[n.atom];
    out.push_back(Component{n.atom, v[a.lhs] - v[a.rhs] + a.offset, a.eq});
    return;
  }
  if (n.kind == CNode::kAnd) {
    for (const CNode& c : n.children) append_components(p, c, v, out);
    return;
  }
  // Or: the branch with the least squared violation, padded to full width.
  std::vector<Component> best;
  double best_score = 0.0;
  std::vector<Component> scratch;
  for (const CNode& c : n.children) {
    scratch.clear();
    append_components(p, c, v, scratch);
    double score = 0.0;
    for (const Component& comp : scratch) score += comp.violation() * comp.violation();
    if (best.empty() || score < best_score) {
      best = scratch;
      best_score = score;
    }
  }
  const int w = width_of(n);
  best.resize(static_cast<std::size_t>(w));
  out.insert(out.end(), best.begin(), best.end());
}

}  // namespace

int Program::add_constraint(const std::string& id, const Formula& f, bool hard) {
  Compiler compiler(*this);
  Constraint c;
  c.id = id;
  c.hard = hard;
  c.root = compiler.formula(f, false);
  c.width = width_of(c.root);
  constraints.push_back(std::move(c));
  return static_cast<int>(constraints.size()) - 1;
}

void Program::components(const Constraint& c, const std::vector<double>& v,
                         std::vector<Component>& out) const {
  append_components(*this, c.root, v, out);
}

double Program::max_violation(const std::vector<double>& v) const {
  double worst = 0.0;
  std::vector<Component> comps;
  for (const Constraint& c : constraints) {
    comps.clear();
    components(c, v, comps);
    for (const Component& comp : comps) worst = std::max(worst, std::abs(comp.violation()));
  }
  return worst;
}

Valuation Program::valuation(const std::vector<double>& v) const {
  Valuation out;
  for (const auto& [label, node] : label_node) out[label] = v[node];
  return out;
}

namespace {

void collect_constants(const Expr& e, double& m) {
  if (e.op == Op::kConst && std::isfinite(e.value)) m = std::max(m, std::abs(e.value));
  for (const Expr& a : e.args) collect_constants(a, m);
}

void collect_constants(const Formula& f, double& m) {
  collect_constants(f.lhs, m);
  collect_constants(f.rhs, m);
  for (const Formula& g : f.operands) collect_constants(g, m);
}

}  // namespace

Program compile_program(const AttackTree& tree, const AttributeDomain& domain,
                        const ConstraintSet& constraints) {
  require_unique_labels(tree);
  const LabelSet labels = labels_of(tree);
  std::set<std::string> seen_ids;
  for (const auto* group : {&constraints.hard, &constraints.soft}) {
    for (const Predicate& p : *group) {
      if (!seen_ids.insert(p.id).second) {
        throw PreconditionError("duplicate predicate id \"" + p.id + "\"");
      }
      for (const std::string& l : referenced_labels(p.formula)) {
        if (labels.count(l) == 0) {
          throw PreconditionError("predicate \"" + p.id + "\" references \"" + l +
                                  "\", which is not a label of the tree");
        }
      }
    }
  }

  Program prog;
  // Definitions from hard equalities, skipping any that would close a cycle.
  std::map<std::string, const Expr*> definition;
  std::set<std::string> absorbed;
  std::function<bool(const Expr&, const std::string&)> depends_on =
      [&](const Expr& e, const std::string& target) {
        for (const std::string& l : referenced_labels(e)) {
          if (l == target) return true;
          const auto it = definition.find(l);
          if (it != definition.end() && depends_on(*it->second, target)) return true;
        }
        return false;
      };
  for (const Predicate& p : constraints.hard) {
    const Formula& f = p.formula;
    if (f.connective != Connective::kCompare || f.cmp != Cmp::kEq) continue;
    for (int side = 0; side < 2; ++side) {
      const Expr& def = side == 0 ? f.lhs : f.rhs;
      const Expr& body = side == 0 ? f.rhs : f.lhs;
      if (def.op != Op::kLabel || definition.count(def.label) != 0) continue;
      if (depends_on(body, def.label)) continue;
      definition[def.label] = &body;
      absorbed.insert(p.id);
      prog.absorbed.push_back(p.id);
      break;
    }
  }

  // Inputs in label order; defined labels compiled on demand.
  for (const std::string& l : labels) {
    if (definition.count(l) != 0) continue;
    const int index = static_cast<int>(prog.input_labels.size());
    prog.input_labels.push_back(l);
    prog.lower.push_back(domain.lower);
    prog.upper.push_back(domain.upper);
    prog.label_node[l] = prog.tape.input(index);
  }
  Compiler compiler(prog);
  std::function<void(const std::string&)> define = [&](const std::string& l) {
    if (prog.label_node.count(l) != 0) return;
    const Expr& body = *definition.at(l);
    for (const std::string& dep : referenced_labels(body)) define(dep);
    prog.label_node[l] = compiler.expr(body);
  };
  for (const auto& [l, body] : definition) define(l);

  // Domain bounds on defined labels, unless the input box already implies them.
  std::vector<Interval> iv;
  forward_intervals(prog.tape, input_box(prog), iv);
  for (const auto& [l, body] : definition) {
    const Interval range = iv[prog.label_node.at(l)];
    std::vector<Formula> sides;
    if (!(range.lo >= domain.lower)) {
      sides.push_back(Formula::compare(Expr::ref(l), Cmp::kGe, Expr::constant(domain.lower)));
    }
    if (!(range.hi <= domain.upper)) {
      sides.push_back(Formula::compare(Expr::ref(l), Cmp::kLe, Expr::constant(domain.upper)));
    }
    if (sides.empty()) continue;
    const Formula f = sides.size() == 1 ? sides[0] : Formula::all_of(std::move(sides));
    prog.add_constraint("bounds:" + l, f, true);
  }

  double magnitude = 0.0;
  for (const auto* group : {&constraints.hard, &constraints.soft}) {
    for (const Predicate& p : *group) {
      prog.predicates.push_back(p);
      collect_constants(p.formula, magnitude);
      if (p.is_hard() && absorbed.count(p.id) != 0) continue;
      prog.add_constraint(p.id, p.formula, p.is_hard());
    }
  }
  if (std::isfinite(domain.upper)) magnitude = std::max(magnitude, domain.upper);
  prog.scale = std::max(1.0, 2.0 * magnitude);
  return prog;
}

}  // namespace atdecor::detail
