#pragma once

// Numeric form of a decoration problem: a shared expression tape over the free
// (input) labels plus constraints in negation normal form.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "atdecor/domain.hpp"
#include "atdecor/predicate.hpp"
#include "atdecor/tree.hpp"

namespace atdecor::detail {

enum class NodeKind { kConst, kInput, kAdd, kSub, kMul, kNeg, kMin, kMax, kNoisyOr };

struct TapeNode {
  NodeKind kind = NodeKind::kConst;
  double value = 0.0;     // kConst
  int input = -1;         // kInput
  std::vector<int> args;  // always smaller indices than the node itself
};

class Tape {
 public:
  int constant(double v);
  int input(int index);  // one node per input index
  int apply(NodeKind kind, std::vector<int> args);

  const std::vector<TapeNode>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  void forward(const double* x, std::vector<double>& v) const;

  // d(sum_k w_k * v[node_k]) / dx added into `grad`. `adjoint` is scratch.
  void gradient(const std::vector<std::pair<int, double>>& seeds, const std::vector<double>& v,
                std::vector<double>& adjoint, double* grad) const;

 private:
  std::vector<TapeNode> nodes_;
  std::map<int, int> inputs_;
};

// raw = v[lhs] - v[rhs] + offset; equality wants raw = 0, inequality raw <= 0.
struct Atom {
  int lhs = 0;
  int rhs = 0;
  double offset = 0.0;
  bool eq = false;
};

struct CNode {
  enum Kind { kAtom, kAnd, kOr } kind = kAtom;
  int atom = -1;
  std::vector<CNode> children;
};

struct Constraint {
  std::string id;
  bool hard = false;
  CNode root;
  int width = 1;  // number of residual components
};

// One residual component of a constraint at a point.
struct Component {
  int atom = -1;  // -1 for padding
  double raw = 0.0;
  bool eq = true;
  double violation() const { return eq ? raw : (raw > 0.0 ? raw : 0.0); }
};

// Strict margin used when negating comparisons: not(a <= b) becomes a >= b + d.
inline constexpr double kStrictMargin = 1e-7;

struct Program {
  Tape tape;
  std::vector<std::string> input_labels;
  std::vector<double> lower;  // per input
  std::vector<double> upper;
  std::map<std::string, int> label_node;
  std::vector<Atom> atoms;
  std::vector<Constraint> constraints;  // hard (incl. bounds:*) first, then soft
  std::vector<std::string> absorbed;    // hard ids turned into definitions
  std::vector<Predicate> predicates;    // everything, for the holds re-check
  double scale = 1.0;                   // magnitude used to sample unbounded inputs

  std::size_t input_count() const noexcept { return input_labels.size(); }
  int constraint_index(const std::string& id) const;

  // Compiles and appends a constraint; returns its index.
  int add_constraint(const std::string& id, const Formula& formula, bool hard);

  // Components of one constraint given forward values.
  void components(const Constraint& c, const std::vector<double>& v,
                  std::vector<Component>& out) const;
  double max_violation(const std::vector<double>& v) const;
  Valuation valuation(const std::vector<double>& v) const;
};

// Validates labels (unique in the tree; every predicate label present) and
// compiles. Acyclic hard equalities `label = expr` become definitions.
// Throws PreconditionError.
Program compile_program(const AttackTree& tree, const AttributeDomain& domain,
                        const ConstraintSet& constraints);

}  // namespace atdecor::detail
