#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace atdecor {

enum class Refinement { kLeaf, kOr, kAnd };

std::string_view to_string(Refinement refinement);

// A labelled AND/OR tree. Values are immutable once built; copies are deep.
class AttackTree {
 public:
  static AttackTree leaf(std::string label);
  // Throws PreconditionError when `children` is empty.
  static AttackTree refined(Refinement refinement, std::string label,
                            std::vector<AttackTree> children);

  const std::string& label() const noexcept { return label_; }
  Refinement refinement() const noexcept { return refinement_; }
  const std::vector<AttackTree>& children() const noexcept { return children_; }
  bool is_leaf() const noexcept { return refinement_ == Refinement::kLeaf; }

  std::size_t node_count() const;

  friend bool operator==(const AttackTree&, const AttackTree&) = default;

 private:
  AttackTree(Refinement refinement, std::string label, std::vector<AttackTree> children);

  Refinement refinement_;
  std::string label_;
  std::vector<AttackTree> children_;
};

using LabelSet = std::set<std::string>;

LabelSet labels_of(const AttackTree& tree);
LabelSet leaf_labels_of(const AttackTree& tree);
const std::string& root_label(const AttackTree& tree);

struct UniquenessReport {
  bool unique = true;
  std::vector<std::string> duplicates;  // sorted, each listed once
};

UniquenessReport check_unique_labels(const AttackTree& tree);

// Throws PreconditionError naming the duplicates when labels are not unique.
void require_unique_labels(const AttackTree& tree);

// Visits every node in pre-order.
template <typename Fn>
void for_each_node(const AttackTree& tree, Fn&& fn) {
  fn(tree);
  for (const AttackTree& child : tree.children()) for_each_node(child, fn);
}

// Accepts either the bracket DSL or the JSON object form; the format is picked
// from the first non-blank character ('{' selects JSON).
AttackTree parse_tree(std::string_view source);
AttackTree parse_tree_dsl(std::string_view source);
AttackTree parse_tree_json(std::string_view source);

// Canonical DSL text. `indent` < 0 produces a single line.
std::string serialize_tree(const AttackTree& tree, int indent = 2);

nlohmann::json tree_to_json(const AttackTree& tree);
AttackTree tree_from_json(const nlohmann::json& node);

}  // namespace atdecor
