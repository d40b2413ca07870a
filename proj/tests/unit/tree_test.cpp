#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "atdecor/errors.hpp"
#include "atdecor/tree.hpp"

namespace atdecor {
namespace {

constexpr const char* kFig1 =
    R"(OR( AND("steal card"  "shoulder surf PIN")@"get money at ATM", "hack account" )@"steal money")";

TEST(ParseTree, Fig1HasFiveNodes) {
  const AttackTree t = parse_tree(kFig1);
  EXPECT_EQ(t.node_count(), 5u);
  EXPECT_EQ(t.refinement(), Refinement::kOr);
  EXPECT_EQ(root_label(t), "steal money");
  ASSERT_EQ(t.children().size(), 2u);
  EXPECT_EQ(t.children()[0].refinement(), Refinement::kAnd);
  EXPECT_TRUE(t.children()[1].is_leaf());
}

TEST(ParseTree, SingleLeaf) {
  const AttackTree t = parse_tree(R"("hack account")");
  EXPECT_TRUE(t.is_leaf());
  EXPECT_EQ(t.label(), "hack account");
}

TEST(ParseTree, CommentsAndEscapes) {
  const AttackTree t = parse_tree("# goal\nAND(\"a \\\"q\\\"\" # first\n \"b\")@\"r\"");
  EXPECT_EQ(t.children()[0].label(), "a \"q\"");
}

TEST(ParseTree, EmptyChildrenReportsPosition) {
  try {
    parse_tree("\n  OR()@\"x\"");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 3);
  }
}

TEST(ParseTree, SyntaxErrors) {
  EXPECT_THROW(parse_tree("OR(\"a\")"), ParseError);
  EXPECT_THROW(parse_tree("XOR(\"a\")@\"b\""), ParseError);
  EXPECT_THROW(parse_tree("\"a\" \"b\""), ParseError);
  EXPECT_THROW(parse_tree("\"unterminated"), ParseError);
  EXPECT_THROW(parse_tree("{\"label\": 3}"), ParseError);
  EXPECT_THROW(parse_tree("{\"label\": \"r\", \"refinement\": \"OR\", \"children\": []}"),
               ParseError);
}

TEST(ParseTree, JsonForm) {
  const AttackTree a = parse_tree(kFig1);
  const AttackTree b = parse_tree(tree_to_json(a).dump());
  EXPECT_EQ(a, b);
}

TEST(LabelsOf, SubtreeOfFig1) {
  const AttackTree t = parse_tree(kFig1);
  EXPECT_EQ(labels_of(t.children()[0]),
            (LabelSet{"steal card", "shoulder surf PIN", "get money at ATM"}));
  EXPECT_EQ(root_label(t.children()[0]), "get money at ATM");
  EXPECT_EQ(labels_of(AttackTree::leaf("x")), LabelSet{"x"});
}

TEST(CheckUniqueLabels, Duplicates) {
  const AttackTree t = parse_tree(R"(OR("a" "a")@"r")");
  const UniquenessReport r = check_unique_labels(t);
  EXPECT_FALSE(r.unique);
  EXPECT_EQ(r.duplicates, std::vector<std::string>{"a"});
  EXPECT_TRUE(check_unique_labels(AttackTree::leaf("x")).unique);
  EXPECT_THROW(require_unique_labels(t), PreconditionError);
}

AttackTree random_tree(std::mt19937& rng, int depth, int& counter, bool allow_dupes) {
  std::uniform_int_distribution<int> kind(0, depth > 0 ? 2 : 0);
  std::uniform_int_distribution<int> arity(1, 4);
  const int k = kind(rng);
  const std::string label =
      allow_dupes ? "n" + std::to_string(counter++ % 5) : "n \"" + std::to_string(counter++) + "\\";
  if (k == 0) return AttackTree::leaf(label);
  std::vector<AttackTree> children;
  const int n = arity(rng);
  for (int i = 0; i < n; ++i) children.push_back(random_tree(rng, depth - 1, counter, allow_dupes));
  return AttackTree::refined(k == 1 ? Refinement::kOr : Refinement::kAnd, label,
                             std::move(children));
}

TEST(TreeProperties, RoundTripAndLabelCounts) {
  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    int counter = 0;
    const AttackTree t = random_tree(rng, 4, counter, i % 2 == 1);
    EXPECT_EQ(parse_tree(serialize_tree(t)), t);
    EXPECT_EQ(parse_tree(serialize_tree(t, -1)), t);
    EXPECT_EQ(tree_from_json(tree_to_json(t)), t);

    const LabelSet labels = labels_of(t);
    EXPECT_LE(labels.size(), t.node_count());
    EXPECT_EQ(labels.size() == t.node_count(), check_unique_labels(t).unique);

    LabelSet recursive{t.label()};
    for (const AttackTree& c : t.children()) {
      const LabelSet sub = labels_of(c);
      recursive.insert(sub.begin(), sub.end());
    }
    EXPECT_EQ(recursive, labels);
  }
}

}  // namespace
}  // namespace atdecor
