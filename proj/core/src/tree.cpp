#include "atdecor/tree.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "atdecor/errors.hpp"
#include "lexer.hpp"

namespace atdecor {

using detail::Tok;
using detail::Token;

std::string_view to_string(Refinement refinement) {
  switch (refinement) {
    case Refinement::kLeaf: return "LEAF";
    case Refinement::kOr: return "OR";
    case Refinement::kAnd: return "AND";
  }
  return "?";
}

AttackTree::AttackTree(Refinement refinement, std::string label,
                       std::vector<AttackTree> children)
    : refinement_(refinement), label_(std::move(label)), children_(std::move(children)) {}

AttackTree AttackTree::leaf(std::string label) {
  return AttackTree(Refinement::kLeaf, std::move(label), {});
}

AttackTree AttackTree::refined(Refinement refinement, std::string label,
                               std::vector<AttackTree> children) {
  if (refinement == Refinement::kLeaf) {
    if (!children.empty()) throw PreconditionError("a LEAF node cannot have children");
    return leaf(std::move(label));
  }
  if (children.empty()) {
    throw PreconditionError("refined node \"" + label + "\" needs at least one child");
  }
  return AttackTree(refinement, std::move(label), std::move(children));
}

std::size_t AttackTree::node_count() const {
  std::size_t n = 1;
  for (const AttackTree& child : children_) n += child.node_count();
  return n;
}

LabelSet labels_of(const AttackTree& tree) {
  LabelSet out;
  for_each_node(tree, [&](const AttackTree& node) { out.insert(node.label()); });
  return out;
}

LabelSet leaf_labels_of(const AttackTree& tree) {
  LabelSet out;
  for_each_node(tree, [&](const AttackTree& node) {
    if (node.is_leaf()) out.insert(node.label());
  });
  return out;
}

const std::string& root_label(const AttackTree& tree) { return tree.label(); }

UniquenessReport check_unique_labels(const AttackTree& tree) {
  std::map<std::string, int> counts;
  for_each_node(tree, [&](const AttackTree& node) { ++counts[node.label()]; });
  UniquenessReport report;
  for (const auto& [label, count] : counts) {
    if (count > 1) report.duplicates.push_back(label);
  }
  report.unique = report.duplicates.empty();
  return report;
}

void require_unique_labels(const AttackTree& tree) {
  const UniquenessReport report = check_unique_labels(tree);
  if (report.unique) return;
  std::string msg = "tree has duplicate labels:";
  for (const std::string& d : report.duplicates) msg += " " + detail::quote(d);
  throw PreconditionError(msg);
}

// ---------------------------------------------------------------------------
// DSL

namespace {

class TreeParser {
 public:
  explicit TreeParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  AttackTree parse_document() {
    AttackTree tree = parse_node();
    if (peek().kind != Tok::kEnd) fail("expected end of input after the root node");
    return tree;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().column);
  }

  const Token& expect(Tok kind, const char* context) {
    if (peek().kind != kind) {
      fail(std::string("expected ") + std::string(detail::describe(kind)) + " " + context +
           ", found " + std::string(detail::describe(peek().kind)));
    }
    return take();
  }

  AttackTree parse_node() {
    const Token& tok = peek();
    if (tok.kind == Tok::kString) return AttackTree::leaf(take().text);
    if (tok.kind != Tok::kIdent || (tok.text != "OR" && tok.text != "AND")) {
      fail("expected a quoted label, OR or AND");
    }
    const Token head = take();
    const Refinement refinement = head.text == "OR" ? Refinement::kOr : Refinement::kAnd;
    expect(Tok::kLParen, "after refinement keyword");
    std::vector<AttackTree> children;
    while (peek().kind != Tok::kRParen) {
      if (peek().kind == Tok::kEnd) fail("unterminated child list");
      children.push_back(parse_node());
      if (peek().kind == Tok::kComma) take();
    }
    if (children.empty()) {
      throw ParseError(head.text + " node has no children", head.line, head.column);
    }
    take();  // ')'
    expect(Tok::kAt, "before the node label");
    const Token& label = expect(Tok::kString, "as node label");
    return AttackTree::refined(refinement, label.text, std::move(children));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void write_dsl(const AttackTree& tree, int indent, int depth, std::string& out) {
  if (tree.is_leaf()) {
    out += detail::quote(tree.label());
    return;
  }
  out += to_string(tree.refinement());
  out += "(";
  const bool multiline = indent >= 0;
  for (std::size_t i = 0; i < tree.children().size(); ++i) {
    if (multiline) {
      out += "\n";
      out.append(static_cast<std::size_t>((depth + 1) * indent), ' ');
    } else if (i > 0) {
      out += " ";
    }
    write_dsl(tree.children()[i], indent, depth + 1, out);
  }
  if (multiline) {
    out += "\n";
    out.append(static_cast<std::size_t>(depth * indent), ' ');
  }
  out += ")@";
  out += detail::quote(tree.label());
}

}  // namespace

AttackTree parse_tree_dsl(std::string_view source) {
  return TreeParser(detail::tokenize(source)).parse_document();
}

AttackTree parse_tree(std::string_view source) {
  const auto first = source.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && source[first] == '{') return parse_tree_json(source);
  return parse_tree_dsl(source);
}

std::string serialize_tree(const AttackTree& tree, int indent) {
  std::string out;
  write_dsl(tree, indent, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json tree_to_json(const AttackTree& tree) {
  nlohmann::json node;
  node["label"] = tree.label();
  node["refinement"] = std::string(to_string(tree.refinement()));
  nlohmann::json children = nlohmann::json::array();
  for (const AttackTree& child : tree.children()) children.push_back(tree_to_json(child));
  node["children"] = std::move(children);
  return node;
}

AttackTree tree_from_json(const nlohmann::json& node) {
  if (!node.is_object()) throw ParseError("tree node must be a JSON object", 0, 0);
  const auto label = node.find("label");
  if (label == node.end() || !label->is_string()) {
    throw ParseError("tree node needs a string \"label\"", 0, 0);
  }
  const auto kind = node.find("refinement");
  if (kind == node.end() || !kind->is_string()) {
    throw ParseError("tree node \"" + label->get<std::string>() +
                         "\" needs a \"refinement\" of LEAF, OR or AND",
                     0, 0);
  }
  const std::string k = kind->get<std::string>();
  Refinement refinement;
  if (k == "LEAF") {
    refinement = Refinement::kLeaf;
  } else if (k == "OR") {
    refinement = Refinement::kOr;
  } else if (k == "AND") {
    refinement = Refinement::kAnd;
  } else {
    throw ParseError("unknown refinement \"" + k + "\"", 0, 0);
  }
  std::vector<AttackTree> children;
  if (const auto c = node.find("children"); c != node.end()) {
    if (!c->is_array()) throw ParseError("\"children\" must be an array", 0, 0);
    for (const auto& child : *c) children.push_back(tree_from_json(child));
  }
  if (refinement == Refinement::kLeaf && !children.empty()) {
    throw ParseError("LEAF \"" + label->get<std::string>() + "\" has children", 0, 0);
  }
  if (refinement != Refinement::kLeaf && children.empty()) {
    throw ParseError(k + " node \"" + label->get<std::string>() + "\" has no children", 0, 0);
  }
  return AttackTree::refined(refinement, label->get<std::string>(), std::move(children));
}

AttackTree parse_tree_json(std::string_view source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports a byte offset; translate it to line/column.
    const std::size_t offset = std::min<std::size_t>(e.byte, source.size());
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i + 1 < offset; ++i) {
      if (source[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("invalid JSON tree", line, column);
  }
  return tree_from_json(doc);
}

}  // namespace atdecor
