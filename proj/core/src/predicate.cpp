#include "atdecor/predicate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "atdecor/errors.hpp"
#include "lexer.hpp"

namespace atdecor {

using detail::Tok;
using detail::Token;

Expr Expr::constant(double v) {
  Expr e;
  e.op = Op::kConst;
  e.value = v;
  return e;
}

Expr Expr::ref(std::string label) {
  Expr e;
  e.op = Op::kLabel;
  e.label = std::move(label);
  return e;
}

Expr Expr::apply(Op op, std::vector<Expr> args) {
  Expr e;
  e.op = op;
  e.args = std::move(args);
  return e;
}

Formula Formula::compare(Expr lhs, Cmp cmp, Expr rhs) {
  Formula f;
  f.connective = Connective::kCompare;
  f.cmp = cmp;
  f.lhs = std::move(lhs);
  f.rhs = std::move(rhs);
  return f;
}

Formula Formula::all_of(std::vector<Formula> operands) {
  Formula f;
  f.connective = Connective::kAnd;
  f.operands = std::move(operands);
  return f;
}

Formula Formula::any_of(std::vector<Formula> operands) {
  Formula f;
  f.connective = Connective::kOr;
  f.operands = std::move(operands);
  return f;
}

Formula Formula::negate(Formula operand) {
  Formula f;
  f.connective = Connective::kNot;
  f.operands.push_back(std::move(operand));
  return f;
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kHardStructural: return "structural";
    case Provenance::kSoftHistorical: return "historical";
    case Provenance::kSoftDomainKnowledge: return "knowledge";
  }
  return "?";
}

const Predicate* ConstraintSet::find(std::string_view id) const {
  for (const Predicate& p : hard) {
    if (p.id == id) return &p;
  }
  for (const Predicate& p : soft) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

void ConstraintSet::append(const std::vector<Predicate>& predicates) {
  for (const Predicate& p : predicates) {
    if (find(p.id) != nullptr) throw PreconditionError("duplicate predicate id \"" + p.id + "\"");
    (p.is_hard() ? hard : soft).push_back(p);
  }
}

ConstraintSet ConstraintSet::with_soft(const std::vector<std::string>& soft_ids) const {
  ConstraintSet out;
  out.hard = hard;
  const std::set<std::string> keep(soft_ids.begin(), soft_ids.end());
  for (const Predicate& p : soft) {
    if (keep.count(p.id) != 0) out.soft.push_back(p);
  }
  if (out.soft.size() != keep.size()) {
    for (const std::string& id : soft_ids) {
      bool found = false;
      for (const Predicate& p : soft) found = found || p.id == id;
      if (!found) throw PreconditionError("unknown soft predicate id \"" + id + "\"");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericError("cannot format number");
  return std::string(buf, ptr);
}

int precedence(const Expr& e) {
  switch (e.op) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul: return 2;
    case Op::kNeg: return 3;
    case Op::kConst: return e.value < 0 ? 3 : 4;
    default: return 4;
  }
}

std::string_view function_name(Op op) {
  switch (op) {
    case Op::kMin: return "min";
    case Op::kMax: return "max";
    case Op::kNoisyOr: return "or_indep";
    default: return "";
  }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool parens, std::string& out) {
  if (parens) out += "(";
  print(e, out);
  if (parens) out += ")";
}

void print(const Expr& e, std::string& out) {
  switch (e.op) {
    case Op::kConst:
      out += format_number(e.value);
      return;
    case Op::kLabel:
      out += detail::quote(e.label);
      return;
    case Op::kAdd:
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        const Expr& a = e.args[i];
        if (i > 0) out += " + ";
        const bool parens = i == 0 ? a.op == Op::kAdd : precedence(a) <= 1;
        print_wrapped(a, parens, out);
      }
      return;
    case Op::kSub:
      print_wrapped(e.args[0], false, out);
      out += " - ";
      print_wrapped(e.args[1], precedence(e.args[1]) <= 1, out);
      return;
    case Op::kMul:
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        const Expr& a = e.args[i];
        if (i > 0) out += " * ";
        const bool parens = i == 0 ? (precedence(a) < 2 || a.op == Op::kMul) : precedence(a) <= 2;
        print_wrapped(a, parens, out);
      }
      return;
    case Op::kNeg: {
      const Expr& a = e.args[0];
      out += "-";
      const bool bare = a.op == Op::kLabel || a.op == Op::kMin || a.op == Op::kMax ||
                        a.op == Op::kNoisyOr;
      print_wrapped(a, !bare, out);
      return;
    }
    case Op::kMin:
    case Op::kMax:
    case Op::kNoisyOr:
      out += function_name(e.op);
      out += "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i > 0) out += ", ";
        print(e.args[i], out);
      }
      out += ")";
      return;
  }
}

std::string_view cmp_text(Cmp cmp) {
  switch (cmp) {
    case Cmp::kEq: return "=";
    case Cmp::kLe: return "<=";
    case Cmp::kGe: return ">=";
  }
  return "?";
}

void print(const Formula& f, std::string& out) {
  auto compound = [](const Formula& g) {
    return g.connective == Connective::kAnd || g.connective == Connective::kOr;
  };
  switch (f.connective) {
    case Connective::kCompare:
      print(f.lhs, out);
      out += " ";
      out += cmp_text(f.cmp);
      out += " ";
      print(f.rhs, out);
      return;
    case Connective::kAnd:
    case Connective::kOr: {
      const char* sep = f.connective == Connective::kAnd ? " and " : " or ";
      for (std::size_t i = 0; i < f.operands.size(); ++i) {
        if (i > 0) out += sep;
        const bool parens = compound(f.operands[i]);
        if (parens) out += "(";
        print(f.operands[i], out);
        if (parens) out += ")";
      }
      return;
    }
    case Connective::kNot: {
      out += "not ";
      const bool parens = compound(f.operands[0]);
      if (parens) out += "(";
      print(f.operands[0], out);
      if (parens) out += ")";
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& expr) {
  std::string out;
  print(expr, out);
  return out;
}

std::string to_string(const Formula& formula) {
  std::string out;
  print(formula, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class FormulaParser {
 public:
  FormulaParser(const std::vector<Token>& toks, std::size_t begin) : toks_(toks), pos_(begin) {}

  Formula parse_all() {
    Formula f = parse_disjunction();
    if (peek().kind != Tok::kEnd) fail("unexpected " + std::string(detail::describe(peek().kind)));
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& take() { return toks_[pos_++]; }
  bool at_keyword(std::string_view word) const {
    return peek().kind == Tok::kIdent && peek().text == word;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().column);
  }

  void expect(Tok kind, const char* context) {
    if (peek().kind != kind) {
      fail(std::string("expected ") + std::string(detail::describe(kind)) + " " + context +
           ", found " + std::string(detail::describe(peek().kind)));
    }
    take();
  }

  Formula parse_disjunction() {
    Formula f = parse_conjunction();
    bool chained = false;
    while (at_keyword("or")) {
      take();
      Formula rhs = parse_conjunction();
      if (!chained) {
        f = Formula::any_of({std::move(f)});
        chained = true;
      }
      f.operands.push_back(std::move(rhs));
    }
    return f;
  }

  Formula parse_conjunction() {
    Formula f = parse_unary();
    bool chained = false;
    while (at_keyword("and")) {
      take();
      Formula rhs = parse_unary();
      if (!chained) {
        f = Formula::all_of({std::move(f)});
        chained = true;
      }
      f.operands.push_back(std::move(rhs));
    }
    return f;
  }

  Formula parse_unary() {
    if (at_keyword("not")) {
      take();
      return Formula::negate(parse_unary());
    }
    const std::size_t start = pos_;
    try {
      return parse_comparison();
    } catch (const ParseError& comparison_error) {
      if (toks_[start].kind != Tok::kLParen) throw;
      const std::size_t comparison_reach = pos_;
      pos_ = start;
      try {
        take();
        Formula inner = parse_disjunction();
        expect(Tok::kRParen, "to close the group");
        return inner;
      } catch (const ParseError&) {
        if (comparison_reach >= pos_) throw comparison_error;
        throw;
      }
    }
  }

  Formula parse_comparison() {
    Expr lhs = parse_additive();
    Cmp cmp;
    switch (peek().kind) {
      case Tok::kEq: cmp = Cmp::kEq; break;
      case Tok::kLe: cmp = Cmp::kLe; break;
      case Tok::kGe: cmp = Cmp::kGe; break;
      default: fail("expected a comparison (=, <=, >=)");
    }
    take();
    Expr rhs = parse_additive();
    return Formula::compare(std::move(lhs), cmp, std::move(rhs));
  }

  Expr parse_additive() {
    Expr e = parse_multiplicative();
    bool chained = false;
    while (peek().kind == Tok::kPlus || peek().kind == Tok::kMinus) {
      const bool plus = take().kind == Tok::kPlus;
      Expr rhs = parse_multiplicative();
      if (plus) {
        if (!chained) {
          e = Expr::apply(Op::kAdd, {std::move(e)});
          chained = true;
        }
        e.args.push_back(std::move(rhs));
      } else {
        e = Expr::apply(Op::kSub, {std::move(e), std::move(rhs)});
        chained = false;
      }
    }
    return e;
  }

  Expr parse_multiplicative() {
    Expr e = parse_signed();
    bool chained = false;
    while (peek().kind == Tok::kStar) {
      take();
      Expr rhs = parse_signed();
      if (!chained) {
        e = Expr::apply(Op::kMul, {std::move(e)});
        chained = true;
      }
      e.args.push_back(std::move(rhs));
    }
    return e;
  }

  Expr parse_signed() {
    if (peek().kind == Tok::kMinus) {
      take();
      if (peek().kind == Tok::kNumber) return Expr::constant(-take().number);
      return Expr::apply(Op::kNeg, {parse_signed()});
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::kNumber: return Expr::constant(take().number);
      case Tok::kString: return Expr::ref(take().text);
      case Tok::kLParen: {
        take();
        Expr inner = parse_additive();
        expect(Tok::kRParen, "to close the parenthesis");
        return inner;
      }
      case Tok::kIdent: {
        Op op;
        if (tok.text == "min") {
          op = Op::kMin;
        } else if (tok.text == "max") {
          op = Op::kMax;
        } else if (tok.text == "or_indep") {
          op = Op::kNoisyOr;
        } else if (peek(1).kind == Tok::kLParen) {
          fail("unknown function symbol '" + tok.text + "'");
        } else {
          fail("unexpected identifier '" + tok.text + "' (labels must be double-quoted)");
        }
        take();
        expect(Tok::kLParen, "after function name");
        std::vector<Expr> args;
        if (peek().kind == Tok::kRParen) fail("function needs at least one argument");
        args.push_back(parse_additive());
        while (peek().kind == Tok::kComma) {
          take();
          args.push_back(parse_additive());
        }
        expect(Tok::kRParen, "to close the argument list");
        return Expr::apply(op, std::move(args));
      }
      default:
        fail("expected a number, quoted label, function or '('");
    }
  }

  const std::vector<Token>& toks_;
  std::size_t pos_;
};

}  // namespace

Formula parse_formula(std::string_view source) {
  const std::vector<Token> toks = detail::tokenize(source);
  if (toks.front().kind == Tok::kEnd) throw ParseError("empty predicate", 1, 1);
  return FormulaParser(toks, 0).parse_all();
}

Predicate parse_predicate(std::string_view source, std::string id, Provenance provenance) {
  return Predicate{std::move(id), provenance, parse_formula(source)};
}

std::vector<Predicate> parse_predicate_file(std::string_view source,
                                            const std::string& id_prefix) {
  std::vector<Predicate> out;
  std::size_t start = 0;
  int line_no = 0;
  int ordinal = 0;
  while (start <= source.size()) {
    std::size_t end = source.find('\n', start);
    if (end == std::string_view::npos) end = source.size();
    const std::string_view line = source.substr(start, end - start);
    ++line_no;
    start = end + 1;

    const std::vector<Token> toks = detail::tokenize(line, line_no - 1);
    if (toks.front().kind == Tok::kEnd) {
      if (end == source.size()) break;
      continue;
    }
    ++ordinal;
    std::size_t pos = 0;
    auto fail = [&](const std::string& msg) -> void {
      throw ParseError(msg, toks[pos].line, toks[pos].column);
    };
    if (toks[pos].kind != Tok::kIdent || (toks[pos].text != "hard" && toks[pos].text != "soft")) {
      fail("predicate line must start with 'hard:' or 'soft:'");
    }
    const bool hard = toks[pos].text == "hard";
    ++pos;
    Provenance provenance =
        hard ? Provenance::kHardStructural : Provenance::kSoftDomainKnowledge;
    if (toks[pos].kind == Tok::kLParen) {
      ++pos;
      if (toks[pos].kind != Tok::kIdent) fail("expected a provenance name");
      const std::string& name = toks[pos].text;
      if (hard && name == "structural") {
        provenance = Provenance::kHardStructural;
      } else if (!hard && name == "historical") {
        provenance = Provenance::kSoftHistorical;
      } else if (!hard && (name == "knowledge" || name == "domain-knowledge")) {
        provenance = Provenance::kSoftDomainKnowledge;
      } else {
        fail("unknown provenance '" + name + "' for a " + (hard ? "hard" : "soft") + " predicate");
      }
      ++pos;
      if (toks[pos].kind != Tok::kRParen) fail("expected ')' after provenance");
      ++pos;
    }
    std::string id;
    if (toks[pos].kind == Tok::kLBracket) {
      ++pos;
      while (toks[pos].kind != Tok::kRBracket) {
        if (toks[pos].kind == Tok::kEnd) fail("unterminated predicate id");
        id += toks[pos].text;
        ++pos;
      }
      ++pos;
      if (id.empty()) fail("empty predicate id");
    } else {
      id = id_prefix + "." + std::to_string(ordinal);
    }
    if (toks[pos].kind != Tok::kColon) fail("expected ':' before the predicate");
    ++pos;
    if (toks[pos].kind == Tok::kEnd) fail("missing predicate after ':'");
    out.push_back(Predicate{std::move(id), provenance, FormulaParser(toks, pos).parse_all()});
    if (end == source.size()) break;
  }
  return out;
}

std::string to_line(const Predicate& predicate) {
  std::string out = predicate.is_hard() ? "hard" : "soft";
  if (!predicate.is_hard()) {
    out += predicate.provenance == Provenance::kSoftHistorical ? "(historical)" : "(knowledge)";
  }
  out += "[" + predicate.id + "]: ";
  out += to_string(predicate.formula);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kConst: return "const";
    case Op::kLabel: return "label";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kNeg: return "neg";
    case Op::kMin: return "min";
    case Op::kMax: return "max";
    case Op::kNoisyOr: return "or_indep";
  }
  return "?";
}

[[noreturn]] void json_fail(const std::string& msg) { throw ParseError(msg, 0, 0); }

}  // namespace

nlohmann::json expr_to_json(const Expr& expr) {
  if (expr.op == Op::kConst) return {{"const", expr.value}};
  if (expr.op == Op::kLabel) return {{"label", expr.label}};
  nlohmann::json args = nlohmann::json::array();
  for (const Expr& a : expr.args) args.push_back(expr_to_json(a));
  return {{"op", std::string(op_name(expr.op))}, {"args", std::move(args)}};
}

Expr expr_from_json(const nlohmann::json& j) {
  if (!j.is_object()) json_fail("expression must be an object");
  if (auto c = j.find("const"); c != j.end()) {
    if (!c->is_number()) json_fail("\"const\" must be a number");
    return Expr::constant(c->get<double>());
  }
  if (auto l = j.find("label"); l != j.end()) {
    if (!l->is_string()) json_fail("\"label\" must be a string");
    return Expr::ref(l->get<std::string>());
  }
  auto op = j.find("op");
  auto args = j.find("args");
  if (op == j.end() || !op->is_string() || args == j.end() || !args->is_array()) {
    json_fail("expression needs \"const\", \"label\" or \"op\"+\"args\"");
  }
  const std::string name = op->get<std::string>();
  static const std::map<std::string, Op> kOps = {
      {"add", Op::kAdd}, {"sub", Op::kSub}, {"mul", Op::kMul},          {"neg", Op::kNeg},
      {"min", Op::kMin}, {"max", Op::kMax}, {"or_indep", Op::kNoisyOr},
  };
  const auto it = kOps.find(name);
  if (it == kOps.end()) json_fail("unknown function symbol '" + name + "'");
  std::vector<Expr> parsed;
  for (const auto& a : *args) parsed.push_back(expr_from_json(a));
  const std::size_t n = parsed.size();
  if ((it->second == Op::kSub && n != 2) || (it->second == Op::kNeg && n != 1) || n == 0) {
    json_fail("wrong number of arguments for '" + name + "'");
  }
  return Expr::apply(it->second, std::move(parsed));
}

nlohmann::json formula_to_json(const Formula& formula) {
  switch (formula.connective) {
    case Connective::kCompare:
      return {{"cmp", std::string(cmp_text(formula.cmp))},
              {"lhs", expr_to_json(formula.lhs)},
              {"rhs", expr_to_json(formula.rhs)}};
    case Connective::kAnd:
    case Connective::kOr: {
      nlohmann::json ops = nlohmann::json::array();
      for (const Formula& f : formula.operands) ops.push_back(formula_to_json(f));
      return {{formula.connective == Connective::kAnd ? "and" : "or", std::move(ops)}};
    }
    case Connective::kNot:
      return {{"not", formula_to_json(formula.operands[0])}};
  }
  return {};
}

Formula formula_from_json(const nlohmann::json& j) {
  if (!j.is_object()) json_fail("formula must be an object");
  if (auto c = j.find("cmp"); c != j.end()) {
    const std::string text = c->is_string() ? c->get<std::string>() : "";
    Cmp cmp;
    if (text == "=" || text == "==") {
      cmp = Cmp::kEq;
    } else if (text == "<=") {
      cmp = Cmp::kLe;
    } else if (text == ">=") {
      cmp = Cmp::kGe;
    } else {
      json_fail("unknown comparison '" + text + "'");
    }
    if (!j.contains("lhs") || !j.contains("rhs")) json_fail("comparison needs lhs and rhs");
    return Formula::compare(expr_from_json(j.at("lhs")), cmp, expr_from_json(j.at("rhs")));
  }
  for (const char* key : {"and", "or"}) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_array() || it->empty()) json_fail(std::string("\"") + key + "\" needs operands");
      std::vector<Formula> ops;
      for (const auto& f : *it) ops.push_back(formula_from_json(f));
      return std::string(key) == "and" ? Formula::all_of(std::move(ops))
                                       : Formula::any_of(std::move(ops));
    }
  }
  if (auto n = j.find("not"); n != j.end()) return Formula::negate(formula_from_json(*n));
  json_fail("formula needs \"cmp\", \"and\", \"or\" or \"not\"");
}

nlohmann::json predicate_to_json(const Predicate& predicate) {
  return {{"id", predicate.id},
          {"kind", predicate.is_hard() ? "hard" : "soft"},
          {"provenance", std::string(to_string(predicate.provenance))},
          {"text", to_string(predicate.formula)},
          {"formula", formula_to_json(predicate.formula)}};
}

Predicate predicate_from_json(const nlohmann::json& j) {
  if (!j.is_object()) json_fail("predicate must be an object");
  Predicate p;
  p.id = j.value("id", std::string());
  if (p.id.empty()) json_fail("predicate needs an \"id\"");
  const std::string kind = j.value("kind", std::string("soft"));
  const std::string provenance = j.value("provenance", std::string());
  if (kind == "hard") {
    p.provenance = Provenance::kHardStructural;
  } else if (kind == "soft") {
    p.provenance = provenance == "historical" ? Provenance::kSoftHistorical
                                              : Provenance::kSoftDomainKnowledge;
  } else {
    json_fail("predicate kind must be \"hard\" or \"soft\"");
  }
  if (auto f = j.find("formula"); f != j.end()) {
    p.formula = formula_from_json(*f);
  } else if (auto t = j.find("text"); t != j.end() && t->is_string()) {
    p.formula = parse_formula(t->get<std::string>());
  } else {
    json_fail("predicate \"" + p.id + "\" needs \"formula\" or \"text\"");
  }
  return p;
}

std::vector<Predicate> parse_predicate_json(std::string_view source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0, 0);
  }
  const nlohmann::json* list = &doc;
  if (doc.is_object() && doc.contains("predicates")) list = &doc.at("predicates");
  if (!list->is_array()) json_fail("expected an array of predicates");
  std::vector<Predicate> out;
  for (const auto& p : *list) out.push_back(predicate_from_json(p));
  return out;
}

// ---------------------------------------------------------------------------
// Semantics

namespace {

void collect(const Expr& e, LabelSet& out) {
  if (e.op == Op::kLabel) out.insert(e.label);
  for (const Expr& a : e.args) collect(a, out);
}

void collect(const Formula& f, LabelSet& out) {
  if (f.connective == Connective::kCompare) {
    collect(f.lhs, out);
    collect(f.rhs, out);
  }
  for (const Formula& g : f.operands) collect(g, out);
}

}  // namespace

LabelSet referenced_labels(const Expr& expr) {
  LabelSet out;
  collect(expr, out);
  return out;
}

LabelSet referenced_labels(const Formula& formula) {
  LabelSet out;
  collect(formula, out);
  return out;
}

double evaluate(const Expr& expr, const Valuation& valuation) {
  switch (expr.op) {
    case Op::kConst: return expr.value;
    case Op::kLabel: {
      const auto it = valuation.find(expr.label);
      if (it == valuation.end()) throw UnboundLabelError(expr.label);
      return it->second;
    }
    case Op::kAdd: {
      double s = 0.0;
      for (const Expr& a : expr.args) s += evaluate(a, valuation);
      return s;
    }
    case Op::kSub: return evaluate(expr.args[0], valuation) - evaluate(expr.args[1], valuation);
    case Op::kMul: {
      double p = 1.0;
      for (const Expr& a : expr.args) p *= evaluate(a, valuation);
      return p;
    }
    case Op::kNeg: return -evaluate(expr.args[0], valuation);
    case Op::kMin: {
      double m = evaluate(expr.args[0], valuation);
      for (std::size_t i = 1; i < expr.args.size(); ++i) {
        m = std::min(m, evaluate(expr.args[i], valuation));
      }
      return m;
    }
    case Op::kMax: {
      double m = evaluate(expr.args[0], valuation);
      for (std::size_t i = 1; i < expr.args.size(); ++i) {
        m = std::max(m, evaluate(expr.args[i], valuation));
      }
      return m;
    }
    case Op::kNoisyOr: {
      double miss = 1.0;
      for (const Expr& a : expr.args) miss *= 1.0 - evaluate(a, valuation);
      return 1.0 - miss;
    }
  }
  return 0.0;
}

bool holds(const Formula& formula, const Valuation& valuation) {
  switch (formula.connective) {
    case Connective::kCompare: {
      const double l = evaluate(formula.lhs, valuation);
      const double r = evaluate(formula.rhs, valuation);
      const double slack = kHoldsTolerance * std::max({1.0, std::abs(l), std::abs(r)});
      switch (formula.cmp) {
        case Cmp::kEq: return std::abs(l - r) <= slack;
        case Cmp::kLe: return l <= r + slack;
        case Cmp::kGe: return l + slack >= r;
      }
      return false;
    }
    case Connective::kAnd:
      return std::all_of(formula.operands.begin(), formula.operands.end(),
                         [&](const Formula& f) { return holds(f, valuation); });
    case Connective::kOr:
      return std::any_of(formula.operands.begin(), formula.operands.end(),
                         [&](const Formula& f) { return holds(f, valuation); });
    case Connective::kNot:
      return !holds(formula.operands[0], valuation);
  }
  return false;
}

bool holds(const Predicate& predicate, const Valuation& valuation) {
  return holds(predicate.formula, valuation);
}

std::optional<Valuation> find_entailment_counterexample(
    const Formula& p, const Formula& q,
    const std::map<std::string, std::pair<double, double>>& box, int samples,
    unsigned long long seed) {
  std::mt19937_64 rng(seed);
  Valuation v;
  for (int s = 0; s < samples; ++s) {
    for (const auto& [label, range] : box) {
      std::uniform_real_distribution<double> dist(range.first, range.second);
      v[label] = dist(rng);
    }
    if (holds(p, v) && !holds(q, v)) return v;
  }
  return std::nullopt;
}

}  // namespace atdecor
