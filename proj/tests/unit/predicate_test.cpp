#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "atdecor/errors.hpp"
#include "atdecor/predicate.hpp"

namespace atdecor {
namespace {

TEST(ParsePredicate, ComparisonWithConstant) {
  const Formula f = parse_formula(R"("hack account" <= 0.01)");
  EXPECT_EQ(f, Formula::compare(Expr::ref("hack account"), Cmp::kLe, Expr::constant(0.01)));
}

TEST(ParsePredicate, EqualityOverMin) {
  const Formula f = parse_formula(R"("steal money" = min("get money at ATM","hack account"))");
  EXPECT_EQ(f.cmp, Cmp::kEq);
  EXPECT_EQ(f.rhs.op, Op::kMin);
  EXPECT_EQ(f.rhs.args.size(), 2u);
}

TEST(ParsePredicate, LabelPlusConstant) {
  const Formula f = parse_formula(R"("take card" <= "card skimming" + 0)");
  EXPECT_EQ(f.rhs, Expr::apply(Op::kAdd, {Expr::ref("card skimming"), Expr::constant(0)}));
}

TEST(ParsePredicate, PrecedenceAndConnectives) {
  const Formula f = parse_formula(R"(not ("a" <= 1 or "b" >= 2) and ("a" + 1) * 2 = 3 - -1)");
  ASSERT_EQ(f.connective, Connective::kAnd);
  EXPECT_EQ(f.operands[0].connective, Connective::kNot);
  EXPECT_EQ(f.operands[0].operands[0].connective, Connective::kOr);
  const Formula& cmp = f.operands[1];
  EXPECT_EQ(cmp.lhs.op, Op::kMul);
  EXPECT_EQ(cmp.lhs.args[0].op, Op::kAdd);
  EXPECT_EQ(cmp.rhs, Expr::apply(Op::kSub, {Expr::constant(3), Expr::constant(-1)}));
}

TEST(ParsePredicate, Errors) {
  EXPECT_THROW(parse_formula(R"("a" <= foo("b"))"), ParseError);
  EXPECT_THROW(parse_formula(R"(a <= 1)"), ParseError);
  EXPECT_THROW(parse_formula(R"("a" < 1)"), ParseError);
  EXPECT_THROW(parse_formula(R"("a" + 1)"), ParseError);
  EXPECT_THROW(parse_formula(R"(("a" <= 1)"), ParseError);
  EXPECT_THROW(parse_formula(""), ParseError);
  try {
    parse_formula(R"("a" <= sqrt("b"))");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.detail().find("unknown function"), std::string::npos);
    EXPECT_EQ(e.column(), 8);
  }
}

TEST(PredicateFile, KindsIdsAndComments) {
  const auto preds = parse_predicate_file(
      "# header\n"
      "hard: \"r\" = \"a\" * \"b\"\n"
      "\n"
      "soft(historical)[hist.r]: \"r\" = 0.5   # trailing\n"
      "soft: \"a\" <= \"b\"\n"
      "soft(knowledge)[k-1]: \"a\" >= 0\n",
      "f");
  ASSERT_EQ(preds.size(), 4u);
  EXPECT_EQ(preds[0].id, "f.1");
  EXPECT_TRUE(preds[0].is_hard());
  EXPECT_EQ(preds[1].id, "hist.r");
  EXPECT_EQ(preds[1].provenance, Provenance::kSoftHistorical);
  EXPECT_EQ(preds[2].id, "f.3");
  EXPECT_EQ(preds[2].provenance, Provenance::kSoftDomainKnowledge);
  EXPECT_EQ(preds[3].id, "k-1");
  for (const Predicate& p : preds) {
    EXPECT_EQ(parse_predicate_file(to_line(p)).front(), p);
  }
}

TEST(PredicateFile, ErrorsCarryLine) {
  try {
    parse_predicate_file("hard: \"a\" = 1\nsoft(bogus): \"a\" = 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(parse_predicate_file("maybe: \"a\" = 1"), ParseError);
  EXPECT_THROW(parse_predicate_file("hard(historical): \"a\" = 1"), ParseError);
  EXPECT_THROW(parse_predicate_file("hard \"a\" = 1"), ParseError);
  EXPECT_THROW(parse_predicate_file("soft:"), ParseError);
}

TEST(ConstraintSet, AppendRejectsDuplicateIds) {
  ConstraintSet cs;
  cs.append(parse_predicate_file("hard[x]: \"a\" = 1\nsoft[y]: \"a\" <= 2"));
  EXPECT_EQ(cs.hard.size(), 1u);
  EXPECT_EQ(cs.soft.size(), 1u);
  EXPECT_THROW(cs.append(parse_predicate_file("soft[x]: \"a\" >= 0")), PreconditionError);
  EXPECT_EQ(cs.with_soft({}).soft.size(), 0u);
  EXPECT_THROW(cs.with_soft({"nope"}), PreconditionError);
}

TEST(Holds, WorkedExamples) {
  const Formula p1 = parse_formula(R"("steal" = min("ATM", "hack"))");
  const Valuation v{{"steal", 3}, {"ATM", 3}, {"hack", 5}};
  EXPECT_TRUE(holds(p1, v));
  EXPECT_FALSE(holds(parse_formula(R"("steal" = 5)"), v));
  EXPECT_FALSE(holds(parse_formula(R"("hack" <= 0.01)"), Valuation{{"hack", 0.02}}));
}

TEST(Holds, ToleranceAndUnbound) {
  EXPECT_TRUE(holds(parse_formula(R"("x" = 0.3)"), Valuation{{"x", 0.1 + 0.2}}));
  EXPECT_TRUE(holds(parse_formula(R"("x" <= 1)"), Valuation{{"x", 1 + 5e-10}}));
  EXPECT_FALSE(holds(parse_formula(R"("x" <= 1)"), Valuation{{"x", 1 + 1e-8}}));
  EXPECT_THROW(holds(parse_formula(R"("y" <= 1)"), Valuation{{"x", 0}}), UnboundLabelError);
  EXPECT_DOUBLE_EQ(evaluate(parse_formula(R"(or_indep(0.5, 0.5, 0.5) = 0)").lhs, {}), 0.875);
}

Expr random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 8 : 1);
  std::uniform_int_distribution<int> arity(1, 3);
  std::uniform_real_distribution<double> value(-3, 3);
  static const char* kLabels[] = {"a", "b c", "d\"q"};
  switch (pick(rng)) {
    case 0: return Expr::constant(std::round(value(rng) * 100) / 100);
    case 1: return Expr::ref(kLabels[rng() % 3]);
    case 2: return Expr::apply(Op::kAdd, {random_expr(rng, depth - 1), random_expr(rng, depth - 1)});
    case 3: return Expr::apply(Op::kSub, {random_expr(rng, depth - 1), random_expr(rng, depth - 1)});
    case 4: return Expr::apply(Op::kMul, {random_expr(rng, depth - 1), random_expr(rng, depth - 1)});
    case 5: return Expr::apply(Op::kNeg, {random_expr(rng, depth - 1)});
    default: {
      const Op op = std::array{Op::kMin, Op::kMax, Op::kNoisyOr}[rng() % 3];
      std::vector<Expr> args;
      for (int i = arity(rng); i > 0; --i) args.push_back(random_expr(rng, depth - 1));
      return Expr::apply(op, std::move(args));
    }
  }
}

Formula random_formula(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 3 : 0);
  switch (pick(rng)) {
    case 0:
      return Formula::compare(random_expr(rng, 3), std::array{Cmp::kEq, Cmp::kLe, Cmp::kGe}[rng() % 3],
                              random_expr(rng, 3));
    case 1:
      return Formula::all_of({random_formula(rng, depth - 1), random_formula(rng, depth - 1)});
    case 2:
      return Formula::any_of({random_formula(rng, depth - 1), random_formula(rng, depth - 1)});
    default:
      return Formula::negate(random_formula(rng, depth - 1));
  }
}

TEST(PredicateProperties, TextAndJsonRoundTrip) {
  std::mt19937 rng(11);
  for (int i = 0; i < 500; ++i) {
    const Formula f = random_formula(rng, 3);
    const std::string text = to_string(f);
    EXPECT_EQ(parse_formula(text), f) << text;
    EXPECT_EQ(formula_from_json(formula_to_json(f)), f) << text;
  }
}

TEST(PredicateJson, ArrayAndObjectForms) {
  const Predicate p = parse_predicate(R"("a" <= "b" + 1)", "k", Provenance::kSoftDomainKnowledge);
  const nlohmann::json arr = nlohmann::json::array({predicate_to_json(p)});
  EXPECT_EQ(parse_predicate_json(arr.dump()), std::vector<Predicate>{p});
  const nlohmann::json obj = {{"predicates", {{{"id", "q"}, {"kind", "hard"}, {"text", "\"a\" = 2"}}}}};
  const auto parsed = parse_predicate_json(obj.dump());
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_TRUE(parsed[0].is_hard());
  EXPECT_THROW(parse_predicate_json("{"), ParseError);
  EXPECT_THROW(parse_predicate_json(R"([{"id": "x", "formula": {"cmp": "<"}}])"), ParseError);
}

TEST(Entailment, FalsifierFindsCounterexample) {
  const std::map<std::string, std::pair<double, double>> box{{"x", {0, 1}}, {"y", {0, 1}}};
  EXPECT_FALSE(find_entailment_counterexample(parse_formula(R"("x" <= 0.3)"),
                                              parse_formula(R"("x" <= 0.5)"), box, 2000, 1));
  const auto cex = find_entailment_counterexample(parse_formula(R"("x" <= 0.5)"),
                                                  parse_formula(R"("x" <= 0.3)"), box, 2000, 1);
  ASSERT_TRUE(cex.has_value());
  EXPECT_GT(cex->at("x"), 0.3);
  EXPECT_LE(cex->at("x"), 0.5);
}

TEST(ReferencedLabels, CollectsBothSides) {
  EXPECT_EQ(referenced_labels(parse_formula(R"("a" <= max("b", 1) or not "c" = "a")")),
            (LabelSet{"a", "b", "c"}));
}

}  // namespace
}  // namespace atdecor
