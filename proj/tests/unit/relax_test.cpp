#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "atdecor/corpus.hpp"
#include "atdecor/errors.hpp"
#include "atdecor/relax.hpp"

namespace atdecor {
namespace {

Predicate soft(const std::string& id, const std::string& text) {
  return parse_predicate(text, id, Provenance::kSoftDomainKnowledge);
}

ConstraintSet leaf_set(std::vector<Predicate> preds) {
  ConstraintSet cs;
  cs.soft = std::move(preds);
  return cs;
}

using Ids = std::vector<std::string>;

// Lower bounds may only move down, upper bounds only up.
void expect_direction(const Shift& s) {
  if (s.original.kind == IneqKind::kGeConst) {
    EXPECT_LE(s.weakened.constant, s.original.constant) << s.id;
  } else {
    EXPECT_GE(s.weakened.constant, s.original.constant) << s.id;
  }
}

double max_shift(const MaxWeakResult& r, const std::string& origin) {
  double m = 0.0;
  for (const Shift& s : r.per_predicate) {
    if (s.origin == origin) m = std::max(m, s.shift);
  }
  return m;
}

// Random inequality predicate over the given labels.
Predicate random_ineq(std::mt19937_64& rng, const Ids& labels, int index) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  const std::string id = "s" + std::to_string(index);
  const std::string l = labels[pick(rng)];
  const int kind = static_cast<int>(rng() % (labels.size() > 1 ? 3 : 2));
  if (kind == 0) return Predicate{id, Provenance::kSoftDomainKnowledge,
                                  IneqPredicate{IneqKind::kLeConst, l, "", u(rng)}.to_formula()};
  if (kind == 1) return Predicate{id, Provenance::kSoftDomainKnowledge,
                                  IneqPredicate{IneqKind::kGeConst, l, "", u(rng)}.to_formula()};
  std::string r = labels[pick(rng)];
  while (r == l) r = labels[pick(rng)];
  return Predicate{id, Provenance::kSoftDomainKnowledge,
                   IneqPredicate{IneqKind::kLeLabelPlus, l, r, u(rng) - 0.5}.to_formula()};
}

TEST(Greedy, HandTrace) {
  const ConstraintSet cs =
      leaf_set({soft("a", R"("x" <= 1)"), soft("b", R"("x" >= 2)"), soft("c", R"("x" >= 0)")});
  const InclusionResult r = relax_inclusion_greedy(AttackTree::leaf("x"), builtin_domain("cost"), cs);
  EXPECT_EQ(r.kept, (Ids{"a", "c"}));
  EXPECT_EQ(r.dropped, (Ids{"b"}));
  EXPECT_LE(r.valuation.at("x"), 1 + 1e-9);
  EXPECT_TRUE(r.unknown.empty());
  // Reversed order keeps the other side.
  const InclusionResult rev = relax_inclusion_greedy(AttackTree::leaf("x"), builtin_domain("cost"),
                                                     cs, {"c", "b", "a"});
  EXPECT_EQ(rev.kept, (Ids{"c", "b"}));
  EXPECT_THROW(relax_inclusion_greedy(AttackTree::leaf("x"), builtin_domain("cost"), cs, {"a"}),
               PreconditionError);
}

TEST(Greedy, FeasibleKeepsEverything) {
  const ConstraintSet cs = leaf_set({soft("a", R"("x" <= 1)"), soft("b", R"("x" >= 0.5)")});
  const InclusionResult r = relax_inclusion_greedy(AttackTree::leaf("x"), builtin_domain("cost"), cs);
  EXPECT_EQ(r.kept, (Ids{"a", "b"}));
  EXPECT_TRUE(r.dropped.empty());
  const InclusionResult e = relax_inclusion_exact(AttackTree::leaf("x"), builtin_domain("cost"), cs);
  EXPECT_TRUE(e.exact);
  EXPECT_EQ(e.kept, (Ids{"a", "b"}));
}

TEST(Exact, BeatsGreedy) {
  const ConstraintSet cs =
      leaf_set({soft("a", R"("x" <= 1)"), soft("b", R"("x" >= 2)"), soft("c", R"("x" >= 3)")});
  const AttackTree t = AttackTree::leaf("x");
  EXPECT_EQ(relax_inclusion_greedy(t, builtin_domain("cost"), cs).kept.size(), 1u);
  const InclusionResult e = relax_inclusion_exact(t, builtin_domain("cost"), cs);
  EXPECT_TRUE(e.exact);
  EXPECT_EQ(e.kept, (Ids{"b", "c"}));
  EXPECT_EQ(e.dropped, (Ids{"a"}));
}

TEST(Exact, Limits) {
  ConstraintSet cs;
  for (int i = 0; i < 4; ++i) cs.soft.push_back(soft("s" + std::to_string(i), R"("x" <= 1)"));
  ExactOptions small;
  small.max_soft = 3;
  EXPECT_THROW(relax_inclusion_exact(AttackTree::leaf("x"), builtin_domain("cost"), cs, {}, small),
               PreconditionError);
}

TEST(Greedy, AtmOrders) {
  const CorpusEntry atm = load_corpus("atm");
  const ConstraintSet cs = atm.constraints();
  const InclusionResult file_order = relax_inclusion_greedy(atm.tree, atm.domain, cs);
  EXPECT_EQ(file_order.dropped, (Ids{"CashTrapping"}));
  EXPECT_EQ(file_order.kept.size(), 12u);
  // Maximality: every dropped predicate conflicts with the kept set.
  for (const std::string& d : file_order.dropped) {
    Ids trial = file_order.kept;
    trial.push_back(d);
    EXPECT_FALSE(solve(atm.tree, atm.domain, cs.with_soft(trial)).feasible());
  }
  Ids historical_first;
  for (const Predicate& p : atm.historical) historical_first.push_back(p.id);
  for (const Predicate& p : atm.knowledge) historical_first.push_back(p.id);
  const InclusionResult other = relax_inclusion_greedy(atm.tree, atm.domain, cs, historical_first);
  EXPECT_EQ(other.dropped, (Ids{"CashEqCard"}));
  const InclusionResult exact = relax_inclusion_exact(atm.tree, atm.domain, cs);
  EXPECT_TRUE(exact.exact);
  EXPECT_EQ(exact.kept.size(), 12u);
}

TEST(Normalize, Shapes) {
  const Normalization n = ineq_normalize(
      {soft("eqL", R"("cash trapping" = "card trapping")"), soft("eqC", R"("card trapping" = 0.0094)"),
       soft("le", R"("x" <= 0.3)"), soft("ge", R"("y" >= "x" + 0.1)"), soft("bad", R"("x" * "y" <= 1)"),
       soft("or", R"("x" <= 1 or "y" <= 1)")});
  ASSERT_EQ(n.predicates.size(), 6u);
  EXPECT_EQ(n.predicates[0].id, "eqL#le");
  EXPECT_EQ(n.predicates[0].ineq,
            (IneqPredicate{IneqKind::kLeLabelPlus, "cash trapping", "card trapping", 0.0}));
  EXPECT_EQ(n.predicates[1].ineq,
            (IneqPredicate{IneqKind::kLeLabelPlus, "card trapping", "cash trapping", 0.0}));
  EXPECT_EQ(n.predicates[2].ineq, (IneqPredicate{IneqKind::kLeConst, "card trapping", "", 0.0094}));
  EXPECT_EQ(n.predicates[3].ineq, (IneqPredicate{IneqKind::kGeConst, "card trapping", "", 0.0094}));
  EXPECT_EQ(n.predicates[3].origin, "eqC");
  EXPECT_EQ(n.predicates[4].ineq, (IneqPredicate{IneqKind::kLeConst, "x", "", 0.3}));
  EXPECT_EQ(n.predicates[5].ineq.kind, IneqKind::kLeLabelPlus);
  EXPECT_EQ(n.predicates[5].ineq.left, "x");
  EXPECT_NEAR(n.predicates[5].ineq.constant, -0.1, 1e-15);
  ASSERT_EQ(n.rejected.size(), 2u);
  EXPECT_EQ(n.rejected[0].first, "bad");
  EXPECT_EQ(n.rejected[1].first, "or");
}

TEST(MaxWeak, SymmetricSplit) {
  const ConstraintSet cs = leaf_set({soft("a", R"("x" <= 1)"), soft("b", R"("x" >= 2)")});
  const MaxWeakResult r = relax_maxweak(AttackTree::leaf("x"), builtin_domain("cost"), cs);
  EXPECT_NEAR(r.distance, std::sqrt(0.5), 1e-7);
  EXPECT_NEAR(r.valuation.at("x"), 1.5, 1e-7);
  ASSERT_EQ(r.per_predicate.size(), 2u);
  EXPECT_NEAR(r.per_predicate[0].weakened.constant, 1.5, 1e-7);
  EXPECT_NEAR(r.per_predicate[1].weakened.constant, 1.5, 1e-7);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(verify_weakening(cs, r).ok);
}

TEST(MaxWeak, SatisfiableIsIdentity) {
  const ConstraintSet cs = leaf_set({soft("a", R"("x" <= 0.7)"), soft("b", R"("x" >= 0.2)")});
  const MaxWeakResult r =
      relax_maxweak(AttackTree::leaf("x"), builtin_domain("prob-independent"), cs);
  EXPECT_EQ(r.distance, 0.0);
  for (const Shift& s : r.per_predicate) EXPECT_EQ(s.weakened, s.original);
  EXPECT_TRUE(verify_weakening(cs, r).ok);
}

TEST(MaxWeak, Preconditions) {
  const AttackTree t = AttackTree::leaf("x");
  EXPECT_THROW(relax_maxweak(t, builtin_domain("cost"), leaf_set({soft("a", R"("x" * 2 <= 1)")})),
               PreconditionError);
  EXPECT_THROW(relax_maxweak(t, builtin_domain("cost"), ConstraintSet{}), PreconditionError);
  ConstraintSet bad_hard = leaf_set({soft("a", R"("x" <= 1)")});
  bad_hard.hard = {parse_predicate(R"("x" <= -1)", "h", Provenance::kHardStructural)};
  EXPECT_THROW(relax_maxweak(t, builtin_domain("cost"), bad_hard), PreconditionError);
}

TEST(VerifyWeakening, ReportedShiftTable) {
  const CorpusEntry atm = load_corpus("atm");
  MaxWeakResult r;
  r.valuation = atm.expected["columns"]["maxweak"].get<Valuation>();
  for (const auto& row : atm.expected["maxweak_shifts"]["rows"]) {
    const auto from = classify_ineq(parse_formula(row["soft"].get<std::string>()));
    const auto to = classify_ineq(parse_formula(row["weakened"].get<std::string>()));
    ASSERT_TRUE(from && to);
    r.per_predicate.push_back(Shift{"row", "row", *from, *to, std::abs(to->constant - from->constant)});
    EXPECT_NEAR(r.per_predicate.back().shift, row["shift"].get<double>(), 1e-12);
  }
  const WeakeningReport ok = verify_weakening(ConstraintSet{}, r);
  EXPECT_TRUE(ok.ok) << (ok.failures.empty() ? "" : ok.failures[0]);

  MaxWeakResult bad;
  bad.valuation = {{"x", 0.5}};
  const IneqPredicate ge{IneqKind::kGeConst, "x", "", 0.2};
  IneqPredicate up = ge;
  up.constant = 0.3;
  bad.per_predicate.push_back(Shift{"g", "g", ge, up, 0.1});
  const WeakeningReport report = verify_weakening(ConstraintSet{}, bad);
  EXPECT_FALSE(report.ok);
  ASSERT_EQ(report.failures.size(), 1u);
  EXPECT_NE(report.failures[0].find("g:"), std::string::npos);
}

TEST(MaxWeak, Atm) {
  const CorpusEntry atm = load_corpus("atm");
  const ConstraintSet cs = atm.constraints();
  const MaxWeakResult r = relax_maxweak(atm.tree, atm.domain, cs);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.distance, 1.1 * 0.0175);
  EXPECT_TRUE(verify_weakening(cs, r).ok);
  for (const Shift& s : r.per_predicate) expect_direction(s);
  for (const std::string& origin : {"ATMFraud", "CardSkimming", "TransactionReversal"}) {
    EXPECT_LE(max_shift(r, origin), 1e-4) << origin;
  }
  const MaxWeakResult joint = relax_maxweak_joint(atm.tree, atm.domain, cs);
  EXPECT_NEAR(joint.distance * joint.distance, r.distance * r.distance, 1e-9);
}

// Direction, self-consistency with the joint optimizer, and monotonicity under
// added predicates, on small random probability trees.
TEST(MaxWeak, RandomProperties) {
  std::mt19937_64 rng(23);
  const AttributeDomain d = builtin_domain("prob-independent");
  const std::vector<AttackTree> trees = {
      AttackTree::leaf("x"), parse_tree(R"(OR("x" "y")@"r")"), parse_tree(R"(AND("x" "y")@"r")")};
  SolveOptions opts;
  opts.restarts = 16;
  for (int i = 0; i < 24; ++i) {
    const AttackTree& t = trees[i % trees.size()];
    const LabelSet ls = labels_of(t);
    const Ids labels(ls.begin(), ls.end());
    ConstraintSet cs;
    for (int k = 0; k < 4; ++k) cs.soft.push_back(random_ineq(rng, labels, k));
    cs.hard = bottom_up_constraints(t, d);
    const MaxWeakResult r = relax_maxweak(t, d, cs, opts);
    EXPECT_TRUE(verify_weakening(cs, r).ok);
    for (const Shift& s : r.per_predicate) expect_direction(s);
    const MaxWeakResult joint = relax_maxweak_joint(t, d, cs, opts);
    EXPECT_NEAR(joint.distance * joint.distance, r.distance * r.distance, 1e-9) << i;
    ConstraintSet more = cs;
    more.soft.push_back(random_ineq(rng, labels, 9));
    EXPECT_GE(relax_maxweak(t, d, more, opts).distance, r.distance - 1e-9) << i;
  }
}

}  // namespace
}  // namespace atdecor
