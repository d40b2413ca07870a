#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "atdecor/predicate.hpp"

namespace atdecor {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

IneqPredicate le(std::string l, double a) { return {IneqKind::kLeConst, std::move(l), "", a}; }
IneqPredicate ge(std::string l, double a) { return {IneqKind::kGeConst, std::move(l), "", a}; }
IneqPredicate lel(std::string l, std::string r, double a) {
  return {IneqKind::kLeLabelPlus, std::move(l), std::move(r), a};
}

std::optional<IneqPredicate> classify(const char* text) { return classify_ineq(parse_formula(text)); }

TEST(ClassifyIneq, Shapes) {
  EXPECT_EQ(classify(R"("x" >= 0.2)"), ge("x", 0.2));
  EXPECT_EQ(classify(R"("x" <= "y" + -0.1)"), lel("x", "y", -0.1));
  EXPECT_EQ(classify(R"("hack account" <= 0.01)"), le("hack account", 0.01));
  EXPECT_EQ(classify(R"("take card" <= "card skimming" + 0)"), lel("take card", "card skimming", 0));
  EXPECT_EQ(classify(R"("x" = 0.5)"), std::nullopt);
}

TEST(ClassifyIneq, Normalization) {
  EXPECT_EQ(classify(R"("x" >= "y" + 0.3)"), lel("y", "x", -0.3));
  EXPECT_EQ(classify(R"(0.4 >= "x")"), le("x", 0.4));
  EXPECT_EQ(classify(R"("x" - "y" <= 2 * 0.5)"), lel("x", "y", 1));
  EXPECT_EQ(classify(R"("x" + 0 <= "y")"), lel("x", "y", 0));
  EXPECT_EQ(classify(R"(2 * "x" <= 1)"), std::nullopt);
  EXPECT_EQ(classify(R"("x" * "y" <= 1)"), std::nullopt);
  EXPECT_EQ(classify(R"(min("x", "y") <= 1)"), std::nullopt);
  EXPECT_EQ(classify(R"("x" <= "x" + 1)"), std::nullopt);
  EXPECT_EQ(classify(R"("x" <= 1 and "x" >= 0)"), std::nullopt);
}

TEST(ClassifyIneq, FormulaRoundTrip) {
  for (const IneqPredicate& p : {le("a", 3), ge("a", -1), lel("a", "b", 0), lel("a", "b", -0.5)}) {
    EXPECT_EQ(classify_ineq(p.to_formula()), p) << to_string(p);
    EXPECT_EQ(classify_ineq(parse_formula(to_string(p))), p);
  }
}

TEST(ImpliesIneq, LemmaDirections) {
  EXPECT_TRUE(implies_ineq(le("x", 3), le("x", 5)));
  EXPECT_FALSE(implies_ineq(ge("x", 3), ge("x", 5)));
  EXPECT_TRUE(implies_ineq(ge("x", 5), ge("x", 3)));
  EXPECT_FALSE(implies_ineq(le("x", 3), le("y", 5)));
  EXPECT_TRUE(implies_ineq(lel("x", "y", 0), lel("x", "y", 0.1)));
  EXPECT_FALSE(implies_ineq(lel("x", "y", 0), lel("y", "x", 0.1)));
}

TEST(PredDistance, Examples) {
  EXPECT_DOUBLE_EQ(pred_distance(le("x", 3), le("x", 5)), 2);
  EXPECT_EQ(pred_distance(le("x", 3), ge("x", 3)), kInf);
  EXPECT_EQ(pred_distance(le("x", 3), le("y", 3)), kInf);
  EXPECT_NEAR(pred_distance(lel("cash", "card", 0), lel("cash", "card", 0.0018)), 0.0018, 1e-15);
}

TEST(SetDistance, Examples) {
  const std::vector<IneqPredicate> s{le("x", 1), ge("y", 2), lel("x", "y", 0)};
  const SetDistance same = set_distance(s, s);
  EXPECT_EQ(same.distance, 0);
  EXPECT_EQ(same.matching, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(set_distance(s, {le("x", 1)}).distance, kInf);

  // Weakened predicates scored against the originals they are implied by.
  const std::vector<IneqPredicate> weakened{
      le("card trapping", 0.0113), ge("cash trapping", 0.0131),
      lel("take card", "card skimming", 0.0172), lel("cash trapping", "card trapping", 0.0018)};
  const std::vector<IneqPredicate> soft{
      le("card trapping", 0.0094), ge("cash trapping", 0.015),
      lel("take card", "card skimming", 0), lel("cash trapping", "card trapping", 0)};
  const SetDistance d = set_distance(weakened, soft);
  EXPECT_NEAR(d.distance, std::sqrt(0.0019 * 0.0019 * 2 + 0.0172 * 0.0172 + 0.0018 * 0.0018), 1e-12);
  EXPECT_NEAR(d.distance, 0.017498, 5e-6);
  EXPECT_EQ(d.matching, (std::vector<std::size_t>{0, 1, 2, 3}));

  // Matching in the wrong direction has no admissible bijection.
  EXPECT_EQ(set_distance(soft, weakened).distance, kInf);
}

// Brute force over all bijections.
double brute_force(const std::vector<IneqPredicate>& from, const std::vector<IneqPredicate>& to) {
  std::vector<std::size_t> perm(to.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf;
  do {
    double sum = 0;
    bool ok = true;
    for (std::size_t i = 0; i < from.size() && ok; ++i) {
      const IneqPredicate& q = to[perm[i]];
      ok = implies_ineq(q, from[i]);
      if (ok) sum += std::pow(from[i].constant - q.constant, 2);
    }
    if (ok) best = std::min(best, std::sqrt(sum));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(SetDistanceProperties, MatchesBruteForce) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> size(0, 6);
  std::uniform_int_distribution<int> shape(0, 3);
  std::uniform_real_distribution<double> constant(-1, 1);
  int finite = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int n = size(rng);
    std::vector<IneqPredicate> from;
    std::vector<IneqPredicate> to;
    for (int i = 0; i < n; ++i) {
      IneqPredicate p;
      switch (shape(rng)) {
        case 0: p = le("x", constant(rng)); break;
        case 1: p = ge("x", constant(rng)); break;
        case 2: p = lel("x", "y", constant(rng)); break;
        default: p = le("y", constant(rng)); break;
      }
      IneqPredicate q = p;
      // Mostly tighten so an admissible matching usually exists.
      const double shift = std::abs(constant(rng)) * (rng() % 5 == 0 ? -1 : 1);
      q.constant += p.kind == IneqKind::kGeConst ? shift : -shift;
      from.push_back(p);
      to.push_back(q);
    }
    std::shuffle(to.begin(), to.end(), rng);
    const SetDistance d = set_distance(from, to);
    const double expected = brute_force(from, to);
    if (std::isinf(expected)) {
      EXPECT_TRUE(std::isinf(d.distance));
      continue;
    }
    ++finite;
    EXPECT_NEAR(d.distance, expected, 1e-12);
    double sum = 0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      EXPECT_TRUE(implies_ineq(to[d.matching[i]], from[i]));
      sum += std::pow(from[i].constant - to[d.matching[i]].constant, 2);
    }
    EXPECT_NEAR(std::sqrt(sum), d.distance, 1e-12);
    EXPECT_EQ(d.distance == 0, expected == 0);
  }
  EXPECT_GT(finite, 100);
}

TEST(IneqProperties, ImplicationIsPreorderAndSound) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> c(-1, 1);
  const std::map<std::string, std::pair<double, double>> box{{"x", {-2, 2}}, {"y", {-2, 2}}};
  for (int trial = 0; trial < 300; ++trial) {
    const IneqKind kind = std::array{IneqKind::kLeConst, IneqKind::kGeConst,
                                     IneqKind::kLeLabelPlus}[trial % 3];
    auto make = [&] {
      return IneqPredicate{kind, "x", kind == IneqKind::kLeLabelPlus ? "y" : "", c(rng)};
    };
    const IneqPredicate p = make(), q = make(), r = make();
    EXPECT_TRUE(implies_ineq(p, p));
    if (implies_ineq(p, q) && implies_ineq(q, r)) EXPECT_TRUE(implies_ineq(p, r));
    if (implies_ineq(p, q)) {
      EXPECT_FALSE(find_entailment_counterexample(p.to_formula(), q.to_formula(), box, 200,
                                                  static_cast<unsigned>(trial)));
    }
    // Metric axioms inside a group.
    EXPECT_EQ(pred_distance(p, q), pred_distance(q, p));
    EXPECT_EQ(pred_distance(p, p), 0);
    EXPECT_LE(pred_distance(p, r), pred_distance(p, q) + pred_distance(q, r) + 1e-15);
    if (p.constant != q.constant) EXPECT_GT(pred_distance(p, q), 0);
  }
}

}  // namespace
}  // namespace atdecor
