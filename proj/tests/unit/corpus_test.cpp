#include <cmath>

#include <gtest/gtest.h>

#include "atdecor/corpus.hpp"
#include "atdecor/errors.hpp"
#include "atdecor/solver.hpp"

namespace atdecor {
namespace {

std::vector<std::string> ids(const std::vector<Predicate>& preds) {
  std::vector<std::string> out;
  for (const Predicate& p : preds) out.push_back(p.id);
  return out;
}

Valuation column(const CorpusEntry& atm, const char* name) {
  return atm.expected["columns"][name].get<Valuation>();
}

Valuation leaves_of(const AttackTree& t, const Valuation& v) {
  Valuation out;
  for (const std::string& l : leaf_labels_of(t)) out[l] = v.at(l);
  return out;
}

double worst_internal_gap(const CorpusEntry& atm, const AttributeDomain& d, const Valuation& col) {
  const Valuation got = evaluate_bottom_up(atm.tree, d, leaves_of(atm.tree, col));
  double worst = 0.0;
  for (const auto& [label, value] : col) worst = std::max(worst, std::abs(got.at(label) - value));
  return worst;
}

TEST(Corpus, NamesAndErrors) {
  EXPECT_EQ(corpus_names(), (std::vector<std::string>{"atm", "fig1", "fig2"}));
  EXPECT_THROW(load_corpus("fig9"), PreconditionError);
  const std::string sum = corpus_checksum();
  EXPECT_EQ(sum.size(), 16u);
  EXPECT_EQ(sum, corpus_checksum());
}

TEST(Corpus, AtmShape) {
  const CorpusEntry atm = load_corpus("atm");
  EXPECT_EQ(atm.domain.name, "prob-independent");
  EXPECT_EQ(labels_of(atm.tree).size(), 20u);
  EXPECT_EQ(leaf_labels_of(atm.tree).size(), 12u);
  EXPECT_TRUE(check_unique_labels(atm.tree).unique);
  EXPECT_EQ(ids(atm.historical), (std::vector<std::string>{"ATMFraud", "CardSkimming",
                                                           "CardTrapping", "CashTrapping",
                                                           "TransactionReversal"}));
  EXPECT_EQ(atm.knowledge.size(), 8u);
  EXPECT_EQ(atm.constraints().size(), 21u);
  for (const Predicate& p : atm.knowledge) EXPECT_EQ(p.provenance, Provenance::kSoftDomainKnowledge);
  for (const Predicate& p : atm.historical) EXPECT_EQ(p.provenance, Provenance::kSoftHistorical);
  EXPECT_EQ(atm.expected["labels"], 20);
}

// The shipped hard file is exactly the generated bottom-up set.
TEST(Corpus, AtmHardMatchesBottomUp) {
  const CorpusEntry atm = load_corpus("atm");
  const auto generated = bottom_up_constraints(atm.tree, atm.domain);
  ASSERT_EQ(generated.size(), atm.hard.size());
  for (std::size_t i = 0; i < generated.size(); ++i) {
    EXPECT_EQ(generated[i].formula, atm.hard[i].formula) << atm.hard[i].id;
    EXPECT_TRUE(atm.hard[i].is_hard());
  }
  const CorpusEntry fig1 = load_corpus("fig1");
  const auto fig1_generated = bottom_up_constraints(fig1.tree, fig1.domain);
  ASSERT_EQ(fig1_generated.size(), fig1.hard.size());
  for (std::size_t i = 0; i < fig1.hard.size(); ++i) {
    EXPECT_EQ(fig1_generated[i].formula, fig1.hard[i].formula);
  }
}

TEST(Corpus, Fig1BottomUp) {
  const CorpusEntry fig1 = load_corpus("fig1");
  EXPECT_EQ(fig1.tree.node_count(), 5u);
  for (const auto& row : fig1.expected["bottom_up"]) {
    EXPECT_EQ(evaluate_bottom_up(fig1.tree, fig1.domain, row["leaves"].get<Valuation>()),
              row["valuation"].get<Valuation>());
  }
}

TEST(Corpus, Fig2Variants) {
  const CorpusEntry fig2 = load_corpus("fig2");
  EXPECT_EQ(labels_of(fig2.tree).size(), 3u);
  const ConstraintSet all = fig2.constraints();
  for (const auto& row : fig2.expected["variants"]) {
    const ConstraintSet cs = all.with_soft(row["soft"].get<std::vector<std::string>>());
    const Classification c = classify(fig2.tree, fig2.domain, cs);
    EXPECT_EQ(to_string(c.verdict), row["verdict"].get<std::string>()) << row.dump();
    if (row.contains("valuation")) {
      const SolveOutcome out = solve(fig2.tree, fig2.domain, cs);
      ASSERT_TRUE(out.feasible());
      for (const auto& [label, value] : row["valuation"].get<Valuation>()) {
        EXPECT_NEAR(out.valuation->at(label), value, 1e-9) << label;
      }
    }
    if (row.contains("core")) {
      EXPECT_EQ(unsat_core(fig2.tree, fig2.domain, cs).core,
                row["core"].get<std::vector<std::string>>());
    }
  }
}

// Columns 1 and 2 are noisy-OR decorations. Column 3 only closes under a
// summing OR; under noisy-OR its root lands near 0.0038.
TEST(Corpus, AtmColumnsBottomUp) {
  const CorpusEntry atm = load_corpus("atm");
  const AttributeDomain noisy = builtin_domain("prob-independent");
  EXPECT_LE(worst_internal_gap(atm, noisy, column(atm, "historical")), 5e-4);
  EXPECT_LE(worst_internal_gap(atm, noisy, column(atm, "greedy")), 5e-4);
  const Valuation col3 = column(atm, "maxweak");
  EXPECT_GT(worst_internal_gap(atm, noisy, col3), 5e-4);
  const Valuation noisy3 = evaluate_bottom_up(atm.tree, noisy, leaves_of(atm.tree, col3));
  EXPECT_NEAR(noisy3.at("ATM fraud"), 0.0038, 1e-4);
  EXPECT_LE(worst_internal_gap(atm, builtin_domain("prob-sum"), col3), 5e-4);
}

TEST(Corpus, AtmHistoricalFeasible) {
  const CorpusEntry atm = load_corpus("atm");
  const ConstraintSet cs = atm.historical_only();
  const SolveOutcome out = solve(atm.tree, atm.domain, cs);
  ASSERT_EQ(out.status, SolveStatus::kFeasible);
  for (const auto* group : {&cs.hard, &cs.soft}) {
    for (const Predicate& p : *group) EXPECT_TRUE(holds(p, *out.valuation)) << p.id;
  }
  EXPECT_NEAR(out.valuation->at("ATM fraud"), 0.0046, 1e-12);
}

TEST(Corpus, AtmWithKnowledgeCore) {
  const CorpusEntry atm = load_corpus("atm");
  const ConstraintSet cs = atm.constraints();
  const SolveOutcome out = solve(atm.tree, atm.domain, cs);
  ASSERT_EQ(out.status, SolveStatus::kInfeasibleProved);
  EXPECT_TRUE(replay_certificate(atm.tree, atm.domain, cs, *out.certificate));
  const UnsatCore core = unsat_core(atm.tree, atm.domain, cs);
  EXPECT_EQ(core.core, atm.expected["with_knowledge"]["core"].get<std::vector<std::string>>());
  EXPECT_TRUE(core.minimal);
}

}  // namespace
}  // namespace atdecor
