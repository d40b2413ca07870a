#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "atdecor/domain.hpp"
#include "atdecor/predicate.hpp"
#include "atdecor/tree.hpp"

namespace atdecor {

// A bundled example: tree, domain, predicate files and reference results.
struct CorpusEntry {
  std::string name;
  AttackTree tree = AttackTree::leaf("root");
  AttributeDomain domain;
  std::vector<Predicate> hard;
  std::vector<Predicate> historical;
  std::vector<Predicate> knowledge;
  nlohmann::json expected;
  std::map<std::string, std::string> files;  // file name -> source text

  // Hard plus every soft predicate: domain knowledge, then historical data.
  // Greedy relaxation follows this order.
  ConstraintSet constraints() const;
  ConstraintSet historical_only() const;
};

std::vector<std::string> corpus_names();

// Throws PreconditionError for an unknown name.
CorpusEntry load_corpus(std::string_view name);

// FNV-1a 64 over every embedded path and content, as 16 hex digits.
std::string corpus_checksum();

}  // namespace atdecor
