#include "atdecor/corpus.hpp"

#include <cstdint>
#include <cstdio>

#include "atdecor/errors.hpp"
#include "corpus_data.hpp"

namespace atdecor {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ConstraintSet CorpusEntry::constraints() const {
  ConstraintSet cs;
  cs.hard = hard;
  cs.soft = knowledge;
  cs.soft.insert(cs.soft.end(), historical.begin(), historical.end());
  return cs;
}

ConstraintSet CorpusEntry::historical_only() const {
  ConstraintSet cs;
  cs.hard = hard;
  cs.soft = historical;
  return cs;
}

std::vector<std::string> corpus_names() {
  std::vector<std::string> names;
  for (const auto& f : detail::embedded_corpus()) {
    const std::string dir(f.path.substr(0, f.path.find('/')));
    if (names.empty() || names.back() != dir) names.push_back(dir);
  }
  return names;
}

CorpusEntry load_corpus(std::string_view name) {
  CorpusEntry entry;
  entry.name = std::string(name);
  const std::string prefix = entry.name + "/";
  for (const auto& f : detail::embedded_corpus()) {
    if (f.path.substr(0, prefix.size()) == prefix) {
      entry.files.emplace(std::string(f.path.substr(prefix.size())), std::string(f.content));
    }
  }
  if (entry.files.empty()) throw PreconditionError("unknown corpus entry \"" + entry.name + "\"");
  auto file = [&](const std::string& n) -> const std::string* {
    const auto it = entry.files.find(n);
    return it == entry.files.end() ? nullptr : &it->second;
  };
  if (!file("tree.atdsl") || !file("domain.txt")) {
    throw PreconditionError("corpus entry \"" + entry.name + "\" is incomplete");
  }
  entry.tree = parse_tree(*file("tree.atdsl"));
  entry.domain = builtin_domain(trim(*file("domain.txt")));
  if (const auto* s = file("hard.pred")) entry.hard = parse_predicate_file(*s, "hard");
  if (const auto* s = file("historical.pred")) entry.historical = parse_predicate_file(*s, "hist");
  if (const auto* s = file("knowledge.pred")) entry.knowledge = parse_predicate_file(*s, "know");
  if (const auto* s = file("expected.json")) entry.expected = nlohmann::json::parse(*s);
  return entry;
}

std::string corpus_checksum() {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;  // separator so ("ab","c") and ("a","bc") differ
    h *= 0x100000001b3ULL;
  };
  for (const auto& f : detail::embedded_corpus()) {
    mix(f.path);
    mix(f.content);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace atdecor
