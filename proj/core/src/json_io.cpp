#include "atdecor/json_io.hpp"

#include <cmath>

#include "atdecor/domain.hpp"

namespace atdecor {

namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_valuation(const std::optional<Valuation>& v) {
  return v ? valuation_to_json(*v) : json(nullptr);
}

}  // namespace

json to_json(const SolveOutcome& outcome) {
  json j = {{"status", to_string(outcome.status)},
            {"valuation", optional_valuation(outcome.valuation)},
            {"residual", number(outcome.residual)},
            {"restarts_used", outcome.restarts_used},
            {"certificate", nullptr}};
  if (outcome.certificate) {
    j["certificate"] = {{"constraints", outcome.certificate->constraint_ids},
                        {"emptied_by", outcome.certificate->emptied_by}};
  }
  return j;
}

json to_json(const Classification& c) {
  json j = {{"verdict", to_string(c.verdict)},
            {"status", to_string(c.status)},
            {"caveat", c.caveat},
            {"note", c.note},
            {"witnesses", nullptr}};
  if (c.witness_pair) {
    j["witnesses"] = json::array(
        {valuation_to_json(c.witness_pair->first), valuation_to_json(c.witness_pair->second)});
  }
  return j;
}

json to_json(const UnsatCore& core) {
  json checks = json::array();
  for (const CoreCheck& c : core.checks) {
    checks.push_back({{"id", c.id}, {"status_without", to_string(c.status_without)}});
  }
  return {{"core", core.core},
          {"minimal", core.minimal},
          {"status", to_string(core.status)},
          {"checks", std::move(checks)}};
}

json to_json(const InclusionResult& r) {
  return {{"kept", r.kept},           {"dropped", r.dropped},
          {"exact", r.exact},         {"unknown", r.unknown},
          {"solver_calls", r.solver_calls}, {"valuation", valuation_to_json(r.valuation)}};
}

json to_json(const IneqPredicate& p) {
  json j = {{"kind", to_string(p.kind)},
            {"left", p.left},
            {"constant", number(p.constant)},
            {"text", to_string(p)}};
  if (p.kind == IneqKind::kLeLabelPlus) j["right"] = p.right;
  return j;
}

json to_json(const MaxWeakResult& r) {
  json rows = json::array();
  for (const Shift& s : r.per_predicate) {
    rows.push_back({{"id", s.id},
                    {"origin", s.origin},
                    {"soft", to_json(s.original)},
                    {"weakened", to_json(s.weakened)},
                    {"shift", number(s.shift)}});
  }
  return {{"distance", number(r.distance)},
          {"converged", r.converged},
          {"kkt", number(r.kkt)},
          {"violation", number(r.violation)},
          {"valuation", valuation_to_json(r.valuation)},
          {"per_predicate", std::move(rows)}};
}

json to_json(const WeakeningReport& report) {
  return {{"ok", report.ok}, {"failures", report.failures}};
}

json to_json(const Normalization& n) {
  json preds = json::array();
  for (const NormalizedPredicate& p : n.predicates) {
    preds.push_back({{"id", p.id}, {"origin", p.origin}, {"predicate", to_json(p.ineq)}});
  }
  json rejected = json::array();
  for (const auto& [id, reason] : n.rejected) rejected.push_back({{"id", id}, {"reason", reason}});
  return {{"predicates", std::move(preds)}, {"rejected", std::move(rejected)}};
}

}  // namespace atdecor
