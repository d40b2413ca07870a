#pragma once

// JSON forms of solver and relaxation results. Object keys are sorted and
// numbers are printed round-trip exact, so equal results dump to equal bytes.
// Non-finite numbers become null.

#include <nlohmann/json.hpp>

#include "atdecor/relax.hpp"
#include "atdecor/solver.hpp"

namespace atdecor {

nlohmann::json to_json(const SolveOutcome& outcome);
nlohmann::json to_json(const Classification& classification);
nlohmann::json to_json(const UnsatCore& core);
nlohmann::json to_json(const InclusionResult& result);
nlohmann::json to_json(const MaxWeakResult& result);
nlohmann::json to_json(const WeakeningReport& report);
nlohmann::json to_json(const Normalization& normalization);
nlohmann::json to_json(const IneqPredicate& predicate);

}  // namespace atdecor
