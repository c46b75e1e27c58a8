#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mwb/value.hpp"

namespace mwb {

class Draft;

struct EvalContext {
  const State* state = nullptr;
  Value data;          // the contextual self
  ElementId node;      // element whose NodeInfo `node` binds to
  ViewRef view;        // resolved view, if any
  ElementId model;     // model the evaluation runs over
  Value event;         // record with trigger, subject and gesture payload
  std::map<std::string, Value> locals;

  static EvalContext for_element(const State& state, ElementId id);
};

Value evaluate(const Expr& e, const EvalContext& ctx);
Value evaluate(std::string_view source, const EvalContext& ctx);

bool evaluate_predicate(const Predicate& p, const EvalContext& ctx);
bool evaluate_predicate(std::string_view source, const EvalContext& ctx);

// One store write performed by an action script, for traces.
struct WriteRecord {
  ElementId subject;
  std::string target;
  Value before;
  Value after;
};

struct ScriptResult {
  std::map<std::string, Value> locals;
  Value last;  // value of the last expression statement
  std::vector<WriteRecord> writes;
};

// Runs an action script. With a null draft the script is read-only and any
// store assignment fails.
ScriptResult run_script(const Script& script, const EvalContext& ctx, Draft* draft);

}  // namespace mwb
