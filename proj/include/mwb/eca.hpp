#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mwb/eval.hpp"
#include "mwb/store.hpp"

namespace mwb {

struct Event {
  Trigger trigger = Trigger::OnDataUpdate;
  ElementId subject;
  std::optional<std::array<double, 4>> geometry;  // proposed x, y, width, height
  int depth = 0;
};

struct FiredRule {
  int depth = 0;
  Trigger trigger = Trigger::OnDataUpdate;
  ElementId subject;  // element the rule ran on
  ElementId rule;
  std::string rule_name;
  TxId tx = 0;
  std::vector<WriteRecord> writes;
};

// `depth trigger subject rule old→new`, one write per target.
std::string format_trace(const State& state, const FiredRule& f);

struct RuleError {
  ElementId rule;
  ElementId subject;
  std::string message;
};

struct CascadeReport {
  std::vector<TxId> transactions;
  std::vector<FiredRule> fired;
  std::vector<RuleError> errors;
  std::vector<ElementId> touched;  // objects changed by rule actions
};

// Rules live in the viewpoints of the store. The engine keeps parsed forms
// and runs cascades on the store's mutation queue.
class RuleEngine {
 public:
  static constexpr int kDefaultDepthCap = 100;

  explicit RuleEngine(int depth_cap = kDefaultDepthCap) : depth_cap_(depth_cap) {}

  int depth_cap() const { return depth_cap_; }
  void set_depth_cap(int cap) { depth_cap_ = cap; }

  // Parses condition and action, then stores the rule in the viewpoint.
  ElementId register_rule(Store& store, ElementId viewpoint, Rule rule);

  // Breadth-first cascade. Each firing whose action changes the store is one
  // transaction; changed objects raise onDataUpdate one level deeper. Throws
  // CascadeDivergence when the depth cap is passed.
  CascadeReport dispatch(Store& store, std::vector<Event> initial);

  // Whether the rule's owning view (if any) applies and its condition holds.
  bool matches(const State& state, const Rule& rule, const EvalContext& ctx);

 private:
  struct Compiled {
    std::string condition_source;
    std::string action_source;
    std::optional<Predicate> condition;
    Script action;
  };
  const Compiled& compiled(const Rule& rule);
  const Predicate& predicate(const std::string& source);

  int depth_cap_;
  std::map<ElementId, Compiled> rules_;
  std::map<std::string, Predicate> predicates_;
};

// Binding used for a rule or view running on `element`.
EvalContext rule_context(const State& state, ElementId element, ElementId viewpoint, ElementId view,
                         const Event& event);

// The record bound to `event` in rule conditions and actions.
Value event_value(const Event& event);

}  // namespace mwb
