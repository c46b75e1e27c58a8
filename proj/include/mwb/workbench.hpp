#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "mwb/eca.hpp"
#include "mwb/edits.hpp"
#include "mwb/render.hpp"
#include "mwb/validation.hpp"

namespace mwb {

struct Outcome {
  CommitResult commit;
  CascadeReport cascade;
  std::vector<Marker> markers;  // set when revalidation ran
  bool revalidated = false;
};

struct GestureOutcome {
  std::vector<Event> events;  // in emission order
  std::vector<TxId> transactions;
  CascadeReport cascade;      // merged over all phases
};

// Store + rule engine + validation behind one mutation entry point. Every
// user gesture commits, then runs the onDataUpdate cascade, then revalidates
// touched models when the project declares validation rules.
class Workbench {
 public:
  Workbench() = default;
  explicit Workbench(Store store) : store_(std::move(store)) {}

  Store& store() { return store_; }
  const Store& store() const { return store_; }
  const State& state() const { return store_.state(); }
  RuleEngine& engine() { return engine_; }

  std::string author = "local";

  void set_tracing(bool on) { tracing_ = on; }
  bool tracing() const { return tracing_; }
  const std::vector<std::string>& trace() const { return trace_; }
  void clear_trace() { trace_.clear(); }

  Outcome apply(const std::function<void(Draft&)>& body, bool undoable = true);
  Outcome apply_ops(const std::string& author, const std::vector<Op>& ops);
  // Cascade and revalidation for an already committed change.
  Outcome settle(const CommitResult& commit);

  Outcome set_feature(ElementId object, const std::string& feature, std::vector<Scalar> values);
  Outcome mutate_feature(ElementId object, const std::string& feature, const FeatureEdit& edit);
  Outcome set_layout(ElementId id, double x, double y, double width, double height);
  Outcome set_state(ElementId id, const std::string& key, const nlohmann::json& value);
  Outcome delete_element(ElementId id);
  Outcome co_evolve(const MetaEdit& edit, ElementId* created = nullptr);
  Outcome undo();
  Outcome redo();

  // Drag protocol: onDragStart, one whileDragging per path point (each
  // moving the node), onDragEnd, then onDataUpdate when the node moved. The
  // whole gesture is one undo step.
  GestureOutcome simulate_drag(ElementId element, const std::vector<std::array<double, 2>>& path);
  GestureOutcome simulate_resize(ElementId element, const std::vector<std::array<double, 2>>& sizes);

  // Writes an Input/Selector affordance back to the model.
  Outcome apply_projectional_edit(const Affordance& target, const std::string& text);
  // Sets a Toggle/Slider parameter declared in the scope element's view.
  Outcome set_control_parameter(ElementId scope, ElementId viewpoint, const std::string& name, const Value& value);

  std::vector<Marker> validate(ElementId model);

 private:
  GestureOutcome gesture(ElementId element, const std::vector<std::array<double, 2>>& points, bool resize);
  void record(const CascadeReport& r);

  Store store_;
  RuleEngine engine_;
  bool tracing_ = false;
  std::vector<std::string> trace_;
};

bool has_validation_rules(const State& state);

}  // namespace mwb
