#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mwb/eval.hpp"

namespace mwb {

enum class AffordanceKind : std::uint8_t { None, Input, Selector, Toggle, Slider };

// What a render node lets the user change, and where that change lands.
struct Affordance {
  AffordanceKind kind = AffordanceKind::None;
  ElementId object;     // Input/Selector: object owning the feature
  std::string feature;  // Input/Selector: feature name
  ElementId scope;      // Toggle/Slider: element whose node state holds the parameter
  std::string param;    // Toggle/Slider: parameter name
  double min = 0;
  double max = 0;
  std::vector<std::string> options;  // Selector literals
};

struct Rect {
  double x = 0;
  double y = 0;
  double width = 0;
  double height = 0;
};

struct RenderNode {
  std::string kind;  // canvas, view, box, text, input, selector, toggle, slider, control, edge, badge
  int ref = 0;       // preorder number within the tree
  ElementId element;
  std::string view;  // view name on view roots
  std::string class_name;
  std::string text;
  std::optional<Rect> frame;  // view roots with a node
  std::map<std::string, std::string> style;
  Affordance affordance;
  // Edges: endpoints and the straight segment between their border anchors.
  ElementId start;
  ElementId end;
  std::array<double, 4> segment{};
  bool guarded = false;  // produced by a conditional section
  std::vector<RenderNode> children;
};

struct RenderTree {
  RenderNode root;
  bool grid = false;
  int level = 3;

  const RenderNode* find(int ref) const;
  // All nodes of `kind` in preorder.
  std::vector<const RenderNode*> all(std::string_view kind) const;
};

// Parameter values forced for one render, by name (e.g. level, grid).
using ParamOverrides = std::map<std::string, Value>;

// First view (declaration order) of the viewpoint, then of the default
// viewpoint, whose applyTo holds; null for the minimal default rendering.
// Predicate failures are rethrown naming the view.
const View* resolve_view(const State& state, ElementId element, ElementId viewpoint);

// Viewpoint that owns `view`.
ElementId viewpoint_of_view(const State& state, const View* view, ElementId preferred);

// Binding of `data`, `node` and `view` for an element, as used by the console.
EvalContext view_context(const State& state, ElementId element, ElementId viewpoint);

RenderTree render(const State& state, ElementId model, ElementId viewpoint, const ParamOverrides& overrides = {});

std::string render_to_svg(const RenderTree& tree);

// Section class names under conditional template sections, in tree order.
std::vector<std::string> guarded_sections(const RenderTree& tree);

}  // namespace mwb
