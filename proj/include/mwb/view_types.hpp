#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mwb/ids.hpp"

namespace mwb {

// The seven rule triggers of the workbench. Closed set.
enum class Trigger : std::uint8_t {
  OnDataUpdate,
  OnDragStart,
  WhileDragging,
  OnDragEnd,
  OnResizeStart,
  WhileResizing,
  OnResizeEnd,
};

inline constexpr Trigger kAllTriggers[] = {
    Trigger::OnDataUpdate,  Trigger::OnDragStart,   Trigger::WhileDragging, Trigger::OnDragEnd,
    Trigger::OnResizeStart, Trigger::WhileResizing, Trigger::OnResizeEnd,
};

std::string_view to_string(Trigger t);
std::optional<Trigger> parse_trigger(std::string_view text);

enum class TemplateKind : std::uint8_t {
  ViewRoot,
  Box,
  Text,
  If,
  Repeat,
  DefaultNode,
  Edge,
  Input,
  Selector,
  Toggle,
  Slider,
  Control,
  Decorators,
};

std::string_view to_string(TemplateKind k);
std::optional<TemplateKind> parse_template_kind(std::string_view text);

// Declarative template element. Props hold either expression sources
// (data, test, items, start, end), template text (className, text), or
// literals (field, name, min, max, ...), depending on the kind.
struct TemplateNode {
  TemplateKind kind = TemplateKind::Box;
  std::map<std::string, std::string> props;
  std::vector<TemplateNode> children;

  const std::string* prop(std::string_view key) const;
  std::string prop_or(std::string_view key, std::string fallback) const;
  bool operator==(const TemplateNode&) const = default;
};

enum class StyleKind : std::uint8_t { Color, Length, Dash, Path };

std::string_view to_string(StyleKind k);
std::optional<StyleKind> parse_style_kind(std::string_view text);

struct StyleValue {
  StyleKind kind = StyleKind::Color;
  std::string value;
  bool operator==(const StyleValue&) const = default;
};

enum class ChildLayout : std::uint8_t { Auto, List, GraphVertices };

struct ViewOptions {
  ChildLayout child_layout = ChildLayout::Auto;
  bool exclude = false;  // element is not rendered at all
  std::map<std::string, std::string> flags;
  bool operator==(const ViewOptions&) const = default;
};

// A named view parameter: `grid` standing for `node.state.grid ?? false`.
struct ViewParam {
  std::string name;
  std::string expression;
  bool operator==(const ViewParam&) const = default;
};

struct View {
  ElementId id;
  std::string name;
  std::string apply_to;
  TemplateNode templ;
  std::map<std::string, StyleValue> style;
  std::vector<std::pair<Trigger, ElementId>> events;
  ViewOptions options;
  std::vector<ViewParam> params;
  bool operator==(const View&) const = default;
};

struct Rule {
  ElementId id;
  std::string name;
  Trigger trigger = Trigger::OnDataUpdate;
  std::string condition;
  std::string action;
  ElementId owning_view;
  bool operator==(const Rule&) const = default;
};

enum class Severity : std::uint8_t { Error, Warning };

std::string_view to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view text);

struct ValidationRule {
  ElementId id;
  std::string name;
  std::string applies_to;
  std::string check;
  Severity severity = Severity::Error;
  bool operator==(const ValidationRule&) const = default;
};

struct Viewpoint {
  ElementId id;
  std::string name;
  bool is_default = false;
  std::vector<View> views;
  std::vector<Rule> rules;
  std::vector<ValidationRule> validation_rules;

  const View* find_view(std::string_view view_name) const;
  const View* find_view(ElementId view_id) const;
  bool operator==(const Viewpoint&) const = default;
};

}  // namespace mwb
