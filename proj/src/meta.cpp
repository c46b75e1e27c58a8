#include "mwb/meta.hpp"

#include "mwb/view_types.hpp"

namespace mwb {

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Integer: return "integer";
    case PrimitiveKind::Real: return "real";
    case PrimitiveKind::String: return "string";
    case PrimitiveKind::Boolean: return "boolean";
  }
  return "string";
}

std::optional<PrimitiveKind> parse_primitive(std::string_view text) {
  if (text == "integer") return PrimitiveKind::Integer;
  if (text == "real") return PrimitiveKind::Real;
  if (text == "string") return PrimitiveKind::String;
  if (text == "boolean") return PrimitiveKind::Boolean;
  return std::nullopt;
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::Model: return "DModel";
    case ElementKind::Package: return "DPackage";
    case ElementKind::Class: return "DClass";
    case ElementKind::Enum: return "DEnum";
    case ElementKind::Attribute: return "DAttribute";
    case ElementKind::Reference: return "DReference";
    case ElementKind::Object: return "DObject";
    case ElementKind::Value: return "DValue";
  }
  return "?";
}

bool is_bounded(std::int32_t upper) { return upper != kUnbounded; }

bool within_upper(std::size_t count, std::int32_t upper) {
  return !is_bounded(upper) || count <= static_cast<std::size_t>(upper);
}

// --- view types ---

std::string_view to_string(Trigger t) {
  switch (t) {
    case Trigger::OnDataUpdate: return "onDataUpdate";
    case Trigger::OnDragStart: return "onDragStart";
    case Trigger::WhileDragging: return "whileDragging";
    case Trigger::OnDragEnd: return "onDragEnd";
    case Trigger::OnResizeStart: return "onResizeStart";
    case Trigger::WhileResizing: return "whileResizing";
    case Trigger::OnResizeEnd: return "onResizeEnd";
  }
  return "?";
}

std::optional<Trigger> parse_trigger(std::string_view text) {
  for (Trigger t : kAllTriggers) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

namespace {
constexpr std::pair<TemplateKind, std::string_view> kTemplateNames[] = {
    {TemplateKind::ViewRoot, "View"},       {TemplateKind::Box, "div"},
    {TemplateKind::Text, "Text"},           {TemplateKind::If, "If"},
    {TemplateKind::Repeat, "Repeat"},       {TemplateKind::DefaultNode, "DefaultNode"},
    {TemplateKind::Edge, "Edge"},           {TemplateKind::Input, "Input"},
    {TemplateKind::Selector, "Selector"},   {TemplateKind::Toggle, "Toggle"},
    {TemplateKind::Slider, "Slider"},       {TemplateKind::Control, "Control"},
    {TemplateKind::Decorators, "Decorators"},
};
}  // namespace

std::string_view to_string(TemplateKind k) {
  for (auto [kind, name] : kTemplateNames) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<TemplateKind> parse_template_kind(std::string_view text) {
  for (auto [kind, name] : kTemplateNames) {
    if (name == text) return kind;
  }
  return std::nullopt;
}

const std::string* TemplateNode::prop(std::string_view key) const {
  auto it = props.find(std::string(key));
  return it == props.end() ? nullptr : &it->second;
}

std::string TemplateNode::prop_or(std::string_view key, std::string fallback) const {
  const std::string* p = prop(key);
  return p ? *p : std::move(fallback);
}

std::string_view to_string(StyleKind k) {
  switch (k) {
    case StyleKind::Color: return "color";
    case StyleKind::Length: return "length";
    case StyleKind::Dash: return "dash";
    case StyleKind::Path: return "path";
  }
  return "color";
}

std::optional<StyleKind> parse_style_kind(std::string_view text) {
  if (text == "color") return StyleKind::Color;
  if (text == "length") return StyleKind::Length;
  if (text == "dash") return StyleKind::Dash;
  if (text == "path") return StyleKind::Path;
  return std::nullopt;
}

std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

std::optional<Severity> parse_severity(std::string_view text) {
  if (text == "error") return Severity::Error;
  if (text == "warning") return Severity::Warning;
  return std::nullopt;
}

const View* Viewpoint::find_view(std::string_view view_name) const {
  for (const View& v : views) {
    if (v.name == view_name) return &v;
  }
  return nullptr;
}

const View* Viewpoint::find_view(ElementId view_id) const {
  for (const View& v : views) {
    if (v.id == view_id) return &v;
  }
  return nullptr;
}

}  // namespace mwb
