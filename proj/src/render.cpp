#include "mwb/render.hpp"

#include <cmath>
#include <set>

#include "mwb/eval.hpp"
#include "mwb/reflect.hpp"
#include "mwb/validation.hpp"

namespace mwb {

namespace {

using Locals = std::map<std::string, Value>;

const Viewpoint* default_viewpoint(const State& state) {
  for (const auto& [id, vp] : state.viewpoints) {
    if (vp.is_default) return &vp;
  }
  return nullptr;
}

bool view_applies(const State& state, const View& v, ElementId vpid, ElementId element) {
  if (v.apply_to.empty()) return false;
  EvalContext ctx = EvalContext::for_element(state, element);
  ctx.view = ViewRef{vpid, v.id};
  try {
    return evaluate_predicate(v.apply_to, ctx);
  } catch (const Error& e) {
    throw Error(e.code(), "view " + v.name + ": " + e.message(), e.pos(), e.path());
  }
}

RenderNode badge(ElementId element, const std::string& message) {
  RenderNode n;
  n.kind = "badge";
  n.element = element;
  n.class_name = "error";
  n.text = message;
  return n;
}

Rect frame_of(const NodeInfo& n) { return {n.x, n.y, n.width, n.height}; }

std::array<double, 2> anchor(const Rect& r, double dx, double dy) {
  double cx = r.x + r.width / 2;
  double cy = r.y + r.height / 2;
  double t = 1;
  if (dx != 0) t = std::min(t, (r.width / 2) / std::fabs(dx));
  if (dy != 0) t = std::min(t, (r.height / 2) / std::fabs(dy));
  return {cx + dx * t, cy + dy * t};
}

class Renderer {
 public:
  Renderer(const State& state, ElementId viewpoint, const ParamOverrides& overrides)
      : st_(state), vp_(viewpoint), overrides_(overrides) {}

  RenderTree run(ElementId model) {
    RenderTree tree;
    tree.root.kind = "canvas";
    tree.root.element = model;
    tree.root.class_name = "canvas";
    st_.get_as<DModel>(model);

    Locals model_params;
    const View* mv = nullptr;
    try {
      mv = resolve_view(st_, model, vp_);
    } catch (const Error& e) {
      tree.root.children.push_back(badge(model, e.what()));
    }
    if (mv && !mv->options.exclude) {
      tree.root.children.push_back(view_node(model, mv, {}, false, &model_params));
      rendered_.insert(model);
    }
    tree.grid = param_truthy(model, model_params, "grid");
    tree.level = 3;
    if (auto it = model_params.find("level"); it != model_params.end() && it->second.is_number()) {
      tree.level = static_cast<int>(it->second.number());
    }

    std::vector<ElementId> objects = model_objects(st_, model);
    std::vector<ElementId> order;
    for (ElementId r : st_.get_as<DModel>(model).root_objects) order.push_back(r);
    for (ElementId o : objects) order.push_back(o);
    for (ElementId o : order) {
      if (rendered_.count(o)) continue;
      if (auto n = element_node(o, model_params, true)) tree.root.children.push_back(std::move(*n));
    }
    int ref = 0;
    number(tree.root, ref);
    return tree;
  }

 private:
  bool param_truthy(ElementId model, const Locals& params, const std::string& name) {
    if (auto it = overrides_.find(name); it != overrides_.end()) return truthy(it->second);
    if (auto it = params.find(name); it != params.end()) return truthy(it->second);
    const NodeInfo* n = st_.find_node(model);
    if (!n) return false;
    auto it = n->state.find(name);
    return it != n->state.end() && truthy(from_json(it->second));
  }

  static void number(RenderNode& n, int& ref) {
    n.ref = ref++;
    for (RenderNode& c : n.children) number(c, ref);
  }

  ExprPtr expr(const std::string& source) {
    auto it = exprs_.find(source);
    if (it != exprs_.end()) return it->second;
    return exprs_[source] = parse_expression(source);
  }

  ExprPtr text_expr(const std::string& text) {
    auto it = texts_.find(text);
    if (it != texts_.end()) return it->second;
    return texts_[text] = parse_template_text(text);
  }

  Value eval(const std::string& source, const EvalContext& ctx) { return evaluate(*expr(source), ctx); }

  std::string eval_text(const std::string& text, const EvalContext& ctx) {
    if (text.find("${") == std::string::npos) return text;
    return display_text(st_, evaluate(*text_expr(text), ctx));
  }

  std::optional<RenderNode> element_node(ElementId e, const Locals& inherited, bool top) {
    rendered_.insert(e);
    const View* v = nullptr;
    try {
      v = resolve_view(st_, e, vp_);
    } catch (const Error& err) {
      RenderNode n = default_node(e, top);
      n.children.insert(n.children.begin(), badge(e, err.what()));
      return n;
    }
    if (v && v->options.exclude) return std::nullopt;
    if (!v) return default_node(e, top);
    return view_node(e, v, inherited, top, nullptr);
  }

  void add_frame_and_markers(RenderNode& n, ElementId e, bool top) {
    const NodeInfo* info = st_.find_node(e);
    if (!info) return;
    if (top) n.frame = frame_of(*info);
    auto it = info->state.find(kMarkerKey);
    if (it == info->state.end() || !it->second.is_array()) return;
    for (const auto& m : it->second) {
      RenderNode b = badge(e, m.value("message", ""));
      b.class_name = "marker " + m.value("severity", "error");
      n.children.push_back(std::move(b));
    }
  }

  RenderNode default_node(ElementId e, bool top) {
    RenderNode n;
    n.kind = "view";
    n.element = e;
    n.class_name = "default";
    RenderNode t;
    t.kind = "text";
    t.element = e;
    auto name = element_name(st_, e);
    const Element& el = st_.elements.at(e);
    std::string cls = kind_of(el) == ElementKind::Object ? class_name_of(st_, e) : std::string(to_string(kind_of(el)));
    t.text = name ? *name + " : " + cls : cls;
    n.children.push_back(std::move(t));
    add_frame_and_markers(n, e, top);
    return n;
  }

  RenderNode view_node(ElementId e, const View* v, const Locals& inherited, bool top, Locals* params_out) {
    RenderNode n;
    n.kind = "view";
    n.element = e;
    n.view = v->name;
    for (const auto& [k, s] : v->style) n.style[k] = s.value;
    EvalContext ctx = EvalContext::for_element(st_, e);
    ctx.view = ViewRef{viewpoint_of_view(st_, v, vp_), v->id};
    ctx.locals = inherited;
    for (const ViewParam& p : v->params) {
      if (auto it = overrides_.find(p.name); it != overrides_.end()) {
        ctx.locals[p.name] = it->second;
        continue;
      }
      try {
        ctx.locals[p.name] = eval(p.expression, ctx);
      } catch (const Error& err) {
        ctx.locals[p.name] = Value();
        n.children.push_back(badge(e, "parameter " + p.name + ": " + err.what()));
      }
    }
    if (params_out) *params_out = ctx.locals;
    const TemplateNode& t = v->templ;
    if (t.kind == TemplateKind::ViewRoot) {
      try {
        n.class_name = eval_text(t.prop_or("className", ""), ctx);
      } catch (const Error& err) {
        n.children.push_back(badge(e, err.what()));
      }
      for (const TemplateNode& c : t.children) emit(c, ctx, n.children, false);
    } else {
      emit(t, ctx, n.children, false);
    }
    add_frame_and_markers(n, e, top);
    return n;
  }

  ElementId as_element(const Value& v) {
    if (auto* id = v.as<ElementId>()) return *id;
    if (auto* n = v.as<NodeRef>()) return n->id;
    return {};
  }

  void emit(const TemplateNode& t, EvalContext& ctx, std::vector<RenderNode>& out, bool guarded) {
    ElementId self = as_element(ctx.data);
    try {
      emit_inner(t, ctx, out, guarded);
    } catch (const Error& err) {
      out.push_back(badge(self, err.what()));
    }
  }

  void emit_inner(const TemplateNode& t, EvalContext& ctx, std::vector<RenderNode>& out, bool guarded) {
    ElementId self = as_element(ctx.data);
    RenderNode n;
    n.element = self;
    n.guarded = guarded;
    switch (t.kind) {
      case TemplateKind::ViewRoot:
      case TemplateKind::Box: {
        n.kind = "box";
        n.class_name = eval_text(t.prop_or("className", ""), ctx);
        for (const TemplateNode& c : t.children) emit(c, ctx, n.children, false);
        break;
      }
      case TemplateKind::Text:
        n.kind = "text";
        n.text = eval_text(t.prop_or("text", ""), ctx);
        break;
      case TemplateKind::If: {
        if (!truthy(eval(t.prop_or("test", "false"), ctx))) return;
        for (const TemplateNode& c : t.children) emit(c, ctx, out, true);
        return;
      }
      case TemplateKind::Repeat: {
        Value items = eval(t.prop_or("items", "[]"), ctx);
        if (items.is_null()) return;
        const ValueList* list = items.list();
        if (!list) fail(ErrorCode::TypeMismatch, "repeat over a " + std::string(items.type_name()));
        const std::string var = t.prop_or("as", "item");
        Locals saved = ctx.locals;
        for (std::size_t i = 0; i < list->size(); ++i) {
          ctx.locals[var] = (*list)[i];
          ctx.locals["index"] = static_cast<std::int64_t>(i);
          for (const TemplateNode& c : t.children) emit(c, ctx, out, guarded);
        }
        ctx.locals = std::move(saved);
        return;
      }
      case TemplateKind::DefaultNode: {
        Value v = eval(t.prop_or("data", "data"), ctx);
        std::vector<Value> items;
        if (const ValueList* l = v.list()) {
          items = *l;
        } else {
          items.push_back(v);
        }
        for (const Value& item : items) {
          ElementId id = as_element(item);
          if (!id || !st_.find(id) || rendered_.count(id)) continue;
          if (auto child = element_node(id, ctx.locals, false)) out.push_back(std::move(*child));
        }
        return;
      }
      case TemplateKind::Edge: {
        n.kind = "edge";
        n.class_name = t.prop_or("view", "edge");
        n.start = as_element(eval(t.prop_or("start", "node"), ctx));
        n.end = as_element(eval(t.prop_or("end", "null"), ctx));
        const NodeInfo* a = n.start ? st_.find_node(n.start) : nullptr;
        const NodeInfo* b = n.end ? st_.find_node(n.end) : nullptr;
        if (!a || !b) fail(ErrorCode::NullAccess, "edge endpoint has no node");
        Rect ra = frame_of(*a);
        Rect rb = frame_of(*b);
        double dx = (rb.x + rb.width / 2) - (ra.x + ra.width / 2);
        double dy = (rb.y + rb.height / 2) - (ra.y + ra.height / 2);
        auto p = anchor(ra, dx, dy);
        auto q = anchor(rb, -dx, -dy);
        n.segment = {p[0], p[1], q[0], q[1]};
        break;
      }
      case TemplateKind::Input:
      case TemplateKind::Selector: {
        const bool selector = t.kind == TemplateKind::Selector;
        n.kind = selector ? "selector" : "input";
        Value target = eval(t.prop_or("data", "data"), ctx);
        ElementId id = as_element(target);
        const std::string field = t.prop_or("field", "value");
        ElementId object;
        std::string feature;
        if (const DValue* dv = id ? st_.find_as<DValue>(id) : nullptr) {
          object = dv->owner;
          feature = std::string(feature_name(st_, dv->feature));
        } else if (id && st_.find_as<DObject>(id)) {
          object = id;
          feature = field;
        } else {
          fail(ErrorCode::NullAccess, std::string(selector ? "selector" : "input") + " has no target");
        }
        auto f = find_feature(st_, st_.get_as<DObject>(object).instance_of, feature);
        if (!f) fail(ErrorCode::Navigation, "no feature '" + feature + "'");
        n.affordance.kind = selector ? AffordanceKind::Selector : AffordanceKind::Input;
        n.affordance.object = object;
        n.affordance.feature = feature;
        n.element = object;
        const DValue* cur = value_of(st_, object, feature);
        std::string text;
        if (cur) {
          for (std::size_t i = 0; i < cur->values.size(); ++i) {
            text += (i ? "," : "") + display_text(st_, from_scalar(cur->values[i]));
          }
        }
        n.text = text;
        if (selector) {
          const DAttribute* a = st_.find_as<DAttribute>(*f);
          if (!a || !a->type.is_enum()) fail(ErrorCode::TypeMismatch, "selector needs an enumeration attribute");
          n.affordance.options = st_.get_as<DEnum>(a->type.enumeration).literals;
        }
        if (t.prop_or("autosize", "false") == "true") {
          n.style["width"] = format_number(8.0 * static_cast<double>(std::max<std::size_t>(1, text.size())));
        }
        break;
      }
      case TemplateKind::Toggle:
      case TemplateKind::Slider: {
        const bool slider = t.kind == TemplateKind::Slider;
        n.kind = slider ? "slider" : "toggle";
        const std::string name = t.prop_or("name", "");
        if (name.empty()) fail(ErrorCode::InvalidArgument, "control without a name");
        n.affordance.kind = slider ? AffordanceKind::Slider : AffordanceKind::Toggle;
        n.affordance.scope = ctx.node ? ctx.node : self;
        n.affordance.param = name;
        Value current;
        if (auto it = ctx.locals.find(name); it != ctx.locals.end()) {
          current = it->second;
        } else if (const NodeInfo* info = st_.find_node(n.affordance.scope)) {
          if (auto s = info->state.find(name); s != info->state.end()) current = from_json(s->second);
        }
        std::string title = eval_text(t.prop_or("title", name), ctx);
        if (slider) {
          n.affordance.min = std::stod(t.prop_or("min", "0"));
          n.affordance.max = std::stod(t.prop_or("max", "1"));
          n.text = title + ": " + display_text(st_, current);
        } else {
          n.text = title;
          n.class_name = truthy(current) ? "on" : "off";
        }
        break;
      }
      case TemplateKind::Control: {
        n.kind = "control";
        n.text = eval_text(t.prop_or("title", ""), ctx);
        for (const TemplateNode& c : t.children) emit(c, ctx, n.children, false);
        break;
      }
      case TemplateKind::Decorators:
        return;
    }
    out.push_back(std::move(n));
  }

  const State& st_;
  ElementId vp_;
  const ParamOverrides& overrides_;
  std::set<ElementId> rendered_;
  std::map<std::string, ExprPtr> exprs_;
  std::map<std::string, ExprPtr> texts_;
};

// --- SVG ---

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double d) { return format_number(std::round(d * 100) / 100); }

constexpr double kLine = 16;

struct SvgWriter {
  std::string out;
  std::vector<const RenderNode*> edges;

  void line(int indent, const std::string& s) {
    out.append(static_cast<std::size_t>(indent) * 2, ' ');
    out += s;
    out += '\n';
  }

  std::string label(const RenderNode& n) {
    if (n.kind == "toggle") return "[" + std::string(n.class_name == "on" ? "x" : " ") + "] " + n.text;
    if (n.kind == "badge") return "! " + n.text;
    if (n.kind == "selector") return n.text + " v";
    return n.text;
  }

  // Content flows top to bottom inside the enclosing frame.
  void content(const RenderNode& n, int indent, double& y) {
    if (n.kind == "edge") {
      edges.push_back(&n);
      return;
    }
    const bool has_text = n.kind == "text" || n.kind == "input" || n.kind == "selector" || n.kind == "toggle" ||
                          n.kind == "slider" || n.kind == "badge" || (n.kind == "control" && !n.text.empty());
    if (has_text) {
      y += kLine;
      std::string cls = n.kind + (n.class_name.empty() ? "" : " " + n.class_name);
      line(indent, "<text class=\"" + xml_escape(cls) + "\" x=\"6\" y=\"" + num(y) + "\">" + xml_escape(label(n)) +
                       "</text>");
    }
    if (n.children.empty()) return;
    if (n.kind == "box" || n.kind == "view" || n.kind == "control") {
      std::string cls = n.kind + (n.class_name.empty() ? "" : " " + n.class_name);
      line(indent, "<g class=\"" + xml_escape(cls) + "\">");
      for (const RenderNode& c : n.children) content(c, indent + 1, y);
      line(indent, "</g>");
    } else {
      for (const RenderNode& c : n.children) content(c, indent, y);
    }
  }

  void top(const RenderNode& n, int indent) {
    if (n.kind == "edge") {
      edges.push_back(&n);
      return;
    }
    std::string cls = n.kind + (n.class_name.empty() ? "" : " " + n.class_name);
    std::string attrs = " class=\"" + xml_escape(cls) + "\" data-element=\"" + n.element.str() + "\"";
    if (!n.view.empty()) attrs += " data-view=\"" + xml_escape(n.view) + "\"";
    double y = 0;
    if (n.frame) {
      line(indent, "<g" + attrs + " transform=\"translate(" + num(n.frame->x) + " " + num(n.frame->y) + ")\">");
      line(indent + 1, "<rect class=\"frame\" width=\"" + num(n.frame->width) + "\" height=\"" +
                           num(n.frame->height) + "\"/>");
    } else {
      line(indent, "<g" + attrs + ">");
    }
    for (const RenderNode& c : n.children) content(c, indent + 1, y);
    line(indent, "</g>");
  }
};

}  // namespace

const RenderNode* RenderTree::find(int ref) const {
  std::vector<const RenderNode*> stack{&root};
  while (!stack.empty()) {
    const RenderNode* n = stack.back();
    stack.pop_back();
    if (n->ref == ref) return n;
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(&*it);
  }
  return nullptr;
}

std::vector<const RenderNode*> RenderTree::all(std::string_view kind) const {
  std::vector<const RenderNode*> out;
  std::vector<const RenderNode*> stack{&root};
  while (!stack.empty()) {
    const RenderNode* n = stack.back();
    stack.pop_back();
    if (n->kind == kind) out.push_back(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

const View* resolve_view(const State& state, ElementId element, ElementId viewpoint) {
  resolve(state, element);
  auto it = state.viewpoints.find(viewpoint);
  if (it != state.viewpoints.end()) {
    for (const View& v : it->second.views) {
      if (view_applies(state, v, it->first, element)) return &v;
    }
  }
  const Viewpoint* def = default_viewpoint(state);
  if (def && def->id != viewpoint) {
    for (const View& v : def->views) {
      if (view_applies(state, v, def->id, element)) return &v;
    }
  }
  return nullptr;
}

ElementId viewpoint_of_view(const State& state, const View* view, ElementId preferred) {
  if (!view) return preferred;
  auto it = state.viewpoints.find(preferred);
  if (it != state.viewpoints.end() && it->second.find_view(view->id)) return preferred;
  for (const auto& [id, vp] : state.viewpoints) {
    if (vp.find_view(view->id)) return id;
  }
  return preferred;
}

EvalContext view_context(const State& state, ElementId element, ElementId viewpoint) {
  EvalContext ctx = EvalContext::for_element(state, element);
  if (const View* v = resolve_view(state, element, viewpoint)) {
    ctx.view = ViewRef{viewpoint_of_view(state, v, viewpoint), v->id};
  }
  return ctx;
}

RenderTree render(const State& state, ElementId model, ElementId viewpoint, const ParamOverrides& overrides) {
  return Renderer(state, viewpoint, overrides).run(model);
}

std::string render_to_svg(const RenderTree& tree) {
  double width = 800;
  double height = 600;
  for (const RenderNode& n : tree.root.children) {
    if (!n.frame) continue;
    width = std::max(width, n.frame->x + n.frame->width + 40);
    height = std::max(height, n.frame->y + n.frame->height + 40);
  }
  SvgWriter w;
  w.line(0, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">");
  w.line(1, "<style>.frame{fill:#fff;stroke:#333}.edge{stroke:#333;fill:none}.badge{fill:#c00}"
            "text{font:12px sans-serif}</style>");
  if (tree.grid) {
    w.line(1, "<defs>");
    w.line(2, "<pattern id=\"grid\" width=\"15\" height=\"15\" patternUnits=\"userSpaceOnUse\">");
    w.line(3, "<circle cx=\"1\" cy=\"1\" r=\"1\" fill=\"#bbb\"/>");
    w.line(2, "</pattern>");
    w.line(1, "</defs>");
    w.line(1, "<rect class=\"grid\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"url(#grid)\"/>");
  }
  w.line(1, "<g class=\"canvas\" data-element=\"" + tree.root.element.str() + "\">");
  for (const RenderNode& n : tree.root.children) w.top(n, 2);
  for (const RenderNode* e : w.edges) {
    w.line(2, "<path class=\"edge " + xml_escape(e->class_name) + "\" data-start=\"" + e->start.str() +
                  "\" data-end=\"" + e->end.str() + "\" d=\"M " + num(e->segment[0]) + " " + num(e->segment[1]) +
                  " L " + num(e->segment[2]) + " " + num(e->segment[3]) + "\"/>");
  }
  w.line(1, "</g>");
  w.line(0, "</svg>");
  return w.out;
}

std::vector<std::string> guarded_sections(const RenderTree& tree) {
  std::vector<std::string> out;
  std::vector<const RenderNode*> stack{&tree.root};
  while (!stack.empty()) {
    const RenderNode* n = stack.back();
    stack.pop_back();
    if (n->guarded && n->kind == "box") out.push_back(n->class_name);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

}  // namespace mwb
