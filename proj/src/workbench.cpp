#include "mwb/workbench.hpp"

#include <cmath>
#include <set>

#include "mwb/reflect.hpp"

namespace mwb {

bool has_validation_rules(const State& state) {
  for (const auto& [id, vp] : state.viewpoints) {
    if (!vp.validation_rules.empty()) return true;
  }
  return false;
}

void Workbench::record(const CascadeReport& r) {
  if (!tracing_) return;
  for (const FiredRule& f : r.fired) trace_.push_back(format_trace(store_.state(), f));
}

Outcome Workbench::settle(const CommitResult& commit) {
  Outcome out;
  out.commit = commit;
  if (commit.empty) return out;
  std::vector<Event> events;
  for (ElementId a : commit.affected) events.push_back(Event{Trigger::OnDataUpdate, a, std::nullopt, 0});
  out.cascade = engine_.dispatch(store_, std::move(events));
  record(out.cascade);

  if (!has_validation_rules(store_.state())) return out;
  std::set<ElementId> models;
  auto note = [&](ElementId id) {
    const DObject* o = store_.state().find_as<DObject>(id);
    if (o) models.insert(o->model);
  };
  for (ElementId a : commit.affected) note(a);
  for (ElementId a : out.cascade.touched) note(a);
  if (!commit.removed.empty() || models.empty()) {
    for (ElementId m : mwb::models(store_.state(), false)) models.insert(m);
  }
  for (ElementId m : models) {
    std::vector<Marker> ms = validate_model(store_, m);
    out.markers.insert(out.markers.end(), ms.begin(), ms.end());
  }
  out.revalidated = true;
  return out;
}

Outcome Workbench::apply(const std::function<void(Draft&)>& body, bool undoable) {
  return settle(store_.transact(author, body, undoable));
}

Outcome Workbench::apply_ops(const std::string& who, const std::vector<Op>& ops) {
  return settle(store_.commit_ops(who, ops));
}

Outcome Workbench::set_feature(ElementId object, const std::string& feature, std::vector<Scalar> values) {
  return apply([&](Draft& d) { mwb::set_feature(d, object, feature, std::move(values)); });
}

Outcome Workbench::mutate_feature(ElementId object, const std::string& feature, const FeatureEdit& edit) {
  return apply([&](Draft& d) { mwb::mutate_feature(d, object, feature, edit); });
}

Outcome Workbench::set_layout(ElementId id, double x, double y, double width, double height) {
  return apply([&](Draft& d) { mwb::set_layout(d, id, x, y, width, height); });
}

Outcome Workbench::set_state(ElementId id, const std::string& key, const nlohmann::json& value) {
  return apply([&](Draft& d) { mwb::set_state(d, id, key, value); });
}

Outcome Workbench::delete_element(ElementId id) {
  return apply([&](Draft& d) { mwb::delete_element(d, id); });
}

Outcome Workbench::co_evolve(const MetaEdit& edit, ElementId* created) {
  ElementId made;
  Outcome out = apply([&](Draft& d) { made = mwb::co_evolve(d, edit); });
  if (created) *created = made;
  return out;
}

Outcome Workbench::undo() { return settle(store_.undo()); }

Outcome Workbench::redo() { return settle(store_.redo()); }

std::vector<Marker> Workbench::validate(ElementId model) { return validate_model(store_, model); }

namespace {

void merge(CascadeReport& into, CascadeReport&& from) {
  into.transactions.insert(into.transactions.end(), from.transactions.begin(), from.transactions.end());
  into.fired.insert(into.fired.end(), from.fired.begin(), from.fired.end());
  into.errors.insert(into.errors.end(), from.errors.begin(), from.errors.end());
  for (ElementId id : from.touched) {
    if (std::find(into.touched.begin(), into.touched.end(), id) == into.touched.end()) into.touched.push_back(id);
  }
}

std::array<double, 4> geometry(const NodeInfo& n) { return {n.x, n.y, n.width, n.height}; }

}  // namespace

GestureOutcome Workbench::gesture(ElementId element, const std::vector<std::array<double, 2>>& points, bool resize) {
  const NodeInfo* start = store_.state().find_node(element);
  if (!start) fail(ErrorCode::NotFound, "no node for " + element.str());
  const NodeInfo before = *start;
  const std::size_t undo_mark = store_.undo_depth();
  GestureOutcome out;
  auto fire = [&](Trigger t, const std::array<double, 4>& g) {
    Event ev{t, element, g, 0};
    out.events.push_back(ev);
    CascadeReport r = engine_.dispatch(store_, {ev});
    record(r);
    out.transactions.insert(out.transactions.end(), r.transactions.begin(), r.transactions.end());
    merge(out.cascade, std::move(r));
  };
  fire(resize ? Trigger::OnResizeStart : Trigger::OnDragStart, geometry(before));
  for (const auto& p : points) {
    const NodeInfo& cur = *store_.state().find_node(element);
    std::array<double, 4> g = resize ? std::array<double, 4>{cur.x, cur.y, p[0], p[1]}
                                     : std::array<double, 4>{p[0], p[1], cur.width, cur.height};
    CommitResult c = store_.transact(author, [&](Draft& d) { mwb::set_layout(d, element, g[0], g[1], g[2], g[3]); });
    if (!c.empty) out.transactions.push_back(c.id);
    fire(resize ? Trigger::WhileResizing : Trigger::WhileDragging, g);
  }
  const NodeInfo& end = *store_.state().find_node(element);
  fire(resize ? Trigger::OnResizeEnd : Trigger::OnDragEnd, geometry(end));
  if (!end.same_geometry(before)) {
    Event ev{Trigger::OnDataUpdate, element, std::nullopt, 0};
    out.events.push_back(ev);
    CommitResult synthetic;
    synthetic.empty = false;
    synthetic.affected = {element};
    Outcome o = settle(synthetic);
    out.transactions.insert(out.transactions.end(), o.cascade.transactions.begin(), o.cascade.transactions.end());
    merge(out.cascade, std::move(o.cascade));
  }
  store_.group_undo_since(undo_mark);
  return out;
}

GestureOutcome Workbench::simulate_drag(ElementId element, const std::vector<std::array<double, 2>>& path) {
  return gesture(element, path, false);
}

GestureOutcome Workbench::simulate_resize(ElementId element, const std::vector<std::array<double, 2>>& sizes) {
  return gesture(element, sizes, true);
}

Outcome Workbench::apply_projectional_edit(const Affordance& target, const std::string& text) {
  const State& st = store_.state();
  if (target.kind != AffordanceKind::Input && target.kind != AffordanceKind::Selector) {
    fail(ErrorCode::InvalidArgument, "not an editable field");
  }
  const DObject& o = st.get_as<DObject>(target.object);
  auto f = find_feature(st, o.instance_of, target.feature);
  if (!f) fail(ErrorCode::NotFound, "no feature '" + target.feature + "'");
  const DAttribute* attr = st.find_as<DAttribute>(*f);
  if (!attr) fail(ErrorCode::InvalidArgument, "'" + target.feature + "' is a reference");
  if (attr->upper != 1) fail(ErrorCode::InvalidArgument, "'" + target.feature + "' holds several values");
  if (target.kind == AffordanceKind::Selector) {
    if (!attr->type.is_enum()) fail(ErrorCode::TypeMismatch, "'" + target.feature + "' is not an enumeration");
    const auto& lits = st.get_as<DEnum>(attr->type.enumeration).literals;
    if (std::find(lits.begin(), lits.end(), text) == lits.end()) {
      fail(ErrorCode::TypeMismatch, "'" + text + "' is not a literal of " + st.get_as<DEnum>(attr->type.enumeration).name);
    }
  }
  Scalar literal = parse_literal(st, *attr, text);
  return set_feature(target.object, target.feature, {literal});
}

namespace {

const TemplateNode* find_control(const TemplateNode& t, const std::string& name) {
  if ((t.kind == TemplateKind::Toggle || t.kind == TemplateKind::Slider) && t.prop_or("name", "") == name) return &t;
  for (const TemplateNode& c : t.children) {
    if (const TemplateNode* hit = find_control(c, name)) return hit;
  }
  return nullptr;
}

}  // namespace

Outcome Workbench::set_control_parameter(ElementId scope, ElementId viewpoint, const std::string& name,
                                         const Value& value) {
  const View* v = resolve_view(store_.state(), scope, viewpoint);
  const TemplateNode* control = v ? find_control(v->templ, name) : nullptr;
  if (!control) fail(ErrorCode::NotFound, "no control '" + name + "' in the view of " + scope.str());
  nlohmann::json stored;
  if (control->kind == TemplateKind::Toggle) {
    const bool* b = value.as<bool>();
    if (!b) fail(ErrorCode::TypeMismatch, "toggle '" + name + "' takes true or false");
    stored = *b;
  } else {
    if (!value.is_number()) fail(ErrorCode::TypeMismatch, "slider '" + name + "' takes a number");
    double x = value.number();
    double lo = std::stod(control->prop_or("min", "0"));
    double hi = std::stod(control->prop_or("max", "1"));
    if (x < lo || x > hi || x != std::floor(x)) {
      fail(ErrorCode::OutOfRange, "slider '" + name + "' accepts integers in [" + format_number(lo) + ", " +
                                      format_number(hi) + "]");
    }
    stored = static_cast<std::int64_t>(x);
  }
  return set_state(scope, name, stored);
}

}  // namespace mwb
