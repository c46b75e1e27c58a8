#include "mwb/edits.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "mwb/reflect.hpp"

namespace mwb {

namespace {

template <class T>
T copy_of(const Draft& d, ElementId id) {
  return d.state().get_as<T>(id);
}

void require_name(const std::string& name, std::string_view what) {
  if (name.empty()) fail(ErrorCode::InvalidArgument, std::string(what) + " name must not be empty");
}

void check_bounds(std::int32_t lower, std::int32_t upper) {
  if (lower < 0) fail(ErrorCode::InvalidArgument, "lower bound must be non-negative");
  if (upper != kUnbounded && (upper < 1 || lower > upper)) {
    fail(ErrorCode::InvalidArgument,
         "invalid bounds [" + std::to_string(lower) + ".." + std::to_string(upper) + "]");
  }
}

void add_node(Draft& d, ElementId id) {
  NodeInfo n;
  n.element = id;
  d.put_node(std::move(n));
}

std::vector<ElementId> family_of(const State& state, ElementId cls) {
  std::vector<ElementId> out;
  for (const auto& [id, e] : state.elements) {
    if (std::holds_alternative<DClass>(e) && is_subclass_of(state, id, cls)) out.push_back(id);
  }
  return out;
}

void check_feature_name_free(const State& state, ElementId cls, const std::string& name, ElementId except = {}) {
  for (ElementId c : family_of(state, cls)) {
    auto f = find_feature(state, c, name);
    if (f && *f != except) {
      fail(ErrorCode::NameClash, "feature '" + name + "' already exists on " + state.get_as<DClass>(c).name);
    }
  }
}

void check_classifier_name_free(const State& state, ElementId package, const std::string& name, ElementId except = {}) {
  for (ElementId c : state.get_as<DPackage>(package).classifiers) {
    if (c == except) continue;
    auto n = element_name(state, c);
    if (n && *n == name) {
      fail(ErrorCode::NameClash, "classifier '" + name + "' already exists in " + state.get_as<DPackage>(package).name);
    }
  }
}

std::vector<Scalar> default_values(const State& state, ElementId feature) {
  if (const DAttribute* a = state.find_as<DAttribute>(feature)) {
    if (a->default_value) return {*a->default_value};
  }
  return {};
}

ElementId make_value(Draft& d, ElementId object, ElementId feature, std::vector<Scalar> values) {
  const ElementId vid = d.fresh_id();
  d.put(DValue{vid, object, feature, std::move(values)});
  DObject o = copy_of<DObject>(d, object);
  o.features[feature] = vid;
  d.put(std::move(o));
  return vid;
}

void drop_value(Draft& d, ElementId object, ElementId feature) {
  DObject o = copy_of<DObject>(d, object);
  auto it = o.features.find(feature);
  if (it == o.features.end()) return;
  const ElementId vid = it->second;
  o.features.erase(it);
  d.put(std::move(o));
  d.erase(vid);
}

void set_roots(Draft& d, ElementId model, ElementId object, bool root) {
  DModel m = copy_of<DModel>(d, model);
  auto it = std::find(m.root_objects.begin(), m.root_objects.end(), object);
  if (root && it == m.root_objects.end()) m.root_objects.push_back(object);
  if (!root && it != m.root_objects.end()) m.root_objects.erase(it);
  d.put(std::move(m));
}

bool is_ancestor(const State& state, ElementId candidate, ElementId object) {
  // Walks the container chain of `object`; bounded by the object count.
  std::size_t guard = state.elements.size();
  ElementId cur = object;
  while (cur && guard-- > 0) {
    if (cur == candidate) return true;
    const DObject* o = state.find_as<DObject>(cur);
    if (!o || !o->container) return false;
    cur = o->container->parent;
  }
  return false;
}

void remove_from_slot(Draft& d, ElementId owner, ElementId feature, ElementId target) {
  const DObject& o = d.state().get_as<DObject>(owner);
  auto it = o.features.find(feature);
  if (it == o.features.end()) return;
  DValue v = copy_of<DValue>(d, it->second);
  std::erase(v.values, Scalar{target});
  d.put(std::move(v));
}

void attach(Draft& d, ElementId child, ElementId parent, ElementId reference) {
  DObject c = copy_of<DObject>(d, child);
  if (c.container && c.container->parent == parent && c.container->reference == reference) return;
  if (is_ancestor(d.state(), child, parent)) {
    fail(ErrorCode::InvalidArgument, "containing " + child.str() + " in " + parent.str() + " would form a cycle");
  }
  if (c.container) remove_from_slot(d, c.container->parent, c.container->reference, child);
  c.container = Containment{parent, reference};
  d.put(c);
  set_roots(d, c.model, child, false);
}

std::vector<Scalar> checked_values(const State& state, const DObject& owner, ElementId feature,
                                   const std::vector<Scalar>& values) {
  std::vector<Scalar> out;
  out.reserve(values.size());
  if (const DAttribute* a = state.find_as<DAttribute>(feature)) {
    for (const Scalar& s : values) out.push_back(coerce_literal(state, *a, s));
    return out;
  }
  const DReference& r = state.get_as<DReference>(feature);
  for (const Scalar& s : values) {
    const ElementId* t = std::get_if<ElementId>(&s);
    if (!t) fail(ErrorCode::TypeMismatch, "reference '" + r.name + "' expects element ids");
    const DObject* target = state.find_as<DObject>(*t);
    if (!target) fail(ErrorCode::NotFound, "no object " + t->str());
    if (target->model != owner.model) {
      fail(ErrorCode::TypeMismatch, t->str() + " belongs to another model");
    }
    if (!is_subclass_of(state, target->instance_of, r.target)) {
      fail(ErrorCode::TypeMismatch, t->str() + " is not a " + state.get_as<DClass>(r.target).name);
    }
    out.push_back(*t);
  }
  if (r.is_containment) {
    std::set<Scalar> seen;
    for (const Scalar& s : out) {
      if (!seen.insert(s).second) {
        fail(ErrorCode::InvalidArgument, "object listed twice in containment '" + r.name + "'");
      }
    }
  }
  return out;
}

void set_values(Draft& d, ElementId object, ElementId feature, const std::vector<Scalar>& values) {
  const DObject owner = copy_of<DObject>(d, object);
  std::vector<Scalar> fresh = checked_values(d.state(), owner, feature, values);
  auto slot = owner.features.find(feature);
  if (slot == owner.features.end()) {
    make_value(d, object, feature, {});
    slot = d.state().get_as<DObject>(object).features.find(feature);
  }
  const ElementId vid = slot->second;
  DValue v = copy_of<DValue>(d, vid);
  const std::vector<Scalar> old = v.values;
  const DReference* ref = d.state().find_as<DReference>(feature);
  if (ref && ref->is_containment) {
    for (const Scalar& s : old) {
      if (std::find(fresh.begin(), fresh.end(), s) == fresh.end()) {
        DObject c = copy_of<DObject>(d, std::get<ElementId>(s));
        c.container.reset();
        d.put(c);
        set_roots(d, c.model, c.id, true);
      }
    }
    for (const Scalar& s : fresh) {
      if (std::find(old.begin(), old.end(), s) == old.end()) attach(d, std::get<ElementId>(s), object, feature);
    }
  }
  v = copy_of<DValue>(d, vid);
  v.values = std::move(fresh);
  d.put(std::move(v));
}

Scalar json_scalar(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  fail(ErrorCode::TypeMismatch, "not a literal: " + j.dump());
}

ElementId create_object(Draft& d, ElementId model, ElementId cls, const nlohmann::json& init);

std::vector<Scalar> init_values(Draft& d, ElementId object, ElementId model, ElementId feature,
                                const nlohmann::json& j) {
  std::vector<nlohmann::json> items;
  if (j.is_array()) {
    items.assign(j.begin(), j.end());
  } else if (!j.is_null()) {
    items.push_back(j);
  }
  std::vector<Scalar> out;
  const DReference* ref = d.state().find_as<DReference>(feature);
  for (const nlohmann::json& item : items) {
    if (!ref) {
      out.push_back(json_scalar(item));
    } else if (item.is_string()) {
      auto id = ElementId::parse(item.get<std::string>());
      if (!id) fail(ErrorCode::TypeMismatch, "reference '" + ref->name + "' expects \"#n\" ids, got " + item.dump());
      out.push_back(*id);
    } else if (item.is_object()) {
      if (!ref->is_containment) {
        fail(ErrorCode::TypeMismatch, "nested objects are only allowed in containment references");
      }
      ElementId cls = ref->target;
      nlohmann::json sub = item;
      if (auto it = sub.find("$class"); it != sub.end()) {
        auto found = find_classifier(d.state(), metamodel_of(d.state(), model), it->get<std::string>());
        if (!found || !d.state().find_as<DClass>(*found)) {
          fail(ErrorCode::NotFound, "no class '" + it->get<std::string>() + "'");
        }
        cls = *found;
        sub.erase(it);
      }
      out.push_back(create_object(d, model, cls, sub));
    } else {
      fail(ErrorCode::TypeMismatch, "reference '" + ref->name + "' expects ids or objects, got " + item.dump());
    }
  }
  (void)object;
  return out;
}

ElementId create_object(Draft& d, ElementId model, ElementId cls, const nlohmann::json& init) {
  const State& s = d.state();
  const DClass& k = s.get_as<DClass>(cls);
  if (k.flags.is_abstract || k.flags.is_interface) {
    fail(ErrorCode::NotInstantiable, k.name + " is " + (k.flags.is_abstract ? "abstract" : "an interface"));
  }
  if (k.flags.is_singleton) {
    for (ElementId o : model_objects(s, model)) {
      if (s.get_as<DObject>(o).instance_of == cls) fail(ErrorCode::InvalidArgument, k.name + " is a singleton");
    }
  }
  if (!init.is_object()) fail(ErrorCode::TypeMismatch, "object initializer must be a map");
  for (const auto& [key, value] : init.items()) {
    if (!find_feature(s, cls, key)) fail(ErrorCode::InvalidArgument, "unknown feature '" + key + "' on " + k.name);
  }
  const ElementId id = d.fresh_id();
  d.put(DObject{id, model, cls, {}, std::nullopt});
  add_node(d, id);
  set_roots(d, model, id, true);
  const FeatureSet fs = class_features(d.state(), cls);
  std::vector<ElementId> all = fs.attributes;
  all.insert(all.end(), fs.references.begin(), fs.references.end());
  for (ElementId f : all) make_value(d, id, f, default_values(d.state(), f));
  for (ElementId f : all) {
    const std::string name(feature_name(d.state(), f));
    auto it = init.find(name);
    if (it == init.end()) continue;
    std::vector<Scalar> values = init_values(d, id, model, f, *it);
    if (!within_upper(values.size(), feature_upper(d.state(), f))) {
      fail(ErrorCode::BoundExceeded, "too many values for '" + name + "'");
    }
    set_values(d, id, f, values);
  }
  return id;
}

ElementId first_package(Draft& d, ElementId target) {
  const Element& e = resolve(d.state(), target);
  if (std::holds_alternative<DPackage>(e)) return target;
  const DModel* m = std::get_if<DModel>(&e);
  if (!m || !m->is_metamodel) fail(ErrorCode::InvalidArgument, target.str() + " is not a metamodel or package");
  if (!m->packages.empty()) return m->packages.front();
  return add_package(d, target, m->name);
}

void delete_object_tree(Draft& d, ElementId root) {
  std::vector<ElementId> doomed;
  std::vector<ElementId> stack{root};
  while (!stack.empty()) {
    ElementId cur = stack.back();
    stack.pop_back();
    doomed.push_back(cur);
    for (ElementId c : contained_children(d.state(), cur)) stack.push_back(c);
  }
  const std::set<ElementId> gone(doomed.begin(), doomed.end());
  // Purge references held by survivors, the container slot included.
  std::vector<DValue> touched;
  for (const auto& [id, e] : d.state().elements) {
    const DValue* v = std::get_if<DValue>(&e);
    if (!v || gone.count(v->owner)) continue;
    bool hit = false;
    for (const Scalar& s : v->values) {
      const ElementId* t = std::get_if<ElementId>(&s);
      if (t && gone.count(*t)) hit = true;
    }
    if (!hit) continue;
    DValue copy = *v;
    std::erase_if(copy.values, [&](const Scalar& s) {
      const ElementId* t = std::get_if<ElementId>(&s);
      return t && gone.count(*t);
    });
    touched.push_back(std::move(copy));
  }
  for (DValue& v : touched) d.put(std::move(v));
  const DObject& top = d.state().get_as<DObject>(root);
  set_roots(d, top.model, root, false);
  for (ElementId o : doomed) {
    const DObject obj = copy_of<DObject>(d, o);
    for (const auto& [f, v] : obj.features) d.erase(v);
    d.erase_node(o);
    d.erase(o);
  }
}

std::string rewrite_dollar(const std::string& text, const std::string& from, const std::string& to) {
  auto ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  const std::string needle = "$" + from;
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = text.find(needle, pos);
    if (hit == std::string::npos) break;
    const std::size_t end = hit + needle.size();
    out.append(text, pos, hit - pos);
    if (end < text.size() && ident(text[end])) {
      out += needle;
    } else {
      out += "$" + to;
    }
    pos = end;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

void rewrite_template(TemplateNode& t, const std::string& from, const std::string& to) {
  for (auto& [k, v] : t.props) v = rewrite_dollar(v, from, to);
  for (TemplateNode& c : t.children) rewrite_template(c, from, to);
}

void rewrite_viewpoints(Draft& d, const std::string& from, const std::string& to) {
  std::vector<Viewpoint> changed;
  for (const auto& [id, vp] : d.state().viewpoints) {
    Viewpoint copy = vp;
    for (View& v : copy.views) {
      v.apply_to = rewrite_dollar(v.apply_to, from, to);
      rewrite_template(v.templ, from, to);
      for (ViewParam& p : v.params) p.expression = rewrite_dollar(p.expression, from, to);
    }
    for (Rule& r : copy.rules) {
      r.condition = rewrite_dollar(r.condition, from, to);
      r.action = rewrite_dollar(r.action, from, to);
    }
    for (ValidationRule& r : copy.validation_rules) {
      r.applies_to = rewrite_dollar(r.applies_to, from, to);
      r.check = rewrite_dollar(r.check, from, to);
    }
    if (!(copy == vp)) changed.push_back(std::move(copy));
  }
  for (Viewpoint& vp : changed) d.put_viewpoint(std::move(vp));
}

void reject_orphaning(const State& state, ElementId feature, const std::vector<ElementId>& objects) {
  const DReference* r = state.find_as<DReference>(feature);
  if (!r || !r->is_containment) return;
  for (ElementId o : objects) {
    const DObject& obj = state.get_as<DObject>(o);
    auto it = obj.features.find(feature);
    if (it != obj.features.end() && !state.get_as<DValue>(it->second).values.empty()) {
      fail(ErrorCode::Rejected, "removing containment '" + r->name + "' would orphan objects of " + o.str());
    }
  }
}

std::set<ElementId> all_features(const State& state, ElementId cls) {
  FeatureSet fs = class_features(state, cls);
  std::set<ElementId> out(fs.attributes.begin(), fs.attributes.end());
  out.insert(fs.references.begin(), fs.references.end());
  return out;
}

// Brings every instance's DValue set in line with its class's features.
void sync_instance_values(Draft& d, ElementId cls) {
  for (ElementId o : instances_everywhere(d.state(), cls)) {
    const DObject obj = copy_of<DObject>(d, o);
    const std::set<ElementId> want = all_features(d.state(), obj.instance_of);
    std::vector<ElementId> stale;
    for (const auto& [f, v] : obj.features) {
      if (!want.count(f)) stale.push_back(f);
    }
    for (ElementId f : stale) {
      reject_orphaning(d.state(), f, {o});
      drop_value(d, o, f);
    }
    const FeatureSet fs = class_features(d.state(), obj.instance_of);
    std::vector<ElementId> ordered = fs.attributes;
    ordered.insert(ordered.end(), fs.references.begin(), fs.references.end());
    for (ElementId f : ordered) {
      if (!obj.features.count(f)) make_value(d, o, f, default_values(d.state(), f));
    }
  }
}

struct CoEvolver {
  Draft& d;

  ElementId operator()(const meta_edit::AddClass& e) const { return add_class(d, e.target, e.name, e.flags); }

  ElementId operator()(const meta_edit::AddAttribute& e) const {
    require_name(e.name, "attribute");
    check_bounds(e.lower, e.upper);
    d.state().get_as<DClass>(e.owner);
    check_feature_name_free(d.state(), e.owner, e.name);
    if (e.type.is_enum()) d.state().get_as<DEnum>(e.type.enumeration);
    const ElementId id = d.fresh_id();
    DAttribute a{id, e.name, e.owner, e.type, e.lower, e.upper, std::nullopt};
    if (e.default_value) a.default_value = coerce_literal(d.state(), a, *e.default_value);
    d.put(a);
    DClass c = copy_of<DClass>(d, e.owner);
    c.attributes.push_back(id);
    d.put(std::move(c));
    sync_instance_values(d, e.owner);
    return id;
  }

  ElementId operator()(const meta_edit::AddReference& e) const {
    require_name(e.name, "reference");
    check_bounds(e.lower, e.upper);
    d.state().get_as<DClass>(e.owner);
    d.state().get_as<DClass>(e.target);
    if (model_of(d.state(), e.target) != model_of(d.state(), e.owner)) {
      fail(ErrorCode::InvalidArgument, "reference target must be in the same metamodel");
    }
    check_feature_name_free(d.state(), e.owner, e.name);
    const ElementId id = d.fresh_id();
    d.put(DReference{id, e.name, e.owner, e.target, e.lower, e.upper, e.is_containment});
    DClass c = copy_of<DClass>(d, e.owner);
    c.references.push_back(id);
    d.put(std::move(c));
    sync_instance_values(d, e.owner);
    return id;
  }

  ElementId operator()(const meta_edit::RemoveFeature& e) const {
    const Element& fe = resolve(d.state(), e.feature);
    ElementId owner;
    if (const auto* a = std::get_if<DAttribute>(&fe)) {
      owner = a->owner;
    } else if (const auto* r = std::get_if<DReference>(&fe)) {
      owner = r->owner;
    } else {
      fail(ErrorCode::TypeMismatch, e.feature.str() + " is not a feature");
    }
    const std::vector<ElementId> objects = instances_everywhere(d.state(), owner);
    reject_orphaning(d.state(), e.feature, objects);
    for (ElementId o : objects) drop_value(d, o, e.feature);
    DClass c = copy_of<DClass>(d, owner);
    std::erase(c.attributes, e.feature);
    std::erase(c.references, e.feature);
    d.put(std::move(c));
    d.erase(e.feature);
    return {};
  }

  ElementId operator()(const meta_edit::RenameFeature& e) const {
    require_name(e.name, "feature");
    const Element& fe = resolve(d.state(), e.feature);
    std::string old;
    if (const auto* a = std::get_if<DAttribute>(&fe)) {
      old = a->name;
      if (old == e.name) return {};
      check_feature_name_free(d.state(), a->owner, e.name, e.feature);
      DAttribute copy = *a;
      copy.name = e.name;
      d.put(std::move(copy));
    } else if (const auto* r = std::get_if<DReference>(&fe)) {
      old = r->name;
      if (old == e.name) return {};
      check_feature_name_free(d.state(), r->owner, e.name, e.feature);
      DReference copy = *r;
      copy.name = e.name;
      d.put(std::move(copy));
    } else {
      fail(ErrorCode::TypeMismatch, e.feature.str() + " is not a feature");
    }
    rewrite_viewpoints(d, old, e.name);
    return {};
  }

  ElementId operator()(const meta_edit::RenameClass& e) const {
    require_name(e.name, "class");
    DClass c = copy_of<DClass>(d, e.cls);
    if (c.name == e.name) return {};
    check_classifier_name_free(d.state(), c.package, e.name, e.cls);
    c.name = e.name;
    d.put(std::move(c));
    return {};
  }

  ElementId operator()(const meta_edit::SetAttributeType& e) const {
    DAttribute a = copy_of<DAttribute>(d, e.attribute);
    if (e.type.is_enum()) d.state().get_as<DEnum>(e.type.enumeration);
    a.type = e.type;
    if (a.default_value) {
      try {
        a.default_value = coerce_literal(d.state(), a, *a.default_value);
      } catch (const Error&) {
        a.default_value.reset();
      }
    }
    d.put(std::move(a));
    return {};
  }

  ElementId operator()(const meta_edit::SetBounds& e) const {
    check_bounds(e.lower, e.upper);
    const Element& fe = resolve(d.state(), e.feature);
    if (const auto* a = std::get_if<DAttribute>(&fe)) {
      DAttribute copy = *a;
      copy.lower = e.lower;
      copy.upper = e.upper;
      d.put(std::move(copy));
    } else if (const auto* r = std::get_if<DReference>(&fe)) {
      DReference copy = *r;
      copy.lower = e.lower;
      copy.upper = e.upper;
      d.put(std::move(copy));
    } else {
      fail(ErrorCode::TypeMismatch, e.feature.str() + " is not a feature");
    }
    return {};
  }

  ElementId operator()(const meta_edit::SetContainment& e) const {
    DReference r = copy_of<DReference>(d, e.reference);
    if (r.is_containment == e.is_containment) return {};
    const std::vector<ElementId> owners = instances_everywhere(d.state(), r.owner);
    r.is_containment = e.is_containment;
    d.put(r);
    for (ElementId o : owners) {
      const DObject& obj = d.state().get_as<DObject>(o);
      auto it = obj.features.find(e.reference);
      if (it == obj.features.end()) continue;
      const std::vector<Scalar> targets = d.state().get_as<DValue>(it->second).values;
      for (const Scalar& s : targets) {
        const ElementId child = std::get<ElementId>(s);
        if (e.is_containment) {
          const DObject& c = d.state().get_as<DObject>(child);
          if (c.container) {
            fail(ErrorCode::Rejected, child.str() + " is already contained; containment would orphan its tree");
          }
          DObject copy = c;
          if (is_ancestor(d.state(), child, o)) {
            fail(ErrorCode::Rejected, "containment would form a cycle through " + child.str());
          }
          copy.container = Containment{o, e.reference};
          d.put(copy);
          set_roots(d, copy.model, child, false);
        } else {
          DObject copy = d.state().get_as<DObject>(child);
          copy.container.reset();
          d.put(copy);
          set_roots(d, copy.model, child, true);
        }
      }
    }
    return {};
  }

  ElementId operator()(const meta_edit::SetClassFlags& e) const {
    DClass c = copy_of<DClass>(d, e.cls);
    if (e.flags.is_final && !class_hierarchy(d.state(), e.cls).extended_by.empty()) {
      fail(ErrorCode::Rejected, c.name + " has subclasses and cannot be final");
    }
    c.flags = e.flags;
    d.put(std::move(c));
    return {};
  }

  ElementId operator()(const meta_edit::AddSuperclass& e) const {
    DClass c = copy_of<DClass>(d, e.cls);
    const DClass& sup = d.state().get_as<DClass>(e.super);
    if (std::find(c.extends.begin(), c.extends.end(), e.super) != c.extends.end()) return {};
    if (model_of(d.state(), e.super) != model_of(d.state(), e.cls)) {
      fail(ErrorCode::InvalidArgument, "superclass must be in the same metamodel");
    }
    if (is_subclass_of(d.state(), e.super, e.cls)) fail(ErrorCode::Rejected, "inheritance cycle through " + c.name);
    if (sup.flags.is_final) fail(ErrorCode::Rejected, sup.name + " is final");
    const std::set<ElementId> before = all_features(d.state(), e.cls);
    for (ElementId f : class_features(d.state(), e.super).attributes) {
      if (!before.count(f)) check_feature_name_free(d.state(), e.cls, std::string(feature_name(d.state(), f)));
    }
    for (ElementId f : class_features(d.state(), e.super).references) {
      if (!before.count(f)) check_feature_name_free(d.state(), e.cls, std::string(feature_name(d.state(), f)));
    }
    c.extends.push_back(e.super);
    d.put(std::move(c));
    sync_instance_values(d, e.cls);
    return {};
  }

  ElementId operator()(const meta_edit::RemoveSuperclass& e) const {
    DClass c = copy_of<DClass>(d, e.cls);
    if (std::find(c.extends.begin(), c.extends.end(), e.super) == c.extends.end()) return {};
    std::erase(c.extends, e.super);
    d.put(std::move(c));
    sync_instance_values(d, e.cls);
    return {};
  }

  ElementId operator()(const meta_edit::DeleteClass& e) const {
    const DClass c = copy_of<DClass>(d, e.cls);
    if (!class_hierarchy(d.state(), e.cls).extended_by.empty()) {
      fail(ErrorCode::Rejected, c.name + " has subclasses");
    }
    for (const auto& [id, el] : d.state().elements) {
      const DReference* r = std::get_if<DReference>(&el);
      if (r && r->target == e.cls && r->owner != e.cls) {
        fail(ErrorCode::Rejected, c.name + " is the target of reference '" + r->name + "'");
      }
    }
    for (ElementId o : instances_everywhere(d.state(), e.cls)) {
      if (d.state().find(o)) delete_object_tree(d, o);
    }
    for (ElementId f : c.attributes) d.erase(f);
    for (ElementId f : c.references) d.erase(f);
    DPackage p = copy_of<DPackage>(d, c.package);
    std::erase(p.classifiers, e.cls);
    d.put(std::move(p));
    d.erase_node(e.cls);
    d.erase(e.cls);
    return {};
  }

  ElementId operator()(const meta_edit::AddEnumLiteral& e) const {
    require_name(e.literal, "literal");
    DEnum en = copy_of<DEnum>(d, e.enumeration);
    if (std::find(en.literals.begin(), en.literals.end(), e.literal) != en.literals.end()) {
      fail(ErrorCode::NameClash, "literal '" + e.literal + "' already in " + en.name);
    }
    en.literals.push_back(e.literal);
    d.put(std::move(en));
    return {};
  }
};

}  // namespace

ElementId create_metamodel(Draft& d, const std::string& name) {
  require_name(name, "model");
  const ElementId id = d.fresh_id();
  d.put(DModel{id, name, true, {}, {}, {}});
  add_node(d, id);
  return id;
}

ElementId create_model(Draft& d, const std::string& name, ElementId metamodel) {
  require_name(name, "model");
  const DModel& mm = d.state().get_as<DModel>(metamodel);
  if (!mm.is_metamodel) fail(ErrorCode::InvalidArgument, mm.name + " is not a metamodel");
  const ElementId id = d.fresh_id();
  d.put(DModel{id, name, false, metamodel, {}, {}});
  add_node(d, id);
  return id;
}

ElementId add_package(Draft& d, ElementId metamodel, const std::string& name) {
  require_name(name, "package");
  DModel m = copy_of<DModel>(d, metamodel);
  if (!m.is_metamodel) fail(ErrorCode::InvalidArgument, "packages belong to metamodels");
  for (ElementId p : m.packages) {
    if (d.state().get_as<DPackage>(p).name == name) fail(ErrorCode::NameClash, "package '" + name + "' exists");
  }
  const ElementId id = d.fresh_id();
  d.put(DPackage{id, name, metamodel, {}});
  m.packages.push_back(id);
  d.put(std::move(m));
  return id;
}

ElementId add_enum(Draft& d, ElementId target, const std::string& name, std::vector<std::string> literals) {
  require_name(name, "enumeration");
  if (literals.empty()) fail(ErrorCode::InvalidArgument, "enumeration " + name + " needs literals");
  std::set<std::string> distinct(literals.begin(), literals.end());
  if (distinct.size() != literals.size()) fail(ErrorCode::InvalidArgument, "duplicate literal in " + name);
  const ElementId pkg = first_package(d, target);
  check_classifier_name_free(d.state(), pkg, name);
  const ElementId id = d.fresh_id();
  d.put(DEnum{id, name, pkg, std::move(literals)});
  DPackage p = copy_of<DPackage>(d, pkg);
  p.classifiers.push_back(id);
  d.put(std::move(p));
  return id;
}

ElementId add_class(Draft& d, ElementId target, const std::string& name, ClassFlags flags) {
  require_name(name, "class");
  const ElementId pkg = first_package(d, target);
  check_classifier_name_free(d.state(), pkg, name);
  const ElementId id = d.fresh_id();
  d.put(DClass{id, name, pkg, flags, {}, {}, {}, {}});
  DPackage p = copy_of<DPackage>(d, pkg);
  p.classifiers.push_back(id);
  d.put(std::move(p));
  add_node(d, id);
  return id;
}

ElementId add_object(Draft& d, ElementId model, const std::string& class_name, const nlohmann::json& init) {
  const DModel& m = d.state().get_as<DModel>(model);
  if (m.is_metamodel) fail(ErrorCode::InvalidArgument, m.name + " is a metamodel");
  auto cls = find_classifier(d.state(), m.conforms_to, class_name);
  if (!cls || !d.state().find_as<DClass>(*cls)) fail(ErrorCode::NotFound, "no class '" + class_name + "'");
  return create_object(d, model, *cls, init);
}

void mutate_feature(Draft& d, ElementId object, const std::string& feature, const FeatureEdit& edit) {
  const DObject& o = d.state().get_as<DObject>(object);
  auto f = find_feature(d.state(), o.instance_of, feature);
  if (!f) {
    fail(ErrorCode::NotFound, "no feature '" + feature + "' on " + d.state().get_as<DClass>(o.instance_of).name);
  }
  std::vector<Scalar> values;
  if (auto it = o.features.find(*f); it != o.features.end()) values = d.state().get_as<DValue>(it->second).values;
  switch (edit.kind) {
    case EditKind::Set:
      values = edit.values;
      break;
    case EditKind::Insert: {
      if (!within_upper(values.size() + edit.values.size(), feature_upper(d.state(), *f))) {
        fail(ErrorCode::BoundExceeded, "'" + feature + "' is full");
      }
      std::size_t at = edit.index.value_or(values.size());
      if (at > values.size()) fail(ErrorCode::OutOfRange, "insert position " + std::to_string(at) + " out of range");
      values.insert(values.begin() + static_cast<std::ptrdiff_t>(at), edit.values.begin(), edit.values.end());
      break;
    }
    case EditKind::Remove: {
      if (values.empty()) fail(ErrorCode::EmptyList, "'" + feature + "' is empty");
      if (edit.index) {
        if (*edit.index >= values.size()) fail(ErrorCode::OutOfRange, "remove position out of range");
        values.erase(values.begin() + static_cast<std::ptrdiff_t>(*edit.index));
      } else if (!edit.values.empty()) {
        for (const Scalar& s : edit.values) {
          auto it = std::find(values.begin(), values.end(), s);
          if (it == values.end()) fail(ErrorCode::NotFound, "value not present in '" + feature + "'");
          values.erase(it);
        }
      } else {
        values.pop_back();
      }
      break;
    }
  }
  set_values(d, object, *f, values);
}

void set_feature(Draft& d, ElementId object, const std::string& feature, std::vector<Scalar> values) {
  mutate_feature(d, object, feature, FeatureEdit{EditKind::Set, std::move(values), std::nullopt});
}

void delete_element(Draft& d, ElementId id) {
  const Element& e = resolve(d.state(), id);
  switch (kind_of(e)) {
    case ElementKind::Object:
      delete_object_tree(d, id);
      return;
    case ElementKind::Value: {
      const DValue& v = std::get<DValue>(e);
      set_values(d, v.owner, v.feature, {});
      return;
    }
    case ElementKind::Class:
      co_evolve(d, meta_edit::DeleteClass{id});
      return;
    case ElementKind::Attribute:
    case ElementKind::Reference:
      co_evolve(d, meta_edit::RemoveFeature{id});
      return;
    case ElementKind::Enum: {
      for (const auto& [aid, el] : d.state().elements) {
        const DAttribute* a = std::get_if<DAttribute>(&el);
        if (a && a->type.enumeration == id) fail(ErrorCode::Rejected, "enumeration is used by '" + a->name + "'");
      }
      DPackage p = copy_of<DPackage>(d, std::get<DEnum>(e).package);
      std::erase(p.classifiers, id);
      d.put(std::move(p));
      d.erase(id);
      return;
    }
    case ElementKind::Package: {
      const DPackage pkg = std::get<DPackage>(e);
      for (ElementId c : pkg.classifiers) delete_element(d, c);
      DModel m = copy_of<DModel>(d, pkg.model);
      std::erase(m.packages, id);
      d.put(std::move(m));
      d.erase(id);
      return;
    }
    case ElementKind::Model: {
      const DModel m = std::get<DModel>(e);
      if (m.is_metamodel) {
        for (ElementId other : models(d.state(), false)) {
          if (d.state().get_as<DModel>(other).conforms_to == id) {
            fail(ErrorCode::Rejected, "models still conform to " + m.name);
          }
        }
        for (ElementId p : m.packages) delete_element(d, p);
      } else {
        for (ElementId r : m.root_objects) {
          if (d.state().find(r)) delete_object_tree(d, r);
        }
      }
      d.erase_node(id);
      d.erase(id);
      return;
    }
  }
}

void set_layout(Draft& d, ElementId id, double x, double y, double width, double height) {
  const NodeInfo* cur = d.state().find_node(id);
  if (!cur) fail(ErrorCode::NotFound, "no node for " + id.str());
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(width) || !std::isfinite(height)) {
    fail(ErrorCode::InvalidArgument, "layout values must be finite");
  }
  if (width < 0 || height < 0) fail(ErrorCode::InvalidArgument, "width and height must be non-negative");
  NodeInfo n = *cur;
  n.x = x;
  n.y = y;
  n.width = width;
  n.height = height;
  d.put_node(std::move(n));
}

void set_position(Draft& d, ElementId id, double x, double y) {
  const NodeInfo* cur = d.state().find_node(id);
  if (!cur) fail(ErrorCode::NotFound, "no node for " + id.str());
  set_layout(d, id, x, y, cur->width, cur->height);
}

void set_state(Draft& d, ElementId id, const std::string& key, const nlohmann::json& value) {
  if (key.empty()) fail(ErrorCode::InvalidArgument, "state key must not be empty");
  const NodeInfo* cur = d.state().find_node(id);
  if (!cur) fail(ErrorCode::NotFound, "no node for " + id.str());
  NodeInfo n = *cur;
  if (value.is_null()) {
    n.state.erase(key);
  } else {
    n.state[key] = value;
  }
  d.put_node(std::move(n));
}

ElementId put_viewpoint(Draft& d, Viewpoint vp) {
  require_name(vp.name, "viewpoint");
  if (!vp.id) vp.id = d.fresh_id();
  std::set<std::string> names;
  for (View& v : vp.views) {
    if (!v.id) v.id = d.fresh_id();
    if (!names.insert(v.name).second) fail(ErrorCode::NameClash, "view '" + v.name + "' defined twice");
  }
  for (Rule& r : vp.rules) {
    if (!r.id) r.id = d.fresh_id();
  }
  for (ValidationRule& r : vp.validation_rules) {
    if (!r.id) r.id = d.fresh_id();
  }
  const ElementId id = vp.id;
  d.put_viewpoint(std::move(vp));
  return id;
}

Scalar coerce_literal(const State& state, const DAttribute& attr, const Scalar& value) {
  auto mismatch = [&]() -> Scalar {
    std::string expected = attr.type.is_enum() ? state.get_as<DEnum>(attr.type.enumeration).name
                                               : std::string(to_string(attr.type.primitive));
    fail(ErrorCode::TypeMismatch, "'" + attr.name + "' expects " + expected);
  };
  if (attr.type.is_enum()) {
    const std::string* s = std::get_if<std::string>(&value);
    const DEnum& en = state.get_as<DEnum>(attr.type.enumeration);
    if (!s || std::find(en.literals.begin(), en.literals.end(), *s) == en.literals.end()) {
      if (s) fail(ErrorCode::TypeMismatch, "'" + *s + "' is not a literal of " + en.name);
      return mismatch();
    }
    return value;
  }
  switch (attr.type.primitive) {
    case PrimitiveKind::Integer:
      if (std::holds_alternative<std::int64_t>(value)) return value;
      return mismatch();
    case PrimitiveKind::Real:
      if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
      if (std::holds_alternative<double>(value)) return value;
      return mismatch();
    case PrimitiveKind::String:
      if (std::holds_alternative<std::string>(value)) return value;
      return mismatch();
    case PrimitiveKind::Boolean:
      if (std::holds_alternative<bool>(value)) return value;
      return mismatch();
  }
  return mismatch();
}

Scalar parse_literal(const State& state, const DAttribute& attr, const std::string& text) {
  auto bad = [&]() -> Scalar {
    fail(ErrorCode::TypeMismatch, "'" + text + "' is not a valid value for '" + attr.name + "'");
  };
  if (attr.type.is_enum()) return coerce_literal(state, attr, text);
  switch (attr.type.primitive) {
    case PrimitiveKind::Integer: {
      std::int64_t v = 0;
      auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || end != text.data() + text.size()) return bad();
      return v;
    }
    case PrimitiveKind::Real: {
      if (text.empty()) return bad();
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(text, &used);
      } catch (const std::exception&) {
        return bad();
      }
      if (used != text.size() || !std::isfinite(v)) return bad();
      return v;
    }
    case PrimitiveKind::Boolean:
      if (text == "true") return true;
      if (text == "false") return false;
      return bad();
    case PrimitiveKind::String:
      if (text.size() >= 2 && (text.front() == '\'' || text.front() == '"') && text.back() == text.front()) {
        return text.substr(1, text.size() - 2);
      }
      return text;
  }
  return bad();
}

ElementId co_evolve(Draft& d, const MetaEdit& edit) { return std::visit(CoEvolver{d}, edit); }

std::vector<ElementId> instances_everywhere(const State& state, ElementId cls) {
  std::vector<ElementId> out;
  for (const auto& [id, e] : state.elements) {
    const DObject* o = std::get_if<DObject>(&e);
    if (o && is_subclass_of(state, o->instance_of, cls)) out.push_back(id);
  }
  return out;
}

}  // namespace mwb
