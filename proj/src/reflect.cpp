#include "mwb/reflect.hpp"

#include <algorithm>
#include <set>

namespace mwb {

const Element& resolve(const State& state, ElementId id) {
  const Element* e = state.find(id);
  if (!e) fail(ErrorCode::NotFound, "no element " + id.str());
  return *e;
}

std::vector<ElementId> superclass_closure(const State& state, ElementId cls) {
  // Depth-first, supertypes before the class itself; each class once.
  std::vector<ElementId> order;
  std::set<ElementId> seen;
  auto visit = [&](auto&& self, ElementId c) -> void {
    if (!seen.insert(c).second) return;
    const DClass& k = state.get_as<DClass>(c);
    for (ElementId sup : k.extends) self(self, sup);
    order.push_back(c);
  };
  visit(visit, cls);
  return order;
}

bool is_subclass_of(const State& state, ElementId cls, ElementId ancestor) {
  if (cls == ancestor) return true;
  const DClass* k = state.find_as<DClass>(cls);
  if (!k) return false;
  for (ElementId sup : k->extends) {
    if (is_subclass_of(state, sup, ancestor)) return true;
  }
  return false;
}

ElementId model_of(const State& state, ElementId id) {
  const Element& e = resolve(state, id);
  return std::visit(
      [&](const auto& r) -> ElementId {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, DModel>) {
          return r.id;
        } else if constexpr (std::is_same_v<T, DPackage>) {
          return r.model;
        } else if constexpr (std::is_same_v<T, DClass> || std::is_same_v<T, DEnum>) {
          return state.get_as<DPackage>(r.package).model;
        } else if constexpr (std::is_same_v<T, DAttribute> || std::is_same_v<T, DReference>) {
          return model_of(state, r.owner);
        } else if constexpr (std::is_same_v<T, DObject>) {
          return r.model;
        } else {
          return model_of(state, r.owner);
        }
      },
      e);
}

ElementId metamodel_of(const State& state, ElementId model) {
  const DModel& m = state.get_as<DModel>(model);
  return m.is_metamodel ? m.id : m.conforms_to;
}

std::vector<ElementId> class_all_instances(const State& state, ElementId cls, ElementId model) {
  state.get_as<DClass>(cls);
  const DModel& m = state.get_as<DModel>(model);
  if (m.is_metamodel) return {};
  if (m.conforms_to != model_of(state, cls)) {
    fail(ErrorCode::InvalidArgument, "model " + m.name + " does not conform to the metamodel of " + cls.str());
  }
  std::vector<ElementId> out;
  for (const auto& [id, e] : state.elements) {
    const DObject* o = std::get_if<DObject>(&e);
    if (o && o->model == model && is_subclass_of(state, o->instance_of, cls)) out.push_back(id);
  }
  return out;
}

FeatureSet class_features(const State& state, ElementId cls) {
  FeatureSet out;
  for (ElementId c : superclass_closure(state, cls)) {
    const DClass& k = state.get_as<DClass>(c);
    out.attributes.insert(out.attributes.end(), k.attributes.begin(), k.attributes.end());
    out.references.insert(out.references.end(), k.references.begin(), k.references.end());
  }
  return out;
}

Hierarchy class_hierarchy(const State& state, ElementId cls) {
  Hierarchy h;
  h.extends = state.get_as<DClass>(cls).extends;
  for (const auto& [id, e] : state.elements) {
    const DClass* k = std::get_if<DClass>(&e);
    if (k && std::find(k->extends.begin(), k->extends.end(), cls) != k->extends.end()) {
      h.extended_by.push_back(id);
    }
  }
  return h;
}

std::string_view feature_name(const State& state, ElementId feature) {
  const Element& e = resolve(state, feature);
  if (auto* a = std::get_if<DAttribute>(&e)) return a->name;
  if (auto* r = std::get_if<DReference>(&e)) return r->name;
  fail(ErrorCode::TypeMismatch, feature.str() + " is not a feature");
}

std::optional<ElementId> find_feature(const State& state, ElementId cls, std::string_view name) {
  FeatureSet fs = class_features(state, cls);
  for (ElementId a : fs.attributes) {
    if (state.get_as<DAttribute>(a).name == name) return a;
  }
  for (ElementId r : fs.references) {
    if (state.get_as<DReference>(r).name == name) return r;
  }
  return std::nullopt;
}

std::vector<ElementId> metamodel_classifiers(const State& state, ElementId metamodel) {
  std::vector<ElementId> out;
  for (ElementId p : state.get_as<DModel>(metamodel).packages) {
    const DPackage& pkg = state.get_as<DPackage>(p);
    out.insert(out.end(), pkg.classifiers.begin(), pkg.classifiers.end());
  }
  return out;
}

namespace {

std::string_view classifier_name(const State& state, ElementId id) {
  const Element& e = resolve(state, id);
  if (auto* c = std::get_if<DClass>(&e)) return c->name;
  if (auto* en = std::get_if<DEnum>(&e)) return en->name;
  return {};
}

ElementId unique_match(const std::vector<ElementId>& hits, std::string_view name, std::string_view where) {
  if (hits.empty()) fail(ErrorCode::NotFound, "no child '" + std::string(name) + "' in " + std::string(where));
  if (hits.size() > 1) {
    fail(ErrorCode::Ambiguous, "name '" + std::string(name) + "' is ambiguous in " + std::string(where));
  }
  return hits.front();
}

}  // namespace

std::optional<ElementId> find_classifier(const State& state, ElementId metamodel, std::string_view name) {
  std::vector<ElementId> hits;
  for (ElementId c : metamodel_classifiers(state, metamodel)) {
    if (classifier_name(state, c) == name) hits.push_back(c);
  }
  if (hits.empty()) return std::nullopt;
  return unique_match(hits, name, state.get_as<DModel>(metamodel).name);
}

ElementId named_child(const State& state, ElementId parent, std::string_view name) {
  const Element& e = resolve(state, parent);
  switch (kind_of(e)) {
    case ElementKind::Object: {
      const DObject& o = std::get<DObject>(e);
      auto f = find_feature(state, o.instance_of, name);
      if (!f) {
        fail(ErrorCode::NotFound,
             "no feature '" + std::string(name) + "' on " + state.get_as<DClass>(o.instance_of).name);
      }
      auto it = o.features.find(*f);
      if (it == o.features.end()) fail(ErrorCode::NotFound, "no value for '" + std::string(name) + "'");
      return it->second;
    }
    case ElementKind::Class: {
      auto f = find_feature(state, parent, name);
      if (!f) {
        fail(ErrorCode::NotFound, "no feature '" + std::string(name) + "' on " + std::get<DClass>(e).name);
      }
      return *f;
    }
    case ElementKind::Package: {
      std::vector<ElementId> hits;
      for (ElementId c : std::get<DPackage>(e).classifiers) {
        if (classifier_name(state, c) == name) hits.push_back(c);
      }
      return unique_match(hits, name, std::get<DPackage>(e).name);
    }
    case ElementKind::Model: {
      const DModel& m = std::get<DModel>(e);
      std::vector<ElementId> hits;
      if (m.is_metamodel) {
        for (ElementId p : m.packages) {
          if (state.get_as<DPackage>(p).name == name) hits.push_back(p);
        }
        for (ElementId c : metamodel_classifiers(state, parent)) {
          if (classifier_name(state, c) == name) hits.push_back(c);
        }
      } else {
        for (ElementId o : model_objects(state, parent)) {
          auto n = element_name(state, o);
          if (n && *n == name) hits.push_back(o);
        }
      }
      return unique_match(hits, name, m.name);
    }
    default:
      fail(ErrorCode::NotFound,
           "no child '" + std::string(name) + "' in " + std::string(to_string(kind_of(e))) + " " + parent.str());
  }
}

std::vector<ElementId> model_objects(const State& state, ElementId model) {
  std::vector<ElementId> out;
  for (const auto& [id, e] : state.elements) {
    const DObject* o = std::get_if<DObject>(&e);
    if (o && o->model == model) out.push_back(id);
  }
  return out;
}

std::vector<ElementId> models(const State& state, bool metamodels) {
  std::vector<ElementId> out;
  for (const auto& [id, e] : state.elements) {
    const DModel* m = std::get_if<DModel>(&e);
    if (m && m->is_metamodel == metamodels) out.push_back(id);
  }
  return out;
}

bool is_reference_feature(const State& state, ElementId feature) {
  return state.find_as<DReference>(feature) != nullptr;
}

std::int32_t feature_upper(const State& state, ElementId feature) {
  const Element& e = resolve(state, feature);
  if (auto* a = std::get_if<DAttribute>(&e)) return a->upper;
  return std::get<DReference>(e).upper;
}

std::int32_t feature_lower(const State& state, ElementId feature) {
  const Element& e = resolve(state, feature);
  if (auto* a = std::get_if<DAttribute>(&e)) return a->lower;
  return std::get<DReference>(e).lower;
}

std::vector<ElementId> referrers(const State& state, ElementId id) {
  std::vector<ElementId> out;
  for (const auto& [vid, e] : state.elements) {
    const DValue* v = std::get_if<DValue>(&e);
    if (!v) continue;
    for (const Scalar& s : v->values) {
      const ElementId* target = std::get_if<ElementId>(&s);
      if (target && *target == id) {
        if (out.empty() || out.back() != v->owner) out.push_back(v->owner);
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ElementId> contained_children(const State& state, ElementId object) {
  std::vector<ElementId> out;
  const DObject& o = state.get_as<DObject>(object);
  for (const auto& [feature, value] : o.features) {
    const DReference* ref = state.find_as<DReference>(feature);
    if (!ref || !ref->is_containment) continue;
    for (const Scalar& s : state.get_as<DValue>(value).values) {
      if (auto* t = std::get_if<ElementId>(&s)) out.push_back(*t);
    }
  }
  return out;
}

const DValue* value_of(const State& state, ElementId object, std::string_view feature) {
  const DObject* o = state.find_as<DObject>(object);
  if (!o) return nullptr;
  auto f = find_feature(state, o->instance_of, feature);
  if (!f) return nullptr;
  auto it = o->features.find(*f);
  return it == o->features.end() ? nullptr : state.find_as<DValue>(it->second);
}

std::optional<std::string> element_name(const State& state, ElementId id) {
  const Element* e = state.find(id);
  if (!e) return std::nullopt;
  return std::visit(
      [&](const auto& r) -> std::optional<std::string> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, DObject>) {
          const DValue* v = value_of(state, r.id, "name");
          if (!v || v->values.empty()) return std::nullopt;
          if (auto* s = std::get_if<std::string>(&v->values.front())) return *s;
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, DValue>) {
          return std::string(feature_name(state, r.feature));
        } else {
          return r.name;
        }
      },
      *e);
}

std::string class_name_of(const State& state, ElementId object) {
  return state.get_as<DClass>(state.get_as<DObject>(object).instance_of).name;
}

std::string describe(const State& state, ElementId id) {
  const Element* e = state.find(id);
  if (!e) return id.str();
  std::string kind = kind_of(*e) == ElementKind::Object ? class_name_of(state, id) : std::string(to_string(kind_of(*e)));
  auto name = element_name(state, id);
  return kind + (name ? " " + *name : std::string()) + " " + id.str();
}

}  // namespace mwb

namespace mwb {

std::string element_path(const State& state, ElementId id) {
  const Element* e = state.find(id);
  if (!e) return id.str();
  if (const DModel* m = std::get_if<DModel>(e)) return "/" + m->name;
  if (const DObject* o = std::get_if<DObject>(e)) {
    std::string label;
    if (auto n = element_name(state, id)) {
      label = *n;
    } else if (const NodeInfo* info = state.find_node(id); info && info->state.count("label") &&
                                                            info->state.at("label").is_string()) {
      label = info->state.at("label").get<std::string>();
    } else {
      label = id.str();
    }
    return "/" + state.get_as<DModel>(o->model).name + "/" + class_name_of(state, id) + ":" + label;
  }
  if (const DClass* c = std::get_if<DClass>(e)) return "/" + state.get_as<DModel>(model_of(state, id)).name + "/" + c->name;
  if (const DValue* v = std::get_if<DValue>(e)) {
    return element_path(state, v->owner) + "/" + std::string(feature_name(state, v->feature));
  }
  if (auto n = element_name(state, id)) return element_path(state, model_of(state, id)) + "/" + *n;
  return id.str();
}

}  // namespace mwb
