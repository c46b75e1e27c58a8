#include "mwb/serialize.hpp"

#include "mwb/error.hpp"

namespace mwb {

namespace {

json ids_to_json(const std::vector<ElementId>& ids) {
  json arr = json::array();
  for (ElementId id : ids) arr.push_back(id.str());
  return arr;
}

std::vector<ElementId> ids_from_json(const json& j) {
  std::vector<ElementId> out;
  for (const json& e : j) out.push_back(id_from_json(e));
  return out;
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

}  // namespace

json id_to_json(ElementId id) { return id ? json(id.str()) : json(nullptr); }

ElementId id_from_json(const json& j) {
  if (j.is_null()) return {};
  if (!j.is_string()) fail(ErrorCode::InvalidArgument, "element id must be a string");
  auto id = ElementId::parse(j.get<std::string>());
  if (!id) fail(ErrorCode::InvalidArgument, "malformed element id '" + j.get<std::string>() + "'");
  return *id;
}

json scalar_to_json(const Scalar& s) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ElementId>) {
          return json{{"ref", v.str()}};
        } else {
          return json(v);
        }
      },
      s);
}

Scalar scalar_from_json(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("ref")) return id_from_json(j.at("ref"));
  fail(ErrorCode::InvalidArgument, "not a scalar: " + j.dump());
}

namespace {

json type_to_json(const AttributeType& t) {
  if (t.is_enum()) return t.enumeration.str();
  return std::string(to_string(t.primitive));
}

AttributeType type_from_json(const json& j) {
  const std::string s = j.get<std::string>();
  if (auto p = parse_primitive(s)) return AttributeType::of(*p);
  return AttributeType::of_enum(id_from_json(j));
}

}  // namespace

json element_to_json(const Element& e) {
  return std::visit(
      [](const auto& r) -> json {
        using T = std::decay_t<decltype(r)>;
        json j;
        j["id"] = r.id.str();
        if constexpr (std::is_same_v<T, DModel>) {
          j["kind"] = "DModel";
          j["name"] = r.name;
          j["isMetamodel"] = r.is_metamodel;
          j["conformsTo"] = id_to_json(r.conforms_to);
          j["packages"] = ids_to_json(r.packages);
          j["rootObjects"] = ids_to_json(r.root_objects);
        } else if constexpr (std::is_same_v<T, DPackage>) {
          j["kind"] = "DPackage";
          j["name"] = r.name;
          j["model"] = id_to_json(r.model);
          j["classifiers"] = ids_to_json(r.classifiers);
        } else if constexpr (std::is_same_v<T, DClass>) {
          j["kind"] = "DClass";
          j["name"] = r.name;
          j["package"] = id_to_json(r.package);
          j["isAbstract"] = r.flags.is_abstract;
          j["isInterface"] = r.flags.is_interface;
          j["isFinal"] = r.flags.is_final;
          j["isSingleton"] = r.flags.is_singleton;
          j["isRootable"] = r.flags.is_rootable;
          j["isPrimitive"] = r.flags.is_primitive;
          j["extends"] = ids_to_json(r.extends);
          j["attributes"] = ids_to_json(r.attributes);
          j["references"] = ids_to_json(r.references);
          json ops = json::array();
          for (const auto& op : r.operations) {
            ops.push_back({{"name", op.name}, {"parameters", op.parameters}, {"result", op.result}});
          }
          j["operations"] = ops;
        } else if constexpr (std::is_same_v<T, DEnum>) {
          j["kind"] = "DEnum";
          j["name"] = r.name;
          j["package"] = id_to_json(r.package);
          j["literals"] = r.literals;
        } else if constexpr (std::is_same_v<T, DAttribute>) {
          j["kind"] = "DAttribute";
          j["name"] = r.name;
          j["owner"] = id_to_json(r.owner);
          j["type"] = type_to_json(r.type);
          j["lowerBound"] = r.lower;
          j["upperBound"] = r.upper;
          j["defaultValue"] = r.default_value ? scalar_to_json(*r.default_value) : json(nullptr);
        } else if constexpr (std::is_same_v<T, DReference>) {
          j["kind"] = "DReference";
          j["name"] = r.name;
          j["owner"] = id_to_json(r.owner);
          j["target"] = id_to_json(r.target);
          j["lowerBound"] = r.lower;
          j["upperBound"] = r.upper;
          j["isContainment"] = r.is_containment;
        } else if constexpr (std::is_same_v<T, DObject>) {
          j["kind"] = "DObject";
          j["model"] = id_to_json(r.model);
          j["instanceOf"] = id_to_json(r.instance_of);
          json features = json::array();
          for (const auto& [f, v] : r.features) features.push_back({{"feature", f.str()}, {"value", v.str()}});
          j["features"] = features;
          j["containerOf"] = r.container ? json{{"parent", r.container->parent.str()},
                                                {"reference", r.container->reference.str()}}
                                         : json(nullptr);
        } else {
          j["kind"] = "DValue";
          j["owner"] = id_to_json(r.owner);
          j["feature"] = id_to_json(r.feature);
          json values = json::array();
          for (const Scalar& s : r.values) values.push_back(scalar_to_json(s));
          j["values"] = values;
        }
        return j;
      },
      e);
}

Element element_from_json(const json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  const ElementId id = id_from_json(field(j, "id"));
  if (kind == "DModel") {
    DModel m;
    m.id = id;
    m.name = field(j, "name").get<std::string>();
    m.is_metamodel = field(j, "isMetamodel").get<bool>();
    m.conforms_to = id_from_json(get_or(j, "conformsTo", json(nullptr)));
    m.packages = ids_from_json(field(j, "packages"));
    m.root_objects = ids_from_json(field(j, "rootObjects"));
    return m;
  }
  if (kind == "DPackage") {
    DPackage p;
    p.id = id;
    p.name = field(j, "name").get<std::string>();
    p.model = id_from_json(field(j, "model"));
    p.classifiers = ids_from_json(field(j, "classifiers"));
    return p;
  }
  if (kind == "DClass") {
    DClass c;
    c.id = id;
    c.name = field(j, "name").get<std::string>();
    c.package = id_from_json(field(j, "package"));
    c.flags.is_abstract = get_or(j, "isAbstract", false);
    c.flags.is_interface = get_or(j, "isInterface", false);
    c.flags.is_final = get_or(j, "isFinal", false);
    c.flags.is_singleton = get_or(j, "isSingleton", false);
    c.flags.is_rootable = get_or(j, "isRootable", false);
    c.flags.is_primitive = get_or(j, "isPrimitive", false);
    c.extends = ids_from_json(field(j, "extends"));
    c.attributes = ids_from_json(field(j, "attributes"));
    c.references = ids_from_json(field(j, "references"));
    for (const json& op : get_or(j, "operations", json::array())) {
      c.operations.push_back({op.at("name").get<std::string>(),
                              op.at("parameters").get<std::vector<std::string>>(),
                              op.at("result").get<std::string>()});
    }
    return c;
  }
  if (kind == "DEnum") {
    DEnum en;
    en.id = id;
    en.name = field(j, "name").get<std::string>();
    en.package = id_from_json(field(j, "package"));
    en.literals = field(j, "literals").get<std::vector<std::string>>();
    return en;
  }
  if (kind == "DAttribute") {
    DAttribute a;
    a.id = id;
    a.name = field(j, "name").get<std::string>();
    a.owner = id_from_json(field(j, "owner"));
    a.type = type_from_json(field(j, "type"));
    a.lower = field(j, "lowerBound").get<std::int32_t>();
    a.upper = field(j, "upperBound").get<std::int32_t>();
    const json& d = get_or(j, "defaultValue", json(nullptr));
    if (!d.is_null()) a.default_value = scalar_from_json(d);
    return a;
  }
  if (kind == "DReference") {
    DReference r;
    r.id = id;
    r.name = field(j, "name").get<std::string>();
    r.owner = id_from_json(field(j, "owner"));
    r.target = id_from_json(field(j, "target"));
    r.lower = field(j, "lowerBound").get<std::int32_t>();
    r.upper = field(j, "upperBound").get<std::int32_t>();
    r.is_containment = field(j, "isContainment").get<bool>();
    return r;
  }
  if (kind == "DObject") {
    DObject o;
    o.id = id;
    o.model = id_from_json(field(j, "model"));
    o.instance_of = id_from_json(field(j, "instanceOf"));
    for (const json& f : field(j, "features")) {
      o.features.emplace(id_from_json(f.at("feature")), id_from_json(f.at("value")));
    }
    const json& c = get_or(j, "containerOf", json(nullptr));
    if (!c.is_null()) o.container = Containment{id_from_json(c.at("parent")), id_from_json(c.at("reference"))};
    return o;
  }
  if (kind == "DValue") {
    DValue v;
    v.id = id;
    v.owner = id_from_json(field(j, "owner"));
    v.feature = id_from_json(field(j, "feature"));
    for (const json& s : field(j, "values")) v.values.push_back(scalar_from_json(s));
    return v;
  }
  fail(ErrorCode::InvalidArgument, "unknown element kind '" + kind + "'");
}

json node_to_json(const NodeInfo& n) {
  json state = json::object();
  for (const auto& [k, v] : n.state) state[k] = v;
  return {{"elementId", n.element.str()}, {"x", n.x},         {"y", n.y},
          {"width", n.width},             {"height", n.height}, {"state", state}};
}

NodeInfo node_from_json(const json& j) {
  NodeInfo n;
  n.element = id_from_json(field(j, "elementId"));
  n.x = field(j, "x").get<double>();
  n.y = field(j, "y").get<double>();
  n.width = field(j, "width").get<double>();
  n.height = field(j, "height").get<double>();
  const json state = get_or(j, "state", json::object());
  for (const auto& [k, v] : state.items()) n.state.emplace(k, v);
  return n;
}

json template_to_json(const TemplateNode& t) {
  json j{{"kind", std::string(to_string(t.kind))}};
  if (!t.props.empty()) j["props"] = t.props;
  if (!t.children.empty()) {
    json kids = json::array();
    for (const auto& c : t.children) kids.push_back(template_to_json(c));
    j["children"] = kids;
  }
  return j;
}

TemplateNode template_from_json(const json& j) {
  TemplateNode t;
  const std::string kind = field(j, "kind").get<std::string>();
  auto k = parse_template_kind(kind);
  if (!k) fail(ErrorCode::InvalidArgument, "unknown template component '" + kind + "'");
  t.kind = *k;
  if (auto it = j.find("props"); it != j.end()) {
    for (const auto& [key, value] : it->items()) {
      t.props.emplace(key, value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  if (auto it = j.find("children"); it != j.end()) {
    for (const json& c : *it) t.children.push_back(template_from_json(c));
  }
  return t;
}

namespace {

std::string_view layout_name(ChildLayout l) {
  switch (l) {
    case ChildLayout::List: return "list";
    case ChildLayout::GraphVertices: return "graph-vertices";
    case ChildLayout::Auto: break;
  }
  return "auto";
}

ChildLayout layout_from(std::string_view s) {
  if (s == "list") return ChildLayout::List;
  if (s == "graph-vertices") return ChildLayout::GraphVertices;
  if (s == "auto") return ChildLayout::Auto;
  fail(ErrorCode::InvalidArgument, "unknown child layout '" + std::string(s) + "'");
}

json view_to_json(const View& v) {
  json style = json::object();
  for (const auto& [k, s] : v.style) style[k] = {{"kind", std::string(to_string(s.kind))}, {"value", s.value}};
  json events = json::array();
  for (const auto& [t, r] : v.events) events.push_back({{"trigger", std::string(to_string(t))}, {"rule", r.str()}});
  json params = json::array();
  for (const auto& p : v.params) params.push_back({{"name", p.name}, {"expression", p.expression}});
  return {{"id", v.id.str()},
          {"name", v.name},
          {"applyTo", v.apply_to},
          {"template", template_to_json(v.templ)},
          {"style", style},
          {"events", events},
          {"options",
           {{"childLayout", std::string(layout_name(v.options.child_layout))},
            {"exclude", v.options.exclude},
            {"flags", v.options.flags}}},
          {"params", params}};
}

View view_from_json(const json& j) {
  View v;
  v.id = id_from_json(field(j, "id"));
  v.name = field(j, "name").get<std::string>();
  v.apply_to = field(j, "applyTo").get<std::string>();
  v.templ = template_from_json(field(j, "template"));
  const json style = get_or(j, "style", json::object());
  for (const auto& [k, s] : style.items()) {
    auto kind = parse_style_kind(s.at("kind").get<std::string>());
    if (!kind) fail(ErrorCode::InvalidArgument, "unknown style kind for '" + k + "'");
    v.style.emplace(k, StyleValue{*kind, s.at("value").get<std::string>()});
  }
  for (const json& e : get_or(j, "events", json::array())) {
    auto t = parse_trigger(e.at("trigger").get<std::string>());
    if (!t) fail(ErrorCode::InvalidArgument, "unknown trigger " + e.at("trigger").dump());
    v.events.emplace_back(*t, id_from_json(e.at("rule")));
  }
  const json& o = get_or(j, "options", json::object());
  v.options.child_layout = layout_from(get_or<std::string>(o, "childLayout", "auto"));
  v.options.exclude = get_or(o, "exclude", false);
  v.options.flags = get_or(o, "flags", json::object()).get<std::map<std::string, std::string>>();
  for (const json& p : get_or(j, "params", json::array())) {
    v.params.push_back({p.at("name").get<std::string>(), p.at("expression").get<std::string>()});
  }
  return v;
}

}  // namespace

json viewpoint_to_json(const Viewpoint& vp) {
  json views = json::array();
  for (const View& v : vp.views) views.push_back(view_to_json(v));
  json rules = json::array();
  for (const Rule& r : vp.rules) {
    rules.push_back({{"id", r.id.str()},
                     {"name", r.name},
                     {"trigger", std::string(to_string(r.trigger))},
                     {"condition", r.condition},
                     {"action", r.action},
                     {"owningView", id_to_json(r.owning_view)}});
  }
  json vrules = json::array();
  for (const ValidationRule& r : vp.validation_rules) {
    vrules.push_back({{"id", r.id.str()},
                      {"name", r.name},
                      {"appliesTo", r.applies_to},
                      {"check", r.check},
                      {"severity", std::string(to_string(r.severity))}});
  }
  return {{"id", vp.id.str()},  {"name", vp.name},   {"isDefault", vp.is_default},
          {"views", views},     {"rules", rules},    {"validationRules", vrules}};
}

Viewpoint viewpoint_from_json(const json& j) {
  Viewpoint vp;
  vp.id = id_from_json(field(j, "id"));
  vp.name = field(j, "name").get<std::string>();
  vp.is_default = get_or(j, "isDefault", false);
  for (const json& v : get_or(j, "views", json::array())) vp.views.push_back(view_from_json(v));
  for (const json& r : get_or(j, "rules", json::array())) {
    Rule rule;
    rule.id = id_from_json(r.at("id"));
    rule.name = r.at("name").get<std::string>();
    auto t = parse_trigger(r.at("trigger").get<std::string>());
    if (!t) fail(ErrorCode::InvalidArgument, "unknown trigger " + r.at("trigger").dump());
    rule.trigger = *t;
    rule.condition = r.at("condition").get<std::string>();
    rule.action = r.at("action").get<std::string>();
    rule.owning_view = id_from_json(get_or(r, "owningView", json(nullptr)));
    vp.rules.push_back(std::move(rule));
  }
  for (const json& r : get_or(j, "validationRules", json::array())) {
    ValidationRule rule;
    rule.id = id_from_json(r.at("id"));
    rule.name = r.at("name").get<std::string>();
    rule.applies_to = r.at("appliesTo").get<std::string>();
    rule.check = r.at("check").get<std::string>();
    auto s = parse_severity(get_or<std::string>(r, "severity", "error"));
    if (!s) fail(ErrorCode::InvalidArgument, "unknown severity");
    rule.severity = *s;
    vp.validation_rules.push_back(std::move(rule));
  }
  return vp;
}

json op_to_json(const Op& op) {
  return std::visit(
      [&](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        json j{{"op", std::string(to_string(op.kind()))}, {"id", c.id.str()}};
        if constexpr (std::is_same_v<T, ElementChange>) {
          j["table"] = "data";
          j["before"] = c.before ? element_to_json(*c.before) : json(nullptr);
          j["after"] = c.after ? element_to_json(*c.after) : json(nullptr);
        } else if constexpr (std::is_same_v<T, NodeChange>) {
          j["table"] = "node";
          j["before"] = c.before ? node_to_json(*c.before) : json(nullptr);
          j["after"] = c.after ? node_to_json(*c.after) : json(nullptr);
        } else {
          j["table"] = "view";
          j["before"] = c.before ? viewpoint_to_json(*c.before) : json(nullptr);
          j["after"] = c.after ? viewpoint_to_json(*c.after) : json(nullptr);
        }
        return j;
      },
      op.change);
}

Op op_from_json(const json& j) {
  const std::string table = field(j, "table").get<std::string>();
  const ElementId id = id_from_json(field(j, "id"));
  const json& before = field(j, "before");
  const json& after = field(j, "after");
  if (table == "data") {
    ElementChange c{id, {}, {}};
    if (!before.is_null()) c.before = element_from_json(before);
    if (!after.is_null()) c.after = element_from_json(after);
    return Op{c};
  }
  if (table == "node") {
    NodeChange c{id, {}, {}};
    if (!before.is_null()) c.before = node_from_json(before);
    if (!after.is_null()) c.after = node_from_json(after);
    return Op{c};
  }
  if (table == "view") {
    ViewpointChange c{id, {}, {}};
    if (!before.is_null()) c.before = viewpoint_from_json(before);
    if (!after.is_null()) c.after = viewpoint_from_json(after);
    return Op{c};
  }
  fail(ErrorCode::InvalidArgument, "unknown op table '" + table + "'");
}

json transaction_to_json(const Transaction& tx) {
  json ops = json::array();
  for (const Op& op : tx.ops) ops.push_back(op_to_json(op));
  return {{"id", tx.id}, {"author", tx.author}, {"ops", ops}};
}

Transaction transaction_from_json(const json& j) {
  Transaction tx;
  tx.id = field(j, "id").get<TxId>();
  tx.author = field(j, "author").get<std::string>();
  for (const json& op : field(j, "ops")) tx.ops.push_back(op_from_json(op));
  return tx;
}

// --- project document ---

namespace {

json nest_features(const State& state, const DClass& c) {
  json j = element_to_json(c);
  json attrs = json::array();
  for (ElementId a : c.attributes) attrs.push_back(element_to_json(state.get_as<DAttribute>(a)));
  json refs = json::array();
  for (ElementId r : c.references) refs.push_back(element_to_json(state.get_as<DReference>(r)));
  j["attributes"] = attrs;
  j["references"] = refs;
  return j;
}

json nest_metamodel(const State& state, const DModel& m) {
  json j = element_to_json(m);
  json pkgs = json::array();
  for (ElementId p : m.packages) {
    const DPackage& pkg = state.get_as<DPackage>(p);
    json pj = element_to_json(pkg);
    json classifiers = json::array();
    for (ElementId c : pkg.classifiers) {
      const Element& e = state.elements.at(c);
      if (const DClass* cls = std::get_if<DClass>(&e)) {
        classifiers.push_back(nest_features(state, *cls));
      } else {
        classifiers.push_back(element_to_json(e));
      }
    }
    pj["classifiers"] = classifiers;
    pkgs.push_back(pj);
  }
  j["packages"] = pkgs;
  return j;
}

json nest_model(const State& state, const DModel& m) {
  json j = element_to_json(m);
  json objects = json::array();
  for (const auto& [id, e] : state.elements) {
    const DObject* o = std::get_if<DObject>(&e);
    if (!o || o->model != m.id) continue;
    json oj = element_to_json(*o);
    oj.erase("features");
    json values = json::array();
    for (const auto& [f, v] : o->features) values.push_back(element_to_json(state.elements.at(v)));
    oj["values"] = values;
    objects.push_back(oj);
  }
  j["objects"] = objects;
  return j;
}

void put_element(State& state, Element e) {
  ElementId id = id_of(e);
  if (!state.elements.emplace(id, std::move(e)).second) {
    fail(ErrorCode::InvalidArgument, "duplicate element " + id.str());
  }
}

void unnest_metamodel(State& state, json j) {
  json pkgs = j["packages"];
  json pkg_ids = json::array();
  for (json& pj : pkgs) {
    json classifiers = pj["classifiers"];
    json cls_ids = json::array();
    for (json& cj : classifiers) {
      cls_ids.push_back(cj.at("id"));
      if (cj.at("kind") == "DClass") {
        json attr_ids = json::array();
        for (const json& aj : cj["attributes"]) {
          attr_ids.push_back(aj.at("id"));
          put_element(state, element_from_json(aj));
        }
        json ref_ids = json::array();
        for (const json& rj : cj["references"]) {
          ref_ids.push_back(rj.at("id"));
          put_element(state, element_from_json(rj));
        }
        cj["attributes"] = attr_ids;
        cj["references"] = ref_ids;
      }
      put_element(state, element_from_json(cj));
    }
    pj["classifiers"] = cls_ids;
    pkg_ids.push_back(pj.at("id"));
    put_element(state, element_from_json(pj));
  }
  j["packages"] = pkg_ids;
  put_element(state, element_from_json(j));
}

void unnest_model(State& state, json j) {
  for (json oj : j["objects"]) {
    json features = json::array();
    for (const json& vj : oj["values"]) {
      features.push_back({{"feature", vj.at("feature")}, {"value", vj.at("id")}});
      put_element(state, element_from_json(vj));
    }
    oj.erase("values");
    oj["features"] = features;
    put_element(state, element_from_json(oj));
  }
  j.erase("objects");
  put_element(state, element_from_json(j));
}

}  // namespace

json project_to_json(const State& state, const std::vector<Transaction>& log) {
  json doc;
  doc["format"] = kFormatVersion;
  doc["nextId"] = state.next_id;
  json metamodels = json::array();
  json instance_models = json::array();
  for (const auto& [id, e] : state.elements) {
    const DModel* m = std::get_if<DModel>(&e);
    if (!m) continue;
    if (m->is_metamodel) {
      metamodels.push_back(nest_metamodel(state, *m));
    } else {
      instance_models.push_back(nest_model(state, *m));
    }
  }
  doc["metamodels"] = metamodels;
  doc["models"] = instance_models;
  json nodes = json::array();
  for (const auto& [id, n] : state.nodes) nodes.push_back(node_to_json(n));
  doc["nodes"] = nodes;
  json vps = json::array();
  for (const auto& [id, vp] : state.viewpoints) vps.push_back(viewpoint_to_json(vp));
  doc["viewpoints"] = vps;
  json txs = json::array();
  for (const Transaction& tx : log) txs.push_back(transaction_to_json(tx));
  doc["log"] = txs;
  return doc;
}

std::pair<State, std::vector<Transaction>> project_from_json(const json& doc) {
  if (get_or(doc, "format", 0) != kFormatVersion) {
    fail(ErrorCode::InvalidArgument, "unsupported project format " + get_or(doc, "format", json(nullptr)).dump());
  }
  State state;
  for (const json& m : get_or(doc, "metamodels", json::array())) unnest_metamodel(state, m);
  for (const json& m : get_or(doc, "models", json::array())) unnest_model(state, m);
  for (const json& n : get_or(doc, "nodes", json::array())) {
    NodeInfo node = node_from_json(n);
    state.nodes.emplace(node.element, std::move(node));
  }
  for (const json& v : get_or(doc, "viewpoints", json::array())) {
    Viewpoint vp = viewpoint_from_json(v);
    state.viewpoints.emplace(vp.id, std::move(vp));
  }
  state.next_id = field(doc, "nextId").get<std::uint64_t>();
  std::vector<Transaction> log;
  for (const json& t : get_or(doc, "log", json::array())) log.push_back(transaction_from_json(t));
  return {std::move(state), std::move(log)};
}

std::string canonical_text(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace mwb
