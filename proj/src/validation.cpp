#include "mwb/validation.hpp"

#include "mwb/eval.hpp"
#include "mwb/edits.hpp"
#include "mwb/reflect.hpp"

namespace mwb {

namespace {

struct CompiledRule {
  const ValidationRule* rule;
  Predicate applies_to;
  Script check;
  std::string parse_error;
};

std::string bounds_text(std::int32_t lower, std::int32_t upper) {
  return "[" + std::to_string(lower) + ".." + (upper == kUnbounded ? std::string("*") : std::to_string(upper)) + "]";
}

bool fits_primitive(PrimitiveKind kind, const Scalar& s) {
  switch (kind) {
    case PrimitiveKind::Integer: return std::holds_alternative<std::int64_t>(s);
    case PrimitiveKind::Real: return std::holds_alternative<double>(s) || std::holds_alternative<std::int64_t>(s);
    case PrimitiveKind::String: return std::holds_alternative<std::string>(s);
    case PrimitiveKind::Boolean: return std::holds_alternative<bool>(s);
  }
  return false;
}

void structural(const State& state, const DObject& o, std::vector<Marker>& out) {
  const DClass& cls = state.get_as<DClass>(o.instance_of);
  if (cls.flags.is_abstract || cls.flags.is_interface) {
    out.push_back({o.id, Severity::Error, cls.name + " is not instantiable", "instantiable"});
  }
  FeatureSet fs = class_features(state, cls.id);
  auto values = [&](ElementId f) -> const std::vector<Scalar>* {
    auto it = o.features.find(f);
    return it == o.features.end() ? nullptr : &state.get_as<DValue>(it->second).values;
  };
  auto multiplicity = [&](const std::string& name, std::size_t n, std::int32_t lower, std::int32_t upper) {
    if (n < static_cast<std::size_t>(lower) || !within_upper(n, upper)) {
      out.push_back({o.id, Severity::Error,
                     "'" + name + "' has " + std::to_string(n) + " values, expected " + bounds_text(lower, upper),
                     "multiplicity"});
    }
  };
  for (ElementId f : fs.attributes) {
    const DAttribute& a = state.get_as<DAttribute>(f);
    const std::vector<Scalar>* vs = values(f);
    multiplicity(a.name, vs ? vs->size() : 0, a.lower, a.upper);
    if (!vs) continue;
    for (const Scalar& s : *vs) {
      if (a.type.is_enum()) {
        const DEnum& en = state.get_as<DEnum>(a.type.enumeration);
        const std::string* lit = std::get_if<std::string>(&s);
        if (!lit || std::find(en.literals.begin(), en.literals.end(), *lit) == en.literals.end()) {
          out.push_back({o.id, Severity::Error, "'" + a.name + "' is not a literal of " + en.name, "enum-literal"});
        }
      } else if (!fits_primitive(a.type.primitive, s)) {
        out.push_back({o.id, Severity::Error,
                       "'" + a.name + "' does not hold a " + std::string(to_string(a.type.primitive)), "type"});
      }
    }
  }
  for (ElementId f : fs.references) {
    const DReference& r = state.get_as<DReference>(f);
    const std::vector<Scalar>* vs = values(f);
    multiplicity(r.name, vs ? vs->size() : 0, r.lower, r.upper);
    if (!vs) continue;
    for (const Scalar& s : *vs) {
      const ElementId* t = std::get_if<ElementId>(&s);
      const DObject* target = t ? state.find_as<DObject>(*t) : nullptr;
      if (!target || !is_subclass_of(state, target->instance_of, r.target)) {
        out.push_back({o.id, Severity::Error,
                       "'" + r.name + "' must point to a " + state.get_as<DClass>(r.target).name, "reference-type"});
      }
    }
  }
}

void user_rules(const State& state, const DObject& o, const std::vector<CompiledRule>& rules, std::vector<Marker>& out) {
  for (const CompiledRule& c : rules) {
    if (!c.parse_error.empty()) continue;
    EvalContext ctx = EvalContext::for_element(state, o.id);
    try {
      if (!evaluate_predicate(c.applies_to, ctx)) continue;
      ScriptResult r = run_script(c.check, ctx, nullptr);
      auto it = r.locals.find("err");
      if (it == r.locals.end() || it->second.is_null()) continue;
      const bool* b = it->second.as<bool>();
      if (b && !*b) continue;
      out.push_back({o.id, c.rule->severity, display_text(state, it->second), c.rule->name});
    } catch (const Error& e) {
      out.push_back({o.id, Severity::Warning, e.what(), c.rule->name});
    }
  }
}

nlohmann::json markers_json(const std::vector<Marker>& markers) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Marker& m : markers) {
    arr.push_back({{"rule", m.rule}, {"severity", std::string(to_string(m.severity))}, {"message", m.message}});
  }
  return arr;
}

}  // namespace

std::vector<Marker> compute_markers(const State& state, ElementId model, ExecPolicy policy) {
  state.get_as<DModel>(model);
  std::vector<CompiledRule> rules;
  for (const auto& [vpid, vp] : state.viewpoints) {
    for (const ValidationRule& r : vp.validation_rules) {
      CompiledRule c{&r, {}, {}, {}};
      try {
        c.applies_to = r.applies_to.empty() ? parse_predicate("true") : parse_predicate(r.applies_to);
        c.check = parse_script(r.check);
      } catch (const Error& e) {
        c.parse_error = e.what();
      }
      rules.push_back(std::move(c));
    }
  }
  std::vector<ElementId> objects = model_objects(state, model);
  std::vector<std::vector<Marker>> per(objects.size());
  for_each_index(
      objects.size(),
      [&](std::size_t i) {
        const DObject& o = state.get_as<DObject>(objects[i]);
        structural(state, o, per[i]);
        user_rules(state, o, rules, per[i]);
      },
      policy);
  std::vector<Marker> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::vector<Marker> validate_model(Store& store, ElementId model, ExecPolicy policy) {
  std::vector<Marker> markers = compute_markers(store.state(), model, policy);
  std::map<ElementId, std::vector<Marker>> by_object;
  for (const Marker& m : markers) by_object[m.element].push_back(m);
  store.transact(
      "validation",
      [&](Draft& d) {
        for (ElementId o : model_objects(d.state(), model)) {
          const NodeInfo* n = d.state().find_node(o);
          if (!n) continue;
          auto it = by_object.find(o);
          nlohmann::json want = it == by_object.end() ? nlohmann::json() : markers_json(it->second);
          auto cur = n->state.find(kMarkerKey);
          nlohmann::json have = cur == n->state.end() ? nlohmann::json() : cur->second;
          if (want != have) set_state(d, o, kMarkerKey, want);
        }
      },
      false);
  return markers;
}

std::vector<Marker> stored_markers(const State& state, ElementId model) {
  std::vector<Marker> out;
  for (ElementId o : model_objects(state, model)) {
    const NodeInfo* n = state.find_node(o);
    if (!n) continue;
    auto it = n->state.find(kMarkerKey);
    if (it == n->state.end() || !it->second.is_array()) continue;
    for (const auto& j : it->second) {
      Marker m;
      m.element = o;
      m.rule = j.value("rule", "");
      m.message = j.value("message", "");
      m.severity = parse_severity(j.value("severity", "error")).value_or(Severity::Error);
      out.push_back(std::move(m));
    }
  }
  return out;
}

ElementId register_validation_rule(Store& store, ElementId viewpoint, ValidationRule rule) {
  if (!rule.applies_to.empty()) parse_predicate(rule.applies_to);
  parse_script(rule.check);
  auto it = store.state().viewpoints.find(viewpoint);
  if (it == store.state().viewpoints.end()) fail(ErrorCode::NotFound, "no viewpoint " + viewpoint.str());
  for (const ValidationRule& r : it->second.validation_rules) {
    if (r.name == rule.name) fail(ErrorCode::NameClash, "validation rule '" + rule.name + "' already exists");
  }
  ElementId id;
  store.transact("rules", [&](Draft& d) {
    Viewpoint vp = d.state().viewpoints.at(viewpoint);
    rule.id = d.fresh_id();
    id = rule.id;
    vp.validation_rules.push_back(rule);
    put_viewpoint(d, std::move(vp));
  });
  return id;
}

nlohmann::json marker_report(const State& state, const std::vector<Marker>& markers) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Marker& m : markers) {
    arr.push_back({{"element", element_path(state, m.element)},
                   {"id", m.element.str()},
                   {"rule", m.rule},
                   {"severity", std::string(to_string(m.severity))},
                   {"message", m.message}});
  }
  return arr;
}

}  // namespace mwb
