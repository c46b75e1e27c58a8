#include "mwb/value.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "mwb/reflect.hpp"

namespace mwb {

double Value::number() const {
  if (auto* i = as<std::int64_t>()) return static_cast<double>(*i);
  if (auto* d = as<double>()) return *d;
  fail(ErrorCode::TypeMismatch, "expected a number, got " + std::string(type_name()));
}

std::string_view Value::type_name() const {
  static constexpr std::string_view kNames[] = {"null", "boolean", "integer", "real",   "string",   "element", "node",
                                                "state", "view",   "list",    "record", "function", "function"};
  return kNames[data.index()];
}

std::shared_ptr<const Record> make_record(std::map<std::string, Value> fields) {
  auto r = std::make_shared<Record>();
  r->fields = std::move(fields);
  return r;
}

bool values_equal(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) {
    if (a.as<std::int64_t>() && b.as<std::int64_t>()) return *a.as<std::int64_t>() == *b.as<std::int64_t>();
    return a.number() == b.number();
  }
  if (a.data.index() != b.data.index()) return false;
  if (const ValueList* la = a.list()) {
    const ValueList* lb = b.list();
    if (la->size() != lb->size()) return false;
    for (std::size_t i = 0; i < la->size(); ++i) {
      if (!values_equal((*la)[i], (*lb)[i])) return false;
    }
    return true;
  }
  if (const Record* ra = a.record()) {
    const Record* rb = b.record();
    if (ra->fields.size() != rb->fields.size()) return false;
    for (const auto& [k, v] : ra->fields) {
      auto it = rb->fields.find(k);
      if (it == rb->fields.end() || !values_equal(v, it->second)) return false;
    }
    return true;
  }
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return true;
        } else {
          return x == std::get<T>(b.data);
        }
      },
      a.data);
}

bool truthy(const Value& v) {
  if (v.is_null()) return false;
  if (auto* b = v.as<bool>()) return *b;
  if (auto* i = v.as<std::int64_t>()) return *i != 0;
  if (auto* d = v.as<double>()) return *d != 0 && !std::isnan(*d);
  if (auto* s = v.as<std::string>()) return !s->empty();
  return true;
}

Value from_scalar(const Scalar& s) {
  return std::visit([](const auto& x) { return Value(x); }, s);
}

Value from_json(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return {};
    case nlohmann::json::value_t::boolean: return j.get<bool>();
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned: return j.get<std::int64_t>();
    case nlohmann::json::value_t::number_float: return j.get<double>();
    case nlohmann::json::value_t::string: return j.get<std::string>();
    case nlohmann::json::value_t::array: {
      ValueList out;
      for (const auto& e : j) out.push_back(from_json(e));
      return out;
    }
    case nlohmann::json::value_t::object: {
      if (j.size() == 1 && j.contains("ref") && j["ref"].is_string()) {
        if (auto id = ElementId::parse(j["ref"].get<std::string>())) return *id;
      }
      std::map<std::string, Value> fields;
      for (const auto& [k, v] : j.items()) fields.emplace(k, from_json(v));
      return make_record(std::move(fields));
    }
    default: return {};
  }
}

nlohmann::json to_json(const Value& v) {
  if (v.is_null()) return nullptr;
  if (auto* b = v.as<bool>()) return *b;
  if (auto* i = v.as<std::int64_t>()) return *i;
  if (auto* d = v.as<double>()) return *d;
  if (auto* s = v.as<std::string>()) return *s;
  if (auto* id = v.as<ElementId>()) return nlohmann::json{{"ref", id->str()}};
  if (const ValueList* l = v.list()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Value& e : *l) arr.push_back(to_json(e));
    return arr;
  }
  if (const Record* r = v.record()) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [k, f] : r->fields) obj[k] = to_json(f);
    return obj;
  }
  fail(ErrorCode::TypeMismatch, "a " + std::string(v.type_name()) + " cannot be stored");
}

Scalar to_scalar(const Value& v) {
  if (auto* b = v.as<bool>()) return *b;
  if (auto* i = v.as<std::int64_t>()) return *i;
  if (auto* d = v.as<double>()) return *d;
  if (auto* s = v.as<std::string>()) return *s;
  if (auto* id = v.as<ElementId>()) return *id;
  fail(ErrorCode::TypeMismatch, "a " + std::string(v.type_name()) + " is not a storable literal");
}

std::string format_number(double d) {
  if (std::isnan(d)) return "NaN";
  if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
  if (d == std::trunc(d) && std::fabs(d) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", d);
    return std::string(buf) == "-0" ? "0" : buf;
  }
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, d);
    if (std::strtod(buf, nullptr) == d) break;
  }
  return buf;
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  return out + "'";
}

std::string format_inner(const State& state, const Value& v) {
  if (v.is_null()) return "null";
  if (auto* b = v.as<bool>()) return *b ? "true" : "false";
  if (auto* i = v.as<std::int64_t>()) return std::to_string(*i);
  if (auto* d = v.as<double>()) return format_number(*d);
  if (auto* s = v.as<std::string>()) return quoted(*s);
  if (auto* id = v.as<ElementId>()) return describe(state, *id);
  if (auto* n = v.as<NodeRef>()) {
    const NodeInfo* info = state.find_node(n->id);
    if (!info) return "null";
    return "{ x: " + format_number(info->x) + ", y: " + format_number(info->y) +
           ", width: " + format_number(info->width) + ", height: " + format_number(info->height) + " }";
  }
  if (auto* s = v.as<StateRef>()) {
    const NodeInfo* info = state.find_node(s->id);
    if (!info || info->state.empty()) return "{}";
    std::string out = "{ ";
    bool first = true;
    for (const auto& [k, j] : info->state) {
      if (!first) out += ", ";
      first = false;
      out += k + ": " + format_inner(state, from_json(j));
    }
    return out + " }";
  }
  if (auto* vr = v.as<ViewRef>()) {
    auto it = state.viewpoints.find(vr->viewpoint);
    const View* view = it == state.viewpoints.end() ? nullptr : it->second.find_view(vr->view);
    return view ? "View " + view->name + " " + view->id.str() : "View (default)";
  }
  if (const ValueList* l = v.list()) {
    if (l->empty()) return "[]";
    std::string out = "[ ";
    for (std::size_t i = 0; i < l->size(); ++i) {
      if (i) out += ", ";
      out += format_inner(state, (*l)[i]);
    }
    return out + " ]";
  }
  if (const Record* r = v.record()) {
    if (r->fields.empty()) return "{}";
    std::string out = "{ ";
    bool first = true;
    for (const auto& [k, f] : r->fields) {
      if (!first) out += ", ";
      first = false;
      out += k + ": " + format_inner(state, f);
    }
    return out + " }";
  }
  if (auto* b = v.as<std::shared_ptr<const BuiltinFn>>()) return "[Function " + (*b)->name + "]";
  return "[Function]";
}

}  // namespace

std::string format_value(const State& state, const Value& v) {
  if (auto* s = v.as<std::string>()) return *s;
  return format_inner(state, v);
}

std::string display_text(const State& state, const Value& v) {
  if (auto* s = v.as<std::string>()) return *s;
  if (auto* id = v.as<ElementId>()) {
    auto name = element_name(state, *id);
    return name ? *name : id->str();
  }
  if (const ValueList* l = v.list()) {
    std::string out;
    for (std::size_t i = 0; i < l->size(); ++i) {
      if (i) out += ",";
      if (!(*l)[i].is_null()) out += display_text(state, (*l)[i]);
    }
    return out;
  }
  return format_inner(state, v);
}

}  // namespace mwb
