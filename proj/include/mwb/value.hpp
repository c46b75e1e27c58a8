#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mwb/query.hpp"
#include "mwb/state.hpp"

namespace mwb {

struct Value;
using ValueList = std::vector<Value>;

struct Record;
struct Closure;
struct BuiltinFn;

// Live handles into the store; members are read on access.
struct NodeRef {
  ElementId id;
  bool operator==(const NodeRef&) const = default;
};
struct StateRef {
  ElementId id;
  bool operator==(const StateRef&) const = default;
};
struct ViewRef {
  ElementId viewpoint;
  ElementId view;
  bool operator==(const ViewRef&) const = default;
};

struct Value {
  using Data = std::variant<std::monostate, bool, std::int64_t, double, std::string, ElementId, NodeRef, StateRef,
                            ViewRef, std::shared_ptr<const ValueList>, std::shared_ptr<const Record>,
                            std::shared_ptr<const Closure>, std::shared_ptr<const BuiltinFn>>;
  Data data;

  Value() = default;
  Value(std::monostate) {}
  Value(bool b) : data(b) {}
  Value(std::int64_t i) : data(i) {}
  Value(int i) : data(static_cast<std::int64_t>(i)) {}
  Value(double d) : data(d) {}
  Value(std::string s) : data(std::move(s)) {}
  Value(const char* s) : data(std::string(s)) {}
  Value(ElementId id) : data(id) {}
  Value(NodeRef n) : data(n) {}
  Value(StateRef s) : data(s) {}
  Value(ViewRef v) : data(v) {}
  Value(ValueList list) : data(std::make_shared<const ValueList>(std::move(list))) {}
  Value(std::shared_ptr<const Record> r) : data(std::move(r)) {}
  Value(std::shared_ptr<const Closure> c) : data(std::move(c)) {}
  Value(std::shared_ptr<const BuiltinFn> b) : data(std::move(b)) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(data); }
  bool is_number() const { return std::holds_alternative<std::int64_t>(data) || std::holds_alternative<double>(data); }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&data);
  }
  const ValueList* list() const {
    auto* p = std::get_if<std::shared_ptr<const ValueList>>(&data);
    return p ? p->get() : nullptr;
  }
  const Record* record() const {
    auto* p = std::get_if<std::shared_ptr<const Record>>(&data);
    return p ? p->get() : nullptr;
  }
  double number() const;
  std::string_view type_name() const;
};

struct Record {
  std::map<std::string, Value> fields;
};

struct Closure {
  ExprPtr body;
  std::vector<std::string> params;
  std::map<std::string, Value> captured;
};

struct BuiltinFn {
  std::string name;
  Value receiver;
};

std::shared_ptr<const Record> make_record(std::map<std::string, Value> fields);

// Loose equality: numbers compare by value across int/real, lists and
// records structurally, handles by id.
bool values_equal(const Value& a, const Value& b);

bool truthy(const Value& v);

Value from_scalar(const Scalar& s);
Value from_json(const nlohmann::json& j);
// Throws TypeMismatch for values with no persistent form (closures, handles
// other than elements).
nlohmann::json to_json(const Value& v);
Scalar to_scalar(const Value& v);

// Console notation: top-level strings bare, strings inside lists quoted,
// lists as `[ a, b ]`, integral reals without a fraction.
std::string format_value(const State& state, const Value& v);

// Text used by template splices and string concatenation.
std::string display_text(const State& state, const Value& v);

std::string format_number(double d);

}  // namespace mwb
