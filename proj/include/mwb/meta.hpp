#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mwb/ids.hpp"

namespace mwb {

// Scalar payload of a DValue slot. Enum literals are stored as strings and
// checked against the feature's DEnum; reference targets are ElementIds.
using Scalar = std::variant<bool, std::int64_t, double, std::string, ElementId>;

enum class PrimitiveKind : std::uint8_t { Integer, Real, String, Boolean };

std::string_view to_string(PrimitiveKind kind);
std::optional<PrimitiveKind> parse_primitive(std::string_view text);

struct AttributeType {
  PrimitiveKind primitive = PrimitiveKind::String;
  ElementId enumeration;  // non-null when typed by a DEnum

  bool is_enum() const { return static_cast<bool>(enumeration); }
  bool operator==(const AttributeType&) const = default;

  static AttributeType of(PrimitiveKind kind) { return {kind, {}}; }
  static AttributeType of_enum(ElementId e) { return {PrimitiveKind::String, e}; }
};

inline constexpr std::int32_t kUnbounded = -1;

struct OperationSignature {
  std::string name;
  std::vector<std::string> parameters;
  std::string result;
  bool operator==(const OperationSignature&) const = default;
};

struct DModel {
  ElementId id;
  std::string name;
  bool is_metamodel = false;
  ElementId conforms_to;  // metamodel id; null for metamodels
  std::vector<ElementId> packages;
  std::vector<ElementId> root_objects;
  bool operator==(const DModel&) const = default;
};

struct DPackage {
  ElementId id;
  std::string name;
  ElementId model;
  std::vector<ElementId> classifiers;
  bool operator==(const DPackage&) const = default;
};

struct ClassFlags {
  bool is_abstract = false;
  bool is_interface = false;
  bool is_final = false;
  bool is_singleton = false;
  bool is_rootable = false;
  bool is_primitive = false;
  bool operator==(const ClassFlags&) const = default;
};

struct DClass {
  ElementId id;
  std::string name;
  ElementId package;
  ClassFlags flags;
  std::vector<ElementId> extends;
  std::vector<ElementId> attributes;
  std::vector<ElementId> references;
  std::vector<OperationSignature> operations;
  bool operator==(const DClass&) const = default;
};

struct DEnum {
  ElementId id;
  std::string name;
  ElementId package;
  std::vector<std::string> literals;
  bool operator==(const DEnum&) const = default;
};

struct DAttribute {
  ElementId id;
  std::string name;
  ElementId owner;
  AttributeType type;
  std::int32_t lower = 0;
  std::int32_t upper = 1;
  std::optional<Scalar> default_value;
  bool operator==(const DAttribute&) const = default;
};

struct DReference {
  ElementId id;
  std::string name;
  ElementId owner;
  ElementId target;
  std::int32_t lower = 0;
  std::int32_t upper = 1;
  bool is_containment = false;
  bool operator==(const DReference&) const = default;
};

struct Containment {
  ElementId parent;
  ElementId reference;
  bool operator==(const Containment&) const = default;
};

struct DObject {
  ElementId id;
  ElementId model;
  ElementId instance_of;
  std::map<ElementId, ElementId> features;  // feature id -> DValue id
  std::optional<Containment> container;
  bool operator==(const DObject&) const = default;
};

struct DValue {
  ElementId id;
  ElementId owner;
  ElementId feature;
  std::vector<Scalar> values;
  bool operator==(const DValue&) const = default;
};

using Element = std::variant<DModel, DPackage, DClass, DEnum, DAttribute, DReference, DObject, DValue>;

enum class ElementKind : std::uint8_t { Model, Package, Class, Enum, Attribute, Reference, Object, Value };

inline ElementKind kind_of(const Element& e) { return static_cast<ElementKind>(e.index()); }
std::string_view to_string(ElementKind kind);

inline ElementId id_of(const Element& e) {
  return std::visit([](const auto& r) { return r.id; }, e);
}

bool is_bounded(std::int32_t upper);
bool within_upper(std::size_t count, std::int32_t upper);

}  // namespace mwb
