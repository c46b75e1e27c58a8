#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mwb/store.hpp"

namespace mwb {

// --- model construction and editing, all inside an open Draft ---

ElementId create_metamodel(Draft& d, const std::string& name);
ElementId create_model(Draft& d, const std::string& name, ElementId metamodel);
ElementId add_package(Draft& d, ElementId metamodel, const std::string& name);
ElementId add_enum(Draft& d, ElementId target, const std::string& name, std::vector<std::string> literals);

// New concrete class without features. `target` is a metamodel (first
// package, created on demand) or a package.
ElementId add_class(Draft& d, ElementId target, const std::string& name, ClassFlags flags = {});

// Instantiates `class_name`. Keys of `init` name features; attribute values
// are literals or arrays of literals; reference values are "#n" ids or, for
// containment, nested objects (class taken from "$class" or the reference
// target).
ElementId add_object(Draft& d, ElementId model, const std::string& class_name,
                     const nlohmann::json& init = nlohmann::json::object());

enum class EditKind : std::uint8_t { Set, Insert, Remove };

struct FeatureEdit {
  EditKind kind = EditKind::Set;
  std::vector<Scalar> values;     // Set: full list; Insert: items to insert
  std::optional<std::size_t> index;  // Insert position / Remove position
};

void mutate_feature(Draft& d, ElementId object, const std::string& feature, const FeatureEdit& edit);
void set_feature(Draft& d, ElementId object, const std::string& feature, std::vector<Scalar> values);

void delete_element(Draft& d, ElementId id);

void set_layout(Draft& d, ElementId id, double x, double y, double width, double height);
void set_position(Draft& d, ElementId id, double x, double y);
void set_state(Draft& d, ElementId id, const std::string& key, const nlohmann::json& value);

ElementId put_viewpoint(Draft& d, Viewpoint vp);

// Converts a literal to the attribute's type (integer widens to real) or
// throws TypeMismatch.
Scalar coerce_literal(const State& state, const DAttribute& attr, const Scalar& value);

// Parses console/editor text into a literal of the attribute's type.
Scalar parse_literal(const State& state, const DAttribute& attr, const std::string& text);

// --- metamodel co-evolution ---

namespace meta_edit {

struct AddClass {
  ElementId target;
  std::string name;
  ClassFlags flags;
};
struct AddAttribute {
  ElementId owner;
  std::string name;
  AttributeType type;
  std::int32_t lower = 0;
  std::int32_t upper = 1;
  std::optional<Scalar> default_value;
};
struct AddReference {
  ElementId owner;
  std::string name;
  ElementId target;
  std::int32_t lower = 0;
  std::int32_t upper = 1;
  bool is_containment = false;
};
struct RemoveFeature {
  ElementId feature;
};
struct RenameFeature {
  ElementId feature;
  std::string name;
};
struct RenameClass {
  ElementId cls;
  std::string name;
};
struct SetAttributeType {
  ElementId attribute;
  AttributeType type;
};
struct SetBounds {
  ElementId feature;
  std::int32_t lower = 0;
  std::int32_t upper = 1;
};
struct SetContainment {
  ElementId reference;
  bool is_containment = false;
};
struct SetClassFlags {
  ElementId cls;
  ClassFlags flags;
};
struct AddSuperclass {
  ElementId cls;
  ElementId super;
};
struct RemoveSuperclass {
  ElementId cls;
  ElementId super;
};
struct DeleteClass {
  ElementId cls;
};
struct AddEnumLiteral {
  ElementId enumeration;
  std::string literal;
};

}  // namespace meta_edit

using MetaEdit =
    std::variant<meta_edit::AddClass, meta_edit::AddAttribute, meta_edit::AddReference, meta_edit::RemoveFeature,
                 meta_edit::RenameFeature, meta_edit::RenameClass, meta_edit::SetAttributeType, meta_edit::SetBounds,
                 meta_edit::SetContainment, meta_edit::SetClassFlags, meta_edit::AddSuperclass,
                 meta_edit::RemoveSuperclass, meta_edit::DeleteClass, meta_edit::AddEnumLiteral>;

// Applies a metamodel edit and propagates it to every conforming model in the
// same draft. Returns the created element for additions, null otherwise.
ElementId co_evolve(Draft& d, const MetaEdit& edit);

// Objects instantiating `cls` or a subclass, across all models.
std::vector<ElementId> instances_everywhere(const State& state, ElementId cls);

}  // namespace mwb
