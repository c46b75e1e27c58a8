#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mwb/state.hpp"

namespace mwb {

const Element& resolve(const State& state, ElementId id);

// Instances of `cls` and its transitive subclasses in `model`, in creation order.
std::vector<ElementId> class_all_instances(const State& state, ElementId cls, ElementId model);

struct FeatureSet {
  std::vector<ElementId> attributes;
  std::vector<ElementId> references;
  bool operator==(const FeatureSet&) const = default;
};

// Own plus inherited features; superclass features first, declaration order kept.
FeatureSet class_features(const State& state, ElementId cls);

struct Hierarchy {
  std::vector<ElementId> extends;
  std::vector<ElementId> extended_by;
};

Hierarchy class_hierarchy(const State& state, ElementId cls);

// `$name` navigation. For a DObject the result is the DValue of the named
// feature; for classes, packages and models it is the named child element.
ElementId named_child(const State& state, ElementId parent, std::string_view name);

// --- helpers shared by the rest of the kernel ---

bool is_subclass_of(const State& state, ElementId cls, ElementId ancestor);
std::vector<ElementId> superclass_closure(const State& state, ElementId cls);
std::optional<ElementId> find_feature(const State& state, ElementId cls, std::string_view name);
std::optional<ElementId> find_classifier(const State& state, ElementId metamodel, std::string_view name);
std::vector<ElementId> metamodel_classifiers(const State& state, ElementId metamodel);
std::string_view feature_name(const State& state, ElementId feature);

// Owning model of any element: metamodel for meta elements, model for objects.
ElementId model_of(const State& state, ElementId id);
ElementId metamodel_of(const State& state, ElementId model);

std::vector<ElementId> model_objects(const State& state, ElementId model);
std::vector<ElementId> models(const State& state, bool metamodels);

// Objects holding a reference DValue (containment included) that targets `id`.
std::vector<ElementId> referrers(const State& state, ElementId id);
std::vector<ElementId> contained_children(const State& state, ElementId object);

// Value of the object's `name` attribute, or the element name for meta elements.
std::optional<std::string> element_name(const State& state, ElementId id);
std::string class_name_of(const State& state, ElementId object);
std::string describe(const State& state, ElementId id);

// `/model/Class:name` for objects (label or id when unnamed), `/metamodel/Class`
// for classes.
std::string element_path(const State& state, ElementId id);

const DValue* value_of(const State& state, ElementId object, std::string_view feature);

bool is_reference_feature(const State& state, ElementId feature);
std::int32_t feature_upper(const State& state, ElementId feature);
std::int32_t feature_lower(const State& state, ElementId feature);

}  // namespace mwb
