#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mwb/kernels.hpp"
#include "mwb/store.hpp"

namespace mwb {

inline constexpr const char* kMarkerKey = "validation.errors";

struct Marker {
  ElementId element;
  Severity severity = Severity::Error;
  std::string message;
  std::string rule;  // validation rule name, or the structural check name
  bool operator==(const Marker&) const = default;
};

// Structural conformance plus every validation rule of every viewpoint, as a
// pure function of the state. Markers are grouped per object in object order.
std::vector<Marker> compute_markers(const State& state, ElementId model, ExecPolicy policy = ExecPolicy::Parallel);

// Computes markers and stores them under kMarkerKey in each object's node
// state; objects without findings lose the key. Writes happen in one
// transaction that is left out of the undo history and is empty when nothing
// changed.
std::vector<Marker> validate_model(Store& store, ElementId model, ExecPolicy policy = ExecPolicy::Parallel);

// Markers currently stored in node state for the model's objects.
std::vector<Marker> stored_markers(const State& state, ElementId model);

ElementId register_validation_rule(Store& store, ElementId viewpoint, ValidationRule rule);

// One record per marker: element path, rule, severity, message.
nlohmann::json marker_report(const State& state, const std::vector<Marker>& markers);

}  // namespace mwb
