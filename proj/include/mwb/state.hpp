#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "mwb/error.hpp"
#include "mwb/meta.hpp"
#include "mwb/view_types.hpp"

namespace mwb {

// Layout record of the `node` submodel plus the open state map that
// parameters (grid, level) and validation markers live in.
struct NodeInfo {
  ElementId element;
  double x = 0;
  double y = 0;
  double width = 120;
  double height = 60;
  std::map<std::string, nlohmann::json> state;

  bool same_geometry(const NodeInfo& o) const {
    return x == o.x && y == o.y && width == o.width && height == o.height;
  }
  bool operator==(const NodeInfo&) const = default;
};

inline constexpr double kDefaultNodeWidth = 120;
inline constexpr double kDefaultNodeHeight = 60;

// The complete tri-submodel content of a project: `data` elements, `node`
// layout records, and `view` definitions.
struct State {
  std::map<ElementId, Element> elements;
  std::map<ElementId, NodeInfo> nodes;
  std::map<ElementId, Viewpoint> viewpoints;
  std::uint64_t next_id = 1;

  bool operator==(const State&) const = default;

  // Equality ignoring the id counter, which only ever grows.
  bool same_content(const State& o) const {
    return elements == o.elements && nodes == o.nodes && viewpoints == o.viewpoints;
  }

  const Element* find(ElementId id) const {
    auto it = elements.find(id);
    return it == elements.end() ? nullptr : &it->second;
  }

  template <class T>
  const T* find_as(ElementId id) const {
    const Element* e = find(id);
    return e ? std::get_if<T>(e) : nullptr;
  }

  template <class T>
  const T& get_as(ElementId id) const {
    const Element* e = find(id);
    if (!e) fail(ErrorCode::NotFound, "no element " + id.str());
    const T* t = std::get_if<T>(e);
    if (!t) fail(ErrorCode::TypeMismatch, id.str() + " is a " + std::string(to_string(kind_of(*e))));
    return *t;
  }

  const NodeInfo* find_node(ElementId id) const {
    auto it = nodes.find(id);
    return it == nodes.end() ? nullptr : &it->second;
  }
};

}  // namespace mwb
