#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mwb/state.hpp"

namespace mwb {

// Primitive mutation kinds recorded in the change log. The kind is derived
// from the change itself; it is informational (traces, logs) while the
// before/after images carry the semantics.
enum class OpKind : std::uint8_t {
  Create,
  Delete,
  SetValue,
  SetLayout,
  SetState,
  SetFeatureOfClass,
  Update,
  SetViewpoint,
};

std::string_view to_string(OpKind k);

struct ElementChange {
  ElementId id;
  std::optional<Element> before;
  std::optional<Element> after;
  bool operator==(const ElementChange&) const = default;
};

struct NodeChange {
  ElementId id;
  std::optional<NodeInfo> before;
  std::optional<NodeInfo> after;
  bool operator==(const NodeChange&) const = default;
};

struct ViewpointChange {
  ElementId id;
  std::optional<Viewpoint> before;
  std::optional<Viewpoint> after;
  bool operator==(const ViewpointChange&) const = default;
};

using Change = std::variant<ElementChange, NodeChange, ViewpointChange>;

struct Op {
  Change change;

  OpKind kind() const;
  ElementId target() const;
  bool operator==(const Op&) const = default;
};

Op invert(const Op& op);

struct Transaction {
  TxId id = 0;
  std::string author;
  std::vector<Op> ops;

  std::vector<Op> inverse_ops() const;
  bool operator==(const Transaction&) const = default;
};

// Compare-and-swap application: the op applies only if the current image
// equals `before`.
bool applicable(const State& state, const Op& op);
void apply_unchecked(State& state, const Op& op);

// Three-way merge of an op whose `before` is stale. Covers node geometry and
// state keys, object feature maps, model root lists and many-valued
// references: whatever the op leaves alone keeps its current value, list
// insertions and removals are replayed on the current list. Empty when the
// same field changed concurrently to something else.
std::optional<Op> merge_stale(const State& state, const Op& op);

// Replace each op's `before` with the current image so it applies
// unconditionally (used by undo/redo).
Op rebase(const State& state, const Op& op);

}  // namespace mwb
