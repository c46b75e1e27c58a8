#include "mwb/ops.hpp"

#include <algorithm>
#include <set>

namespace mwb {

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::Create: return "create";
    case OpKind::Delete: return "delete";
    case OpKind::SetValue: return "setValue";
    case OpKind::SetLayout: return "setLayout";
    case OpKind::SetState: return "setState";
    case OpKind::SetFeatureOfClass: return "setFeatureOfClass";
    case OpKind::Update: return "update";
    case OpKind::SetViewpoint: return "setViewpoint";
  }
  return "?";
}

OpKind Op::kind() const {
  return std::visit(
      [](const auto& c) -> OpKind {
        using T = std::decay_t<decltype(c)>;
        if (!c.before) return OpKind::Create;
        if (!c.after) return OpKind::Delete;
        if constexpr (std::is_same_v<T, ElementChange>) {
          switch (kind_of(*c.after)) {
            case ElementKind::Value: return OpKind::SetValue;
            case ElementKind::Object:
            case ElementKind::Model: return OpKind::Update;
            default: return OpKind::SetFeatureOfClass;
          }
        } else if constexpr (std::is_same_v<T, NodeChange>) {
          return c.before->same_geometry(*c.after) ? OpKind::SetState : OpKind::SetLayout;
        } else {
          return OpKind::SetViewpoint;
        }
      },
      change);
}

ElementId Op::target() const {
  return std::visit([](const auto& c) { return c.id; }, change);
}

Op invert(const Op& op) {
  return std::visit(
      [](const auto& c) -> Op {
        auto inv = c;
        std::swap(inv.before, inv.after);
        return Op{inv};
      },
      op.change);
}

std::vector<Op> Transaction::inverse_ops() const {
  std::vector<Op> out;
  out.reserve(ops.size());
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) out.push_back(invert(*it));
  return out;
}

namespace {

template <class T>
const T* current(const std::map<ElementId, T>& table, ElementId id) {
  auto it = table.find(id);
  return it == table.end() ? nullptr : &it->second;
}

template <class T, class Image>
bool matches(const std::map<ElementId, T>& table, ElementId id, const Image& before) {
  const T* cur = current(table, id);
  if (!before) return cur == nullptr;
  return cur != nullptr && *cur == *before;
}

std::uint64_t max_id(const Viewpoint& vp) {
  std::uint64_t m = vp.id.value;
  for (const View& v : vp.views) m = std::max(m, v.id.value);
  for (const Rule& r : vp.rules) m = std::max(m, r.id.value);
  for (const ValidationRule& r : vp.validation_rules) m = std::max(m, r.id.value);
  return m;
}

template <class T, class Image>
void put(std::map<ElementId, T>& table, ElementId id, const Image& after) {
  if (after) {
    table.insert_or_assign(id, *after);
  } else {
    table.erase(id);
  }
}

}  // namespace

bool applicable(const State& state, const Op& op) {
  return std::visit(
      [&](const auto& c) -> bool {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ElementChange>) {
          if (c.after && id_of(*c.after) != c.id) return false;
          return matches(state.elements, c.id, c.before);
        } else if constexpr (std::is_same_v<T, NodeChange>) {
          return matches(state.nodes, c.id, c.before);
        } else {
          return matches(state.viewpoints, c.id, c.before);
        }
      },
      op.change);
}

void apply_unchecked(State& state, const Op& op) {
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ElementChange>) {
          put(state.elements, c.id, c.after);
          if (c.after && c.id.value >= state.next_id) state.next_id = c.id.value + 1;
        } else if constexpr (std::is_same_v<T, NodeChange>) {
          put(state.nodes, c.id, c.after);
        } else {
          put(state.viewpoints, c.id, c.after);
          if (c.after) state.next_id = std::max(state.next_id, max_id(*c.after) + 1);
        }
      },
      op.change);
}

namespace {

// Insertions and removals between `before` and `after` replayed on
// `current`. Inserted ids land after their nearest surviving predecessor.
std::vector<ElementId> merge_ids(const std::vector<ElementId>& before, const std::vector<ElementId>& after,
                                 const std::vector<ElementId>& current) {
  const std::set<ElementId> was(before.begin(), before.end()), now(after.begin(), after.end());
  std::vector<ElementId> out;
  for (ElementId id : current) {
    if (!was.count(id) || now.count(id)) out.push_back(id);
  }
  for (std::size_t i = 0; i < after.size(); ++i) {
    if (was.count(after[i]) || std::find(out.begin(), out.end(), after[i]) != out.end()) continue;
    auto at = out.begin();
    for (std::size_t k = i; k-- > 0;) {
      auto p = std::find(out.begin(), out.end(), after[k]);
      if (p != out.end()) {
        at = p + 1;
        break;
      }
    }
    out.insert(at, after[i]);
  }
  return out;
}

std::optional<std::vector<ElementId>> id_list(const std::vector<Scalar>& values) {
  std::vector<ElementId> out;
  for (const Scalar& s : values) {
    const ElementId* id = std::get_if<ElementId>(&s);
    if (!id) return std::nullopt;
    out.push_back(*id);
  }
  return out;
}

// Three-way merge of one keyed field; false on a concurrent different change.
template <class Map>
bool merge_keys(const Map& before, const Map& after, const Map& current, Map& merged) {
  std::set<typename Map::key_type> keys;
  for (const auto& [k, v] : before) keys.insert(k);
  for (const auto& [k, v] : after) keys.insert(k);
  for (const auto& k : keys) {
    auto b = before.find(k), a = after.find(k), now = current.find(k);
    const bool had = b != before.end(), has = a != after.end(), present = now != current.end();
    if (had == has && (!had || b->second == a->second)) continue;
    const bool unchanged = present == had && (!had || now->second == b->second);
    const bool same = present == has && (!has || now->second == a->second);
    if (!unchanged && !same) return false;
    if (has) {
      merged.insert_or_assign(k, a->second);
    } else {
      merged.erase(k);
    }
  }
  return true;
}

std::optional<NodeInfo> merge_node(const NodeInfo& before, const NodeInfo& after, const NodeInfo& cur) {
  NodeInfo merged = cur;
  bool ok = true;
  auto field = [&](double NodeInfo::*m) {
    if (after.*m == before.*m) return;
    if (cur.*m != before.*m && cur.*m != after.*m) ok = false;
    merged.*m = after.*m;
  };
  field(&NodeInfo::x);
  field(&NodeInfo::y);
  field(&NodeInfo::width);
  field(&NodeInfo::height);
  if (!ok || !merge_keys(before.state, after.state, cur.state, merged.state)) return std::nullopt;
  return merged;
}

std::optional<Element> merge_element(const State& state, const Element& before, const Element& after,
                                     const Element& cur) {
  if (const auto* b = std::get_if<DModel>(&before)) {
    const auto* a = std::get_if<DModel>(&after);
    const auto* c = std::get_if<DModel>(&cur);
    if (!a || !c) return std::nullopt;
    DModel rest_b = *b, rest_a = *a, rest_c = *c;
    rest_b.root_objects = rest_a.root_objects = rest_c.root_objects = {};
    if (rest_b != rest_a || rest_b != rest_c) return std::nullopt;
    DModel merged = *c;
    merged.root_objects = merge_ids(b->root_objects, a->root_objects, c->root_objects);
    return merged;
  }
  if (const auto* b = std::get_if<DObject>(&before)) {
    const auto* a = std::get_if<DObject>(&after);
    const auto* c = std::get_if<DObject>(&cur);
    if (!a || !c) return std::nullopt;
    DObject rest_b = *b, rest_a = *a, rest_c = *c;
    rest_b.features = rest_a.features = rest_c.features = {};
    if (rest_b != rest_a || rest_b != rest_c) return std::nullopt;
    DObject merged = *c;
    if (!merge_keys(b->features, a->features, c->features, merged.features)) return std::nullopt;
    return merged;
  }
  if (const auto* b = std::get_if<DValue>(&before)) {
    const auto* a = std::get_if<DValue>(&after);
    const auto* c = std::get_if<DValue>(&cur);
    if (!a || !c || b->owner != c->owner || b->feature != c->feature || a->owner != b->owner ||
        a->feature != b->feature) {
      return std::nullopt;
    }
    const DReference* ref = state.find_as<DReference>(b->feature);
    if (!ref || ref->upper == 1) return std::nullopt;
    auto lb = id_list(b->values), la = id_list(a->values), lc = id_list(c->values);
    if (!lb || !la || !lc) return std::nullopt;
    DValue merged = *c;
    merged.values.clear();
    for (ElementId id : merge_ids(*lb, *la, *lc)) merged.values.push_back(id);
    return merged;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Op> merge_stale(const State& state, const Op& op) {
  if (const auto* c = std::get_if<NodeChange>(&op.change)) {
    const NodeInfo* cur = state.find_node(c->id);
    if (!c->before || !c->after || !cur) return std::nullopt;
    auto merged = merge_node(*c->before, *c->after, *cur);
    if (!merged) return std::nullopt;
    return Op{NodeChange{c->id, *cur, std::move(*merged)}};
  }
  if (const auto* c = std::get_if<ElementChange>(&op.change)) {
    const Element* cur = state.find(c->id);
    if (!c->before || !c->after || !cur) return std::nullopt;
    auto merged = merge_element(state, *c->before, *c->after, *cur);
    if (!merged) return std::nullopt;
    return Op{ElementChange{c->id, *cur, std::move(*merged)}};
  }
  return std::nullopt;
}

Op rebase(const State& state, const Op& op) {
  return std::visit(
      [&](const auto& c) -> Op {
        using T = std::decay_t<decltype(c)>;
        auto out = c;
        if constexpr (std::is_same_v<T, ElementChange>) {
          const Element* cur = current(state.elements, c.id);
          out.before = cur ? std::optional<Element>(*cur) : std::nullopt;
        } else if constexpr (std::is_same_v<T, NodeChange>) {
          const NodeInfo* cur = current(state.nodes, c.id);
          out.before = cur ? std::optional<NodeInfo>(*cur) : std::nullopt;
        } else {
          const Viewpoint* cur = current(state.viewpoints, c.id);
          out.before = cur ? std::optional<Viewpoint>(*cur) : std::nullopt;
        }
        return Op{out};
      },
      op.change);
}

}  // namespace mwb
