#include "mwb/store.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mwb/reflect.hpp"
#include "mwb/serialize.hpp"

namespace mwb {

Draft::Draft(State& state) : state_(state), start_next_id_(state.next_id) {}

void Draft::record(Op op) {
  apply_unchecked(state_, op);
  ops_.push_back(std::move(op));
}

void Draft::put(Element e) {
  const ElementId id = id_of(e);
  const Element* cur = state_.find(id);
  if (cur && *cur == e) return;
  record(Op{ElementChange{id, cur ? std::optional<Element>(*cur) : std::nullopt, std::move(e)}});
}

void Draft::erase(ElementId id) {
  const Element* cur = state_.find(id);
  if (!cur) return;
  record(Op{ElementChange{id, *cur, std::nullopt}});
}

void Draft::put_node(NodeInfo n) {
  const ElementId id = n.element;
  const NodeInfo* cur = state_.find_node(id);
  if (cur && *cur == n) return;
  record(Op{NodeChange{id, cur ? std::optional<NodeInfo>(*cur) : std::nullopt, std::move(n)}});
}

void Draft::erase_node(ElementId id) {
  const NodeInfo* cur = state_.find_node(id);
  if (!cur) return;
  record(Op{NodeChange{id, *cur, std::nullopt}});
}

void Draft::put_viewpoint(Viewpoint vp) {
  const ElementId id = vp.id;
  auto it = state_.viewpoints.find(id);
  if (it != state_.viewpoints.end() && it->second == vp) return;
  std::optional<Viewpoint> before;
  if (it != state_.viewpoints.end()) before = it->second;
  record(Op{ViewpointChange{id, std::move(before), std::move(vp)}});
}

void Draft::erase_viewpoint(ElementId id) {
  auto it = state_.viewpoints.find(id);
  if (it == state_.viewpoints.end()) return;
  record(Op{ViewpointChange{id, it->second, std::nullopt}});
}

void Draft::apply_checked(const Op& op) {
  if (!applicable(state_, op)) {
    fail(ErrorCode::Rejected, std::string(to_string(op.kind())) + " on " + op.target().str() + " no longer applies");
  }
  record(op);
}

void Draft::rollback() {
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) apply_unchecked(state_, invert(*it));
  ops_.clear();
  state_.next_id = start_next_id_;
}

std::vector<Op> Draft::release() {
  // Ids handed out but never stored are given back so that a replayed log
  // reproduces the same counter.
  std::uint64_t hi = start_next_id_;
  State probe;
  probe.next_id = hi;
  for (const Op& op : ops_) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (!std::is_same_v<T, NodeChange>) {
            if (c.after) apply_unchecked(probe, Op{T{c.id, std::nullopt, c.after}});
          }
        },
        op.change);
  }
  state_.next_id = std::max(hi, probe.next_id);
  return std::move(ops_);
}

namespace {

void note(std::vector<ElementId>& list, std::set<ElementId>& seen, ElementId id) {
  if (id && seen.insert(id).second) list.push_back(id);
}

bool is_noop(const Op& op) {
  return std::visit([](const auto& c) { return c.before == c.after; }, op.change);
}

}  // namespace

CommitResult summarize(const State& after, const std::vector<Op>& ops) {
  CommitResult r;
  r.empty = ops.empty();
  std::set<ElementId> seen_affected;
  std::set<ElementId> seen_removed;
  for (const Op& op : ops) {
    if (const auto* c = std::get_if<ElementChange>(&op.change)) {
      const Element& img = c->after ? *c->after : *c->before;
      if (const auto* v = std::get_if<DValue>(&img)) {
        note(r.affected, seen_affected, v->owner);
      } else if (std::holds_alternative<DObject>(img)) {
        if (!c->after) {
          note(r.removed, seen_removed, c->id);
        } else {
          note(r.affected, seen_affected, c->id);
        }
      }
    } else if (const auto* n = std::get_if<NodeChange>(&op.change)) {
      if (n->before && n->after && !n->before->same_geometry(*n->after)) note(r.affected, seen_affected, n->id);
    }
  }
  std::erase_if(r.affected, [&](ElementId id) { return after.find(id) == nullptr; });
  std::erase_if(r.removed, [&](ElementId id) { return after.find(id) != nullptr; });
  return r;
}

Store::Store(State initial, std::vector<Transaction> log) : state_(std::move(initial)), log_(std::move(log)) {}

std::shared_ptr<const State> Store::snapshot() const {
  if (!snapshot_) snapshot_ = std::make_shared<const State>(state_);
  return snapshot_;
}

CommitResult Store::commit(const std::string& author, std::vector<Op> ops, TxId id) {
  if (ops.empty()) return {};
  Transaction tx{id ? id : last_tx() + 1, author, std::move(ops)};
  CommitResult r = summarize(state_, tx.ops);
  r.id = tx.id;
  log_.push_back(std::move(tx));
  snapshot_.reset();
  return r;
}

CommitResult Store::transact(const std::string& author, const std::function<void(Draft&)>& body, bool undoable) {
  Draft d(state_);
  try {
    body(d);
  } catch (...) {
    d.rollback();
    throw;
  }
  CommitResult r = commit(author, d.release(), 0);
  if (!r.empty && undoable) {
    undo_stack_.push_back({r.id});
    redo_stack_.clear();
  }
  return r;
}

std::vector<Op> Store::prepare(const std::function<void(Draft&)>& body, std::optional<std::uint64_t> first_id) {
  const std::uint64_t next = state_.next_id;
  if (first_id) state_.next_id = *first_id;
  Draft d(state_);
  try {
    body(d);
  } catch (...) {
    d.rollback();
    state_.next_id = next;
    throw;
  }
  std::vector<Op> ops = d.ops();
  d.rollback();
  state_.next_id = next;
  return ops;
}

CommitResult Store::commit_ops(const std::string& author, const std::vector<Op>& ops, bool undoable) {
  Draft d(state_);
  try {
    for (const Op& op : ops) {
      std::optional<Op> merged = applicable(state_, op) ? std::nullopt : merge_stale(state_, op);
      d.apply_checked(merged ? *merged : op);
    }
    // Each op matched its own before-image, but ops prepared against an older
    // state can still combine into dangling references.
    auto problems = integrity_problems(state_, d.ops());
    if (!problems.empty()) fail(ErrorCode::Rejected, "edit conflicts with a concurrent change: " + problems.front());
  } catch (...) {
    d.rollback();
    throw;
  }
  CommitResult r = commit(author, d.release(), 0);
  if (!r.empty && undoable) {
    undo_stack_.push_back({r.id});
    redo_stack_.clear();
  }
  return r;
}

CommitResult Store::apply_committed(const Transaction& tx) {
  if (tx.id <= last_tx()) {
    fail(ErrorCode::Conflict, "transaction " + std::to_string(tx.id) + " is not after " + std::to_string(last_tx()));
  }
  Draft d(state_);
  try {
    for (const Op& op : tx.ops) d.apply_checked(op);
  } catch (...) {
    d.rollback();
    throw;
  }
  d.release();
  log_.push_back(tx);
  snapshot_.reset();
  CommitResult r = summarize(state_, tx.ops);
  r.id = tx.id;
  return r;
}

const Transaction& Store::find_tx(TxId id) const {
  auto it = std::lower_bound(log_.begin(), log_.end(), id, [](const Transaction& t, TxId v) { return t.id < v; });
  if (it == log_.end() || it->id != id) fail(ErrorCode::NotFound, "no transaction " + std::to_string(id));
  return *it;
}

CommitResult Store::replay_ops(const std::string& author, const std::vector<Op>& ops) {
  Draft d(state_);
  for (const Op& op : ops) {
    Op rebased = rebase(state_, op);
    if (!is_noop(rebased)) d.apply_checked(rebased);
  }
  return commit(author, d.release(), 0);
}

CommitResult Store::undo() {
  if (undo_stack_.empty()) fail(ErrorCode::EmptyStack, "nothing to undo");
  std::vector<Op> ops;
  const std::vector<TxId>& group = undo_stack_.back();
  for (auto it = group.rbegin(); it != group.rend(); ++it) {
    std::vector<Op> inv = find_tx(*it).inverse_ops();
    ops.insert(ops.end(), inv.begin(), inv.end());
  }
  CommitResult r = replay_ops("undo", ops);
  redo_stack_.push_back(std::move(undo_stack_.back()));
  undo_stack_.pop_back();
  return r;
}

CommitResult Store::redo() {
  if (redo_stack_.empty()) fail(ErrorCode::EmptyStack, "nothing to redo");
  std::vector<Op> ops;
  for (TxId id : redo_stack_.back()) {
    const std::vector<Op>& fwd = find_tx(id).ops;
    ops.insert(ops.end(), fwd.begin(), fwd.end());
  }
  CommitResult r = replay_ops("redo", ops);
  undo_stack_.push_back(std::move(redo_stack_.back()));
  redo_stack_.pop_back();
  return r;
}

void Store::group_undo_since(std::size_t depth) {
  if (undo_stack_.size() <= depth + 1) return;
  std::vector<TxId> merged;
  for (std::size_t i = depth; i < undo_stack_.size(); ++i) {
    merged.insert(merged.end(), undo_stack_[i].begin(), undo_stack_[i].end());
  }
  undo_stack_.resize(depth);
  undo_stack_.push_back(std::move(merged));
}

Store Store::replay(const std::vector<Transaction>& log) {
  Store s;
  for (const Transaction& tx : log) s.apply_committed(tx);
  return s;
}

nlohmann::json Store::document() const { return project_to_json(state_, log_); }

std::string Store::canonical() const { return canonical_text(document()); }

void Store::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + file.string());
  out << canonical();
  if (!out) fail(ErrorCode::Io, "write failed for " + file.string());
}

Store Store::from_document(const nlohmann::json& doc) {
  auto [state, log] = project_from_json(doc);
  return Store(std::move(state), std::move(log));
}

Store Store::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::Io, file.string() + ": " + e.what());
  }
  return from_document(doc);
}

namespace {

void element_problems(const State& state, ElementId id, const Element& e, std::vector<std::string>& out) {
  if (const auto* v = std::get_if<DValue>(&e)) {
    const DObject* owner = state.find_as<DObject>(v->owner);
    if (!owner) {
      out.push_back(id.str() + ": owner " + v->owner.str() + " missing");
      return;
    }
    auto f = owner->features.find(v->feature);
    if (f == owner->features.end() || f->second != id) {
      out.push_back(id.str() + ": not registered on " + v->owner.str());
    }
    const DReference* ref = state.find_as<DReference>(v->feature);
    for (const Scalar& s : v->values) {
      const ElementId* t = std::get_if<ElementId>(&s);
      if (!t) continue;
      const DObject* target = state.find_as<DObject>(*t);
      if (!target) {
        out.push_back(id.str() + ": dangling reference " + t->str());
      } else if (ref && ref->is_containment &&
                 (!target->container || target->container->parent != v->owner ||
                  target->container->reference != v->feature)) {
        out.push_back(id.str() + ": contained " + t->str() + " does not point back");
      }
    }
  } else if (const auto* o = std::get_if<DObject>(&e)) {
    const DModel* model = state.find_as<DModel>(o->model);
    if (!model) {
      out.push_back(id.str() + ": model " + o->model.str() + " missing");
      return;
    }
    if (!state.find_as<DClass>(o->instance_of)) out.push_back(id.str() + ": class missing");
    for (const auto& [feature, value] : o->features) {
      const DValue* dv = state.find_as<DValue>(value);
      if (!dv) {
        out.push_back(id.str() + ": value " + value.str() + " missing");
      } else if (dv->owner != id || dv->feature != feature) {
        out.push_back(id.str() + ": value " + value.str() + " belongs to " + dv->owner.str());
      }
      if (!state.find(feature)) out.push_back(id.str() + ": feature " + feature.str() + " missing");
    }
    const bool listed =
        std::find(model->root_objects.begin(), model->root_objects.end(), id) != model->root_objects.end();
    if (o->container) {
      const DValue* slot = value_of(state, o->container->parent,
                                    state.find(o->container->reference) ? feature_name(state, o->container->reference)
                                                                        : std::string_view{});
      bool found = slot && std::find(slot->values.begin(), slot->values.end(), Scalar{id}) != slot->values.end();
      if (!found) out.push_back(id.str() + ": container " + o->container->parent.str() + " does not hold it");
      if (listed) out.push_back(id.str() + ": contained object listed as root");
    } else if (!listed) {
      out.push_back(id.str() + ": root object not listed in " + o->model.str());
    }
    if (!state.find_node(id)) out.push_back(id.str() + ": no node");
  } else if (const auto* m = std::get_if<DModel>(&e)) {
    for (ElementId r : m->root_objects) {
      const DObject* o = state.find_as<DObject>(r);
      if (!o || o->model != id) out.push_back(id.str() + ": bad root " + r.str());
    }
  }
}

bool mentions(const Element& e, const std::set<ElementId>& ids) {
  if (const auto* v = std::get_if<DValue>(&e)) {
    if (ids.count(v->owner) || ids.count(v->feature)) return true;
    for (const Scalar& s : v->values) {
      if (const ElementId* t = std::get_if<ElementId>(&s); t && ids.count(*t)) return true;
    }
  } else if (const auto* o = std::get_if<DObject>(&e)) {
    if (ids.count(o->model) || ids.count(o->instance_of)) return true;
    if (o->container && (ids.count(o->container->parent) || ids.count(o->container->reference))) return true;
    for (const auto& [feature, value] : o->features) {
      if (ids.count(feature) || ids.count(value)) return true;
    }
  } else if (const auto* m = std::get_if<DModel>(&e)) {
    for (ElementId r : m->root_objects) {
      if (ids.count(r)) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<std::string> integrity_problems(const State& state) {
  std::vector<std::string> out;
  for (const auto& [id, e] : state.elements) element_problems(state, id, e, out);
  for (const auto& [id, n] : state.nodes) {
    if (!state.find(id)) out.push_back("node " + id.str() + ": element missing");
  }
  return out;
}

std::vector<std::string> integrity_problems(const State& state, const std::vector<Op>& ops) {
  std::set<ElementId> touched, removed;
  for (const Op& op : ops) {
    if (const auto* c = std::get_if<ElementChange>(&op.change)) {
      (state.find(c->id) ? touched : removed).insert(c->id);
    } else if (const auto* n = std::get_if<NodeChange>(&op.change); n && n->after) {
      touched.insert(n->id);
    }
  }
  std::vector<std::string> out;
  for (ElementId id : touched) {
    if (const Element* e = state.find(id)) element_problems(state, id, *e, out);
    if (state.find_node(id) && !state.find(id)) out.push_back("node " + id.str() + ": element missing");
  }
  if (!removed.empty()) {
    for (const auto& [id, e] : state.elements) {
      if (!touched.count(id) && mentions(e, removed)) element_problems(state, id, e, out);
    }
    for (ElementId id : removed) {
      if (state.find_node(id)) out.push_back("node " + id.str() + ": element missing");
    }
  }
  return out;
}

}  // namespace mwb
