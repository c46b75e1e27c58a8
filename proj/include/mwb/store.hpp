#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwb/ops.hpp"

namespace mwb {

// An open transaction. Mutations are applied to the live state immediately
// and recorded; if the transaction body throws, the recorded ops are undone
// in reverse order and the id counter is restored.
class Draft {
 public:
  explicit Draft(State& state);

  const State& state() const { return state_; }
  const std::vector<Op>& ops() const { return ops_; }

  ElementId fresh_id() { return ElementId{state_.next_id++}; }

  void put(Element e);
  void erase(ElementId id);
  void put_node(NodeInfo n);
  void erase_node(ElementId id);
  void put_viewpoint(Viewpoint vp);
  void erase_viewpoint(ElementId id);

  // Applies an externally computed op; throws Rejected when its before image
  // no longer matches.
  void apply_checked(const Op& op);

  void rollback();
  std::vector<Op> release();

 private:
  void record(Op op);

  State& state_;
  std::uint64_t start_next_id_;
  std::vector<Op> ops_;
};

struct CommitResult {
  TxId id = 0;
  bool empty = true;
  // Elements whose data changed (owners of changed values, created objects)
  // or whose node geometry changed, first-appearance order.
  std::vector<ElementId> affected;
  std::vector<ElementId> removed;
};

// Per-object consequences of an op list; used both for commits and replicas.
CommitResult summarize(const State& after, const std::vector<Op>& ops);

class Store {
 public:
  Store() = default;
  explicit Store(State initial, std::vector<Transaction> log = {});

  // Writer-side view; only valid on the thread that owns the mutation queue.
  const State& state() const { return state_; }
  const std::vector<Transaction>& log() const { return log_; }

  // Immutable copy safe to hand to other threads. Taken by the writer.
  std::shared_ptr<const State> snapshot() const;

  CommitResult transact(const std::string& author, const std::function<void(Draft&)>& body,
                        bool undoable = true);

  // Runs `body` and returns the ops it would commit, leaving the store
  // unchanged. New ids start at `first_id` when given.
  std::vector<Op> prepare(const std::function<void(Draft&)>& body, std::optional<std::uint64_t> first_id = std::nullopt);

  // Compare-and-swap commit of foreign ops: all or nothing.
  CommitResult commit_ops(const std::string& author, const std::vector<Op>& ops, bool undoable = true);

  // Applies an already-ordered transaction (replica side), keeping its id and
  // author.
  CommitResult apply_committed(const Transaction& tx);

  CommitResult undo();
  CommitResult redo();
  bool can_undo() const { return !undo_stack_.empty(); }
  bool can_redo() const { return !redo_stack_.empty(); }

  // Gesture grouping: every undo entry pushed after `undo_depth()` returned
  // `depth` is merged into one, so a multi-step gesture undoes at once.
  std::size_t undo_depth() const { return undo_stack_.size(); }
  void group_undo_since(std::size_t depth);

  TxId last_tx() const { return log_.empty() ? 0 : log_.back().id; }

  static Store replay(const std::vector<Transaction>& log);

  nlohmann::json document() const;
  std::string canonical() const;
  void save(const std::filesystem::path& file) const;
  static Store load(const std::filesystem::path& file);
  static Store from_document(const nlohmann::json& doc);

 private:
  CommitResult commit(const std::string& author, std::vector<Op> ops, TxId id);
  const Transaction& find_tx(TxId id) const;
  CommitResult replay_ops(const std::string& author, const std::vector<Op>& ops);

  State state_;
  std::vector<Transaction> log_;
  std::vector<std::vector<TxId>> undo_stack_;
  std::vector<std::vector<TxId>> redo_stack_;
  mutable std::shared_ptr<const State> snapshot_;
};

// Structural consistency of the tri-submodel store: every reference resolves,
// containment links agree in both directions, values belong to their owners.
// Returns one line per problem.
std::vector<std::string> integrity_problems(const State& state);
// Same checks limited to what `ops` (already applied) touched or removed.
std::vector<std::string> integrity_problems(const State& state, const std::vector<Op>& ops);

}  // namespace mwb
