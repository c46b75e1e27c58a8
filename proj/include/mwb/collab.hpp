#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwb/workbench.hpp"

namespace mwb {

struct ProjectRecord {
  std::string id;
  std::string name;
  std::string owner;
  std::uint64_t revision = 0;
  nlohmann::json settings = nlohmann::json::object();  // stored, not interpreted
};

nlohmann::json record_to_json(const ProjectRecord& r);
ProjectRecord record_from_json(const nlohmann::json& j);

// One frame of the socket protocol. Kinds: join, joined, op, ack, resync,
// presence, leave.
struct WireMessage {
  std::string kind;
  std::string room;
  std::uint64_t sequence = 0;
  nlohmann::json payload = nlohmann::json::object();

  std::string to_text() const;
  static WireMessage parse(const std::string& text);
  bool operator==(const WireMessage&) const = default;
};

struct Outgoing {
  std::string session;
  WireMessage message;
};

// Project repository plus collaborative rooms. Transport independent: the
// HTTP and socket front ends call into it, and so do tests.
class CollabService {
 public:
  CollabService(std::filesystem::path data_dir, std::string secret);

  void authorize(const std::string& token) const;

  ProjectRecord create_project(const std::string& token, const std::string& name, const std::string& owner,
                               const std::optional<nlohmann::json>& document = std::nullopt);
  std::pair<ProjectRecord, nlohmann::json> get_project(const std::string& token, const std::string& id);
  std::vector<ProjectRecord> list_projects(const std::string& token);
  // Replaces the document when `base_revision` is current; Conflict otherwise.
  ProjectRecord save_project(const std::string& token, const std::string& id, std::uint64_t base_revision,
                             const nlohmann::json& document);

  // Socket side. Replies and broadcasts produced by one inbound frame, in
  // send order. A session must authenticate in its join payload.
  std::vector<Outgoing> handle(const std::string& session, const WireMessage& message);
  std::vector<Outgoing> disconnect(const std::string& session);

  // Authoritative store of a room (opened on demand). Test hook.
  std::string canonical(const std::string& project);
  std::uint64_t committed_batches(const std::string& project);

 private:
  struct Room {
    std::mutex mutex;
    std::string project;
    Workbench workbench;
    std::set<std::string> members;
    std::uint64_t sequence = 0;                 // last assigned
    std::map<std::pair<std::string, std::uint64_t>, nlohmann::json> acks;  // client op id -> ack payload
    std::uint64_t base_revision = 0;  // revision on disk when the room opened or last flushed
    std::uint64_t batches = 0;        // committed since then
    std::uint64_t next_block = 0;     // first id of the next block handed to a joining session
  };

  std::filesystem::path document_path(const std::string& id) const;
  std::filesystem::path record_path(const std::string& id) const;
  ProjectRecord load_record(const std::string& id) const;
  void write_project(const ProjectRecord& r, const std::string& canonical) const;
  Room& open_room(const std::string& project);
  std::vector<Outgoing> join(const std::string& session, const WireMessage& m);
  std::vector<Outgoing> submit(const std::string& session, const WireMessage& m);
  std::vector<Outgoing> leave(const std::string& session, const std::string& room);

  std::filesystem::path dir_;
  std::string secret_;
  std::mutex projects_mutex_;
  std::uint64_t next_project_ = 1;
  std::map<std::string, std::unique_ptr<Room>> rooms_;
  std::map<std::string, std::set<std::string>> session_rooms_;
};

// Ids a session may create: each join hands out a disjoint block, so
// concurrent creations by different members never collide.
inline constexpr std::uint64_t kIdBlockSize = std::uint64_t{1} << 32;

// Client side of a room: a replica store kept in the server's order.
class ClientReplica {
 public:
  ClientReplica(std::string session, std::string project, std::string token);

  const std::string& session() const { return session_; }
  const Store& store() const { return store_; }
  bool joined() const { return joined_; }
  std::uint64_t sequence() const { return sequence_; }
  // An op was submitted and its ack has not arrived. Clients prepare the
  // next edit only after that, against a state that includes the outcome.
  bool pending() const { return pending_ != 0; }

  WireMessage join() const;
  // Op frame for an edit prepared against the replica; not applied locally.
  WireMessage submit(const std::function<void(Draft&)>& body);
  // Applies one inbound frame. Returns a join frame when the replica has to
  // start over (sequence gap).
  std::optional<WireMessage> receive(const WireMessage& message);

  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t rejected() const { return rejected_; }
  // Ack payloads by client op counter, as received (retransmissions included).
  const std::multimap<std::uint64_t, nlohmann::json>& acks() const { return acks_; }

 private:
  std::string session_;
  std::string project_;
  std::string token_;
  Store store_;
  bool joined_ = false;
  std::uint64_t sequence_ = 0;
  std::uint64_t revision_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t pending_ = 0;  // counter of the unacknowledged op
  std::optional<std::uint64_t> next_id_;  // inside the block from the last join
  std::uint64_t block_end_ = 0;
  std::uint64_t accepted_ = 0;
  std::uint64_t rejected_ = 0;
  std::multimap<std::uint64_t, nlohmann::json> acks_;
};

}  // namespace mwb
