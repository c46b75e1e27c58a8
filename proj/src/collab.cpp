#include "mwb/collab.hpp"

#include <fstream>
#include <sstream>

#include "mwb/serialize.hpp"

namespace mwb {

using nlohmann::json;

json record_to_json(const ProjectRecord& r) {
  return {{"projectId", r.id}, {"name", r.name}, {"owner", r.owner}, {"revision", r.revision}, {"settings", r.settings}};
}

ProjectRecord record_from_json(const json& j) {
  ProjectRecord r;
  r.id = j.at("projectId").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.owner = j.value("owner", "");
  r.revision = j.at("revision").get<std::uint64_t>();
  r.settings = j.value("settings", json::object());
  return r;
}

std::string WireMessage::to_text() const {
  return json{{"kind", kind}, {"room", room}, {"sequence", sequence}, {"payload", payload}}.dump();
}

WireMessage WireMessage::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Syntax, std::string("bad frame: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) fail(ErrorCode::Syntax, "frame without kind");
  WireMessage m;
  m.kind = j["kind"].get<std::string>();
  m.room = j.value("room", "");
  m.sequence = j.value("sequence", std::uint64_t{0});
  m.payload = j.value("payload", json::object());
  return m;
}

namespace {

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::NotFound, "no project file " + p.filename().string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, p);
}

json error_payload(const Error& e) { return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}; }

WireMessage reply(const std::string& kind, const std::string& room, std::uint64_t sequence, json payload) {
  return WireMessage{kind, room, sequence, std::move(payload)};
}

WireMessage failure(const std::string& room, const json& client_op, const Error& e) {
  return reply("ack", room, 0, {{"clientOp", client_op}, {"accepted", false}, {"error", error_payload(e)}});
}

}  // namespace

CollabService::CollabService(std::filesystem::path data_dir, std::string secret)
    : dir_(std::move(data_dir)), secret_(std::move(secret)) {
  std::filesystem::create_directories(dir_);
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".record.json";
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    const std::string id = name.substr(0, name.size() - suffix.size());
    if (id.rfind("p", 0) == 0) {
      try {
        next_project_ = std::max<std::uint64_t>(next_project_, std::stoull(id.substr(1)) + 1);
      } catch (const std::exception&) {
      }
    }
  }
}

void CollabService::authorize(const std::string& token) const {
  if (token != secret_) fail(ErrorCode::Unauthorized, "bad session token");
}

std::filesystem::path CollabService::document_path(const std::string& id) const { return dir_ / (id + ".mwb.json"); }

std::filesystem::path CollabService::record_path(const std::string& id) const {
  return dir_ / (id + ".record.json");
}

ProjectRecord CollabService::load_record(const std::string& id) const {
  if (id.empty() || id.find_first_of("/\\.") != std::string::npos || !std::filesystem::exists(record_path(id))) {
    fail(ErrorCode::NotFound, "no project '" + id + "'");
  }
  return record_from_json(json::parse(read_text(record_path(id))));
}

void CollabService::write_project(const ProjectRecord& r, const std::string& canonical) const {
  write_text(document_path(r.id), canonical);
  write_text(record_path(r.id), record_to_json(r).dump(2) + "\n");
}

ProjectRecord CollabService::create_project(const std::string& token, const std::string& name,
                                            const std::string& owner, const std::optional<json>& document) {
  authorize(token);
  Store store = document ? Store::from_document(*document) : Store();
  std::lock_guard lock(projects_mutex_);
  ProjectRecord r;
  r.id = "p" + std::to_string(next_project_++);
  r.name = name;
  r.owner = owner;
  write_project(r, store.canonical());
  return r;
}

std::pair<ProjectRecord, json> CollabService::get_project(const std::string& token, const std::string& id) {
  authorize(token);
  {
    std::lock_guard lock(projects_mutex_);
    auto it = rooms_.find(id);
    if (it != rooms_.end()) {
      Room& room = *it->second;
      std::lock_guard room_lock(room.mutex);
      ProjectRecord r = load_record(id);
      r.revision = room.base_revision + room.batches;
      return {r, room.workbench.store().document()};
    }
  }
  ProjectRecord r = load_record(id);
  return {r, json::parse(read_text(document_path(id)))};
}

std::vector<ProjectRecord> CollabService::list_projects(const std::string& token) {
  authorize(token);
  std::vector<ProjectRecord> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".record.json";
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      out.push_back(record_from_json(json::parse(read_text(entry.path()))));
    }
  }
  std::sort(out.begin(), out.end(), [](const ProjectRecord& a, const ProjectRecord& b) {
    return a.id.size() != b.id.size() ? a.id.size() < b.id.size() : a.id < b.id;
  });
  return out;
}

ProjectRecord CollabService::save_project(const std::string& token, const std::string& id,
                                          std::uint64_t base_revision, const json& document) {
  authorize(token);
  Store store = Store::from_document(document);
  std::lock_guard lock(projects_mutex_);
  ProjectRecord r = load_record(id);
  if (base_revision != r.revision) {
    fail(ErrorCode::Conflict, "stale revision " + std::to_string(base_revision) + ", current is " +
                                  std::to_string(r.revision));
  }
  auto it = rooms_.find(id);
  if (it != rooms_.end()) {
    std::lock_guard room_lock(it->second->mutex);
    if (!it->second->members.empty()) fail(ErrorCode::Conflict, "project '" + id + "' is open in a room");
    if (it->second->batches) fail(ErrorCode::Conflict, "stale revision " + std::to_string(base_revision));
    rooms_.erase(it);
  }
  ++r.revision;
  write_project(r, store.canonical());
  return r;
}

CollabService::Room& CollabService::open_room(const std::string& project) {
  auto it = rooms_.find(project);
  if (it != rooms_.end()) return *it->second;
  const ProjectRecord r = load_record(project);
  auto room = std::make_unique<Room>();
  room->project = project;
  room->base_revision = r.revision;
  room->workbench = Workbench(Store::from_document(json::parse(read_text(document_path(project)))));
  return *rooms_.emplace(project, std::move(room)).first->second;
}

std::string CollabService::canonical(const std::string& project) {
  std::lock_guard lock(projects_mutex_);
  Room& room = open_room(project);
  std::lock_guard room_lock(room.mutex);
  return room.workbench.store().canonical();
}

std::uint64_t CollabService::committed_batches(const std::string& project) {
  std::lock_guard lock(projects_mutex_);
  Room& room = open_room(project);
  std::lock_guard room_lock(room.mutex);
  return room.batches;
}

std::vector<Outgoing> CollabService::handle(const std::string& session, const WireMessage& m) {
  try {
    if (m.kind == "join") return join(session, m);
    if (m.kind == "op") return submit(session, m);
    if (m.kind == "leave") return leave(session, m.room);
    if (m.kind == "presence") return {};
    fail(ErrorCode::InvalidArgument, "unexpected frame kind '" + m.kind + "'");
  } catch (const Error& e) {
    return {{session, failure(m.room, m.payload.value("clientOp", json()), e)}};
  }
}

std::vector<Outgoing> CollabService::join(const std::string& session, const WireMessage& m) {
  authorize(m.payload.value("token", ""));
  const std::string project = m.payload.value("project", m.room);
  Room* room;
  {
    std::lock_guard lock(projects_mutex_);
    room = &open_room(project);
    session_rooms_[session].insert(project);
  }
  std::lock_guard room_lock(room->mutex);
  room->members.insert(session);
  const std::uint64_t first = std::max(room->next_block, (room->workbench.state().next_id / kIdBlockSize + 1) * kIdBlockSize);
  room->next_block = first + kIdBlockSize;
  json members = json::array();
  for (const std::string& s : room->members) members.push_back(s);
  std::vector<Outgoing> out;
  out.push_back({session, reply("joined", project, room->sequence,
                                {{"revision", room->base_revision + room->batches},
                                 {"snapshot", room->workbench.store().document()},
                                 {"members", members},
                                 {"idBlock", {{"first", first}, {"size", kIdBlockSize}}}})});
  for (const std::string& s : room->members) {
    if (s != session) {
      out.push_back({s, reply("presence", project, room->sequence,
                              {{"event", "join"}, {"session", session}, {"members", members}})});
    }
  }
  return out;
}

std::vector<Outgoing> CollabService::submit(const std::string& session, const WireMessage& m) {
  Room* room;
  {
    std::lock_guard lock(projects_mutex_);
    auto it = rooms_.find(m.room);
    if (it == rooms_.end()) fail(ErrorCode::NotFound, "no room '" + m.room + "'");
    room = it->second.get();
  }
  std::lock_guard room_lock(room->mutex);
  if (!room->members.count(session)) fail(ErrorCode::Unauthorized, "session is not a member of '" + m.room + "'");
  const json client_op = m.payload.value("clientOp", json());
  if (!client_op.is_object() || !client_op.contains("session") || !client_op.contains("counter")) {
    fail(ErrorCode::InvalidArgument, "op without clientOp");
  }
  const auto key = std::make_pair(client_op["session"].get<std::string>(), client_op["counter"].get<std::uint64_t>());
  auto seen = room->acks.find(key);
  if (seen != room->acks.end()) return {{session, reply("ack", m.room, seen->second.value("sequence", 0), seen->second)}};

  std::vector<Op> ops;
  for (const json& o : m.payload.value("ops", json::array())) ops.push_back(op_from_json(o));
  Store& store = room->workbench.store();
  const std::size_t before = store.log().size();
  std::optional<Error> failure_reason;
  try {
    room->workbench.apply_ops(session, ops);
  } catch (const Error& e) {
    failure_reason = e;
  }
  std::vector<Outgoing> out;
  if (store.log().size() == before) {
    if (failure_reason) {
      json ack{{"clientOp", client_op}, {"accepted", false}, {"sequence", 0}, {"error", error_payload(*failure_reason)}};
      room->acks.emplace(key, ack);
      // Resync first so the ack finds the client on the current state.
      out.push_back({session, reply("resync", m.room, room->sequence,
                                    {{"revision", room->base_revision + room->batches},
                                     {"snapshot", store.document()},
                                     {"reason", failure_reason->what()}})});
      out.push_back({session, reply("ack", m.room, 0, ack)});
      return out;
    }
    json ack{{"clientOp", client_op}, {"accepted", true}, {"sequence", 0}, {"sequences", json::array()},
             {"revision", room->base_revision + room->batches}};
    room->acks.emplace(key, ack);
    return {{session, reply("ack", m.room, 0, ack)}};
  }
  ++room->batches;
  const std::uint64_t revision = room->base_revision + room->batches;
  json sequences = json::array();
  std::vector<WireMessage> broadcasts;
  for (std::size_t i = before; i < store.log().size(); ++i) {
    const Transaction& tx = store.log()[i];
    ++room->sequence;
    sequences.push_back(room->sequence);
    broadcasts.push_back(reply("op", m.room, room->sequence,
                               {{"transaction", transaction_to_json(tx)},
                                {"clientOp", i == before ? client_op : json()},
                                {"revision", revision}}));
  }
  json ack{{"clientOp", client_op}, {"accepted", true}, {"sequence", sequences[0]}, {"sequences", sequences},
           {"revision", revision}};
  if (failure_reason) ack["warning"] = error_payload(*failure_reason);
  room->acks.emplace(key, ack);
  for (const WireMessage& b : broadcasts) {
    for (const std::string& s : room->members) out.push_back({s, b});
  }
  out.push_back({session, reply("ack", m.room, sequences[0], ack)});
  return out;
}

std::vector<Outgoing> CollabService::leave(const std::string& session, const std::string& project) {
  std::lock_guard lock(projects_mutex_);
  auto it = rooms_.find(project);
  if (it == rooms_.end()) return {};
  Room* room = it->second.get();
  session_rooms_[session].erase(project);
  std::lock_guard room_lock(room->mutex);
  if (!room->members.erase(session)) return {};
  json members = json::array();
  for (const std::string& s : room->members) members.push_back(s);
  std::vector<Outgoing> out;
  for (const std::string& s : room->members) {
    out.push_back({s, reply("presence", project, room->sequence,
                            {{"event", "leave"}, {"session", session}, {"members", members}})});
  }
  if (room->members.empty() && room->batches) {
    ProjectRecord r = load_record(project);
    r.revision = room->base_revision + room->batches;
    room->base_revision = r.revision;
    room->batches = 0;
    write_project(r, room->workbench.store().canonical());
  }
  return out;
}

std::vector<Outgoing> CollabService::disconnect(const std::string& session) {
  std::set<std::string> joined;
  {
    std::lock_guard lock(projects_mutex_);
    auto it = session_rooms_.find(session);
    if (it == session_rooms_.end()) return {};
    joined = it->second;
    session_rooms_.erase(it);
  }
  std::vector<Outgoing> out;
  for (const std::string& project : joined) {
    auto part = leave(session, project);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

ClientReplica::ClientReplica(std::string session, std::string project, std::string token)
    : session_(std::move(session)), project_(std::move(project)), token_(std::move(token)) {}

WireMessage ClientReplica::join() const {
  return WireMessage{"join", project_, 0, {{"token", token_}, {"project", project_}}};
}

WireMessage ClientReplica::submit(const std::function<void(Draft&)>& body) {
  if (next_id_) {
    while (store_.state().find(ElementId{*next_id_}) || store_.state().viewpoints.count(ElementId{*next_id_})) ++*next_id_;
    if (*next_id_ >= block_end_) fail(ErrorCode::OutOfRange, "id block exhausted; rejoin for a new one");
  }
  std::vector<Op> ops = store_.prepare(body, next_id_);
  if (next_id_) {
    // Ids of our block at or past the cursor were allocated by this edit.
    auto claim = [&](ElementId id) {
      if (id.value >= *next_id_ && id.value < block_end_) next_id_ = id.value + 1;
    };
    for (const Op& op : ops) {
      if (const auto* c = std::get_if<ElementChange>(&op.change)) {
        claim(c->id);
      } else if (const auto* v = std::get_if<ViewpointChange>(&op.change); v && v->after) {
        claim(v->id);
        for (const View& view : v->after->views) claim(view.id);
        for (const Rule& r : v->after->rules) claim(r.id);
        for (const ValidationRule& r : v->after->validation_rules) claim(r.id);
      }
    }
  }
  json list = json::array();
  for (const Op& op : ops) list.push_back(op_to_json(op));
  pending_ = ++counter_;
  return WireMessage{"op", project_, 0,
                     {{"clientOp", {{"session", session_}, {"counter", counter_}}},
                      {"baseRevision", revision_},
                      {"ops", list}}};
}

std::optional<WireMessage> ClientReplica::receive(const WireMessage& m) {
  if (m.kind == "joined" || m.kind == "resync") {
    store_ = Store::from_document(m.payload.at("snapshot"));
    sequence_ = m.sequence;
    revision_ = m.payload.value("revision", revision_);
    joined_ = true;
    if (m.payload.contains("idBlock")) {
      next_id_ = m.payload["idBlock"].value("first", std::uint64_t{0});
      block_end_ = *next_id_ + m.payload["idBlock"].value("size", std::uint64_t{0});
    }
    return std::nullopt;
  }
  if (m.kind == "op") {
    if (!joined_ || m.sequence <= sequence_) return std::nullopt;
    if (m.sequence != sequence_ + 1) {
      joined_ = false;
      return join();
    }
    store_.apply_committed(transaction_from_json(m.payload.at("transaction")));
    sequence_ = m.sequence;
    revision_ = m.payload.value("revision", revision_);
    return std::nullopt;
  }
  if (m.kind == "ack") {
    const json& op = m.payload.value("clientOp", json());
    if (op.is_object() && op.value("session", "") == session_) {
      const std::uint64_t counter = op.value("counter", std::uint64_t{0});
      if (counter == pending_) pending_ = 0;
      acks_.emplace(counter, m.payload);
      (m.payload.value("accepted", false) ? accepted_ : rejected_)++;
    }
  }
  return std::nullopt;
}

}  // namespace mwb
