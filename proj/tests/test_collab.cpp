#include <filesystem>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "collab_sim.hpp"
#include "doctest.h"
#include "httplib.h"
#include "mwb/serialize.hpp"
#include "mwb/server.hpp"
#include "support.hpp"

using namespace mwb;
using nlohmann::json;

namespace {

const std::string kSecret = "s3cret";

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mwb-collab-" + name);
  std::filesystem::remove_all(p);
  return p;
}

json erd_document() {
  Workbench wb;
  fixtures::load_erd(wb);
  return wb.store().document();
}

// Runs one frame through the service and files the replies by session.
std::map<std::string, std::vector<WireMessage>> step(CollabService& s, const std::string& session,
                                                     const WireMessage& m) {
  std::map<std::string, std::vector<WireMessage>> out;
  for (const Outgoing& o : s.handle(session, m)) out[o.session].push_back(o.message);
  return out;
}

const WireMessage* first_of(const std::vector<WireMessage>& ms, const std::string& kind) {
  for (const WireMessage& m : ms) {
    if (m.kind == kind) return &m;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("project repository") {
  auto dir = scratch("repo");
  CollabService s(dir, kSecret);
  json doc = erd_document();
  ProjectRecord a = s.create_project(kSecret, "erd", "ann", doc);
  s.create_project(kSecret, "empty", "ann");
  CHECK(s.list_projects(kSecret).size() == 2);
  auto [rec, got] = s.get_project(kSecret, a.id);
  CHECK(canonical_text(got) == canonical_text(doc));
  CHECK(rec.revision == 0);
  ProjectRecord saved = s.save_project(kSecret, a.id, 0, doc);
  CHECK(saved.revision == 1);
  try {
    s.save_project(kSecret, a.id, 0, doc);
    FAIL("stale save accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Conflict);
  }
  CHECK_THROWS_AS(s.get_project(kSecret, "p99"), Error);
  CHECK_THROWS_AS(s.get_project(kSecret, "../etc"), Error);
  CHECK_THROWS_AS(s.list_projects("wrong"), Error);
  // A new service over the same directory sees the same projects.
  CollabService again(dir, kSecret);
  CHECK(again.list_projects(kSecret).size() == 2);
  CHECK(again.create_project(kSecret, "third", "ann").id == "p3");
  std::filesystem::remove_all(dir);
}

TEST_CASE("rooms") {
  auto dir = scratch("rooms");
  CollabService s(dir, kSecret);
  Workbench local;
  auto f = fixtures::load_erd(local);
  const std::string pid = s.create_project(kSecret, "erd", "ann", local.store().document()).id;
  ClientReplica a("a", pid, kSecret), b("b", pid, kSecret);
  auto ja = step(s, "a", a.join());
  auto jb = step(s, "b", b.join());
  REQUIRE(first_of(ja["a"], "joined"));
  REQUIRE(first_of(jb["b"], "joined"));
  CHECK(first_of(jb["a"], "presence"));
  CHECK(first_of(ja["a"], "joined")->payload["revision"] == first_of(jb["b"], "joined")->payload["revision"]);
  a.receive(*first_of(ja["a"], "joined"));
  b.receive(*first_of(jb["b"], "joined"));

  SUBCASE("edits to different objects are both accepted in arrival order") {
    WireMessage ma = a.submit([&](Draft& d) { set_feature(d, f.user, "name", {Scalar("Person")}); });
    WireMessage mb = b.submit([&](Draft& d) { set_position(d, f.role, 900, 300); });
    auto ra = step(s, "a", ma);
    auto rb = step(s, "b", mb);
    const WireMessage* acka = first_of(ra["a"], "ack");
    const WireMessage* ackb = first_of(rb["b"], "ack");
    REQUIRE(acka);
    REQUIRE(ackb);
    CHECK(acka->payload["accepted"] == true);
    CHECK(ackb->payload["accepted"] == true);
    CHECK(acka->sequence < ackb->sequence);
    for (auto* r : {&ra, &rb}) {
      for (const WireMessage& m : (*r)["a"]) a.receive(m);
      for (const WireMessage& m : (*r)["b"]) b.receive(m);
    }
    CHECK(a.store().canonical() == s.canonical(pid));
    CHECK(b.store().canonical() == s.canonical(pid));
  }
  SUBCASE("an edit of a concurrently deleted object is rejected with a resync") {
    WireMessage del = a.submit([&](Draft& d) { delete_element(d, f.role_attributes[2]); });
    WireMessage edit = b.submit([&](Draft& d) { set_feature(d, f.role_attributes[2], "name", {Scalar("notes")}); });
    step(s, "a", del);
    auto rb = step(s, "b", edit);
    const WireMessage* ack = first_of(rb["b"], "ack");
    REQUIRE(ack);
    CHECK(ack->payload["accepted"] == false);
    const WireMessage* resync = first_of(rb["b"], "resync");
    REQUIRE(resync);
    b.receive(*resync);
    CHECK(b.store().canonical() == s.canonical(pid));
  }
  SUBCASE("concurrent creations draw ids from disjoint blocks") {
    ElementId ca, cb;
    WireMessage ma = a.submit([&](Draft& d) { ca = add_object(d, f.model, "Entity", {{"name", "A"}}); });
    WireMessage mb = b.submit([&](Draft& d) { cb = add_object(d, f.model, "Entity", {{"name", "B"}}); });
    CHECK(a.pending());
    CHECK(ca != cb);
    CHECK(ca.value / kIdBlockSize != cb.value / kIdBlockSize);
    auto ra = step(s, "a", ma);
    auto rb = step(s, "b", mb);
    CHECK(first_of(ra["a"], "ack")->payload["accepted"] == true);
    CHECK(first_of(rb["b"], "ack")->payload["accepted"] == true);
    for (const WireMessage& m : ra["a"]) a.receive(m);
    CHECK_FALSE(a.pending());
    for (const WireMessage& m : rb["a"]) a.receive(m);
    CHECK(a.store().canonical() == s.canonical(pid));
    WireMessage again = a.submit([&](Draft& d) { add_object(d, f.model, "Entity", {{"name", "C"}}); });
    CHECK(first_of(step(s, "a", again)["a"], "ack")->payload["accepted"] == true);
  }
  SUBCASE("a stale move merges with a concurrent marker update on the same node") {
    WireMessage move = a.submit([&](Draft& d) { set_position(d, f.role, 900, 300); });
    WireMessage key = b.submit([&](Draft& d) { set_feature(d, f.role_attributes[0], "isPK", {Scalar(true)}); });
    auto rb = step(s, "b", key);
    REQUIRE(first_of(rb["b"], "ack")->payload["sequences"].size() == 2);
    auto ra = step(s, "a", move);
    CHECK(first_of(ra["a"], "ack")->payload["accepted"] == true);
    Store server = Store::from_document(json::parse(s.canonical(pid)));
    CHECK(server.state().find_node(f.role)->x == 900);
    CHECK(stored_markers(server.state(), f.model).empty());
  }
  SUBCASE("an object built against a concurrently removed feature is rejected") {
    WireMessage remove = a.submit([&](Draft& d) { co_evolve(d, meta_edit::RemoveFeature{f.type}); });
    WireMessage create =
        b.submit([&](Draft& d) { add_object(d, f.model, "Attribute", {{"name", "x"}, {"type", "Integer"}}); });
    CHECK(first_of(step(s, "a", remove)["a"], "ack")->payload["accepted"] == true);
    auto rb = step(s, "b", create);
    const WireMessage* ack = first_of(rb["b"], "ack");
    REQUIRE(ack);
    CHECK(ack->payload["accepted"] == false);
    CHECK(ack->payload["error"]["message"].get<std::string>().find("concurrent change") != std::string::npos);
    Store server = Store::from_document(json::parse(s.canonical(pid)));
    CHECK(integrity_problems(server.state()).empty());
  }
  SUBCASE("a retransmitted op is acknowledged with its first sequence") {
    WireMessage m = a.submit([&](Draft& d) { set_position(d, f.user, 30, 30); });
    auto first = step(s, "a", m);
    auto second = step(s, "a", m);
    REQUIRE(second["a"].size() == 1);
    CHECK(second["a"][0].kind == "ack");
    CHECK(second["a"][0].sequence == first_of(first["a"], "ack")->sequence);
    CHECK(second["b"].empty());
    CHECK(s.committed_batches(pid) == 1);
  }
  SUBCASE("ops need membership and joins need a known project") {
    auto r = step(s, "c", a.submit([&](Draft& d) { set_position(d, f.user, 1, 1); }));
    REQUIRE(first_of(r["c"], "ack"));
    CHECK(first_of(r["c"], "ack")->payload["accepted"] == false);
    ClientReplica lost("d", "p404", kSecret);
    auto j = step(s, "d", lost.join());
    CHECK(first_of(j["d"], "ack")->payload["accepted"] == false);
    ClientReplica intruder("e", pid, "guess");
    auto k = step(s, "e", intruder.join());
    CHECK(first_of(k["e"], "ack")->payload["error"]["code"] == "unauthorized");
  }
  SUBCASE("server rules run on committed ops") {
    WireMessage m =
        a.submit([&](Draft& d) { set_feature(d, f.role_attributes[0], "isPK", {Scalar(true)}); });
    auto r = step(s, "a", m);
    const WireMessage* ack = first_of(r["a"], "ack");
    REQUIRE(ack);
    CHECK(ack->payload["sequences"].size() == 2);  // the edit and the marker update
    for (const WireMessage& x : r["b"]) b.receive(x);
    CHECK(stored_markers(b.store().state(), f.model).empty());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("two clients converge under interleaving and retransmission") {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto r = test::run_collab_sim(seed, 60, 0.1, scratch("sim" + std::to_string(seed)));
    INFO(r.detail);
    CHECK(r.converged);
    CHECK(r.replay_matches);
    CHECK(r.at_most_once);
    CHECK(r.accepted > 0);
    CHECK(r.retransmitted > 0);
  }
}

TEST_CASE("network front ends") {
  namespace beast = boost::beast;
  namespace asio = boost::asio;
  auto dir = scratch("net");
  CollabService service(dir, kSecret);
  CollabServer server(service, 0, 0);
  server.start();

  httplib::Client http("127.0.0.1", server.http_port());
  httplib::Headers auth{{"Authorization", "Bearer " + kSecret}};
  auto created = http.Post("/projects", auth, json{{"name", "erd"}, {"owner", "ann"}, {"document", erd_document()}}.dump(),
                           "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string pid = json::parse(created->body)["projectId"];
  auto listed = http.Get("/projects", auth);
  REQUIRE(listed);
  CHECK(json::parse(listed->body).size() == 1);
  CHECK(http.Get("/projects")->status == 401);
  CHECK(http.Get("/projects/p77", auth)->status == 404);
  auto got = http.Get("/projects/" + pid, auth);
  REQUIRE(got);
  json doc = json::parse(got->body)["document"];
  httplib::Headers stale = auth;
  stale.emplace("X-Base-Revision", "5");
  CHECK(http.Put("/projects/" + pid, stale, doc.dump(), "application/json")->status == 409);
  httplib::Headers fresh = auth;
  fresh.emplace("X-Base-Revision", "0");
  auto put = http.Put("/projects/" + pid, fresh, doc.dump(), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(json::parse(put->body)["revision"] == 1);

  asio::io_context io;
  asio::ip::tcp::resolver resolver(io);
  beast::websocket::stream<asio::ip::tcp::socket> ws(io);
  asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.ws_port())));
  ws.handshake("127.0.0.1", "/");
  ClientReplica client("net", pid, kSecret);
  auto exchange = [&](const WireMessage& m) {
    ws.write(asio::buffer(m.to_text()));
    beast::flat_buffer buf;
    ws.read(buf);
    return WireMessage::parse(beast::buffers_to_string(buf.data()));
  };
  WireMessage joined = exchange(client.join());
  CHECK(joined.kind == "joined");
  client.receive(joined);
  Workbench probe;
  auto f = fixtures::load_erd(probe);
  ws.write(asio::buffer(client.submit([&](Draft& d) { set_position(d, f.user, 45, 60); }).to_text()));
  for (int i = 0; i < 2; ++i) {
    beast::flat_buffer buf;
    ws.read(buf);
    client.receive(WireMessage::parse(beast::buffers_to_string(buf.data())));
  }
  CHECK(client.accepted() == 1);
  CHECK(client.store().canonical() == service.canonical(pid));
  ws.close(beast::websocket::close_code::normal);
  server.stop();
  std::filesystem::remove_all(dir);
}
