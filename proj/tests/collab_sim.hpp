#pragma once

#include <deque>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "edit_script.hpp"
#include "mwb/collab.hpp"
#include "mwb/fixtures.hpp"

namespace mwb::test {

struct SimReport {
  bool converged = false;        // both replicas serialize like the server
  bool replay_matches = false;   // server log replayed from empty gives the server state
  bool at_most_once = false;     // retransmissions acked with their first outcome, never re-applied
  std::size_t submitted = 0;
  std::size_t retransmitted = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::uint64_t batches = 0;
  std::string detail;
};

// Two clients editing one ERD project through an in-process service. Frames
// travel through per-endpoint FIFO queues; a scheduler interleaves sends,
// server steps and deliveries at random. A share of op frames is sent twice.
inline SimReport run_collab_sim(std::uint64_t seed, int edits_per_client, double retransmit_rate,
                                const std::filesystem::path& dir) {
  std::filesystem::remove_all(dir);
  const std::string secret = "sim-secret";
  CollabService service(dir, secret);
  Workbench seed_wb;
  auto f = fixtures::load_erd(seed_wb);
  const std::string project = service.create_project(secret, "erd", "sim", seed_wb.store().document()).id;

  std::mt19937_64 gen(seed);
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(gen) < p; };

  struct Peer {
    ClientReplica replica;
    EditGenerator edits;
    std::deque<WireMessage> inbox;
    int sent = 0;
  };
  std::vector<Peer> peers;
  peers.push_back({ClientReplica("alice", project, secret), EditGenerator(f.model, seed * 2 + 1), {}, 0});
  peers.push_back({ClientReplica("bob", project, secret), EditGenerator(f.model, seed * 2 + 2), {}, 0});
  std::deque<std::pair<std::size_t, WireMessage>> to_server;
  std::vector<std::pair<std::size_t, WireMessage>> resend;
  SimReport report;

  for (std::size_t i = 0; i < peers.size(); ++i) to_server.push_back({i, peers[i].replica.join()});

  auto server_step = [&] {
    auto [from, m] = to_server.front();
    to_server.pop_front();
    for (const Outgoing& o : service.handle(peers[from].replica.session(), m)) {
      for (Peer& p : peers) {
        if (p.replica.session() == o.session) p.inbox.push_back(o.message);
      }
    }
  };
  auto deliver = [&](std::size_t i) {
    WireMessage m = peers[i].inbox.front();
    peers[i].inbox.pop_front();
    if (auto again = peers[i].replica.receive(m)) to_server.push_back({i, *again});
  };
  auto send_edit = [&](std::size_t i) {
    Peer& p = peers[i];
    for (int attempt = 0; attempt < 20; ++attempt) {
      WireMessage m;
      try {
        m = p.replica.submit(p.edits.next(p.replica.store().state()));
      } catch (const Error&) {
        continue;
      }
      if (m.payload["ops"].empty()) continue;
      to_server.push_back({i, m});
      ++p.sent;
      ++report.submitted;
      if (chance(retransmit_rate)) resend.push_back({i, m});
      return;
    }
    ++p.sent;
  };

  while (true) {
    std::vector<int> moves;
    for (std::size_t i = 0; i < peers.size(); ++i) {
      if (peers[i].replica.joined() && !peers[i].replica.pending() && peers[i].sent < edits_per_client) moves.push_back(static_cast<int>(i));
      if (!peers[i].inbox.empty()) moves.push_back(10 + static_cast<int>(i));
    }
    if (!to_server.empty()) moves.push_back(20);
    if (!resend.empty()) moves.push_back(30);
    if (moves.empty()) break;
    const int move = moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(gen)];
    if (move < 10) {
      send_edit(move);
    } else if (move < 20) {
      deliver(move - 10);
    } else if (move == 20) {
      server_step();
    } else {
      auto it = resend.begin() + std::uniform_int_distribution<std::size_t>(0, resend.size() - 1)(gen);
      to_server.push_back(*it);
      resend.erase(it);
      ++report.retransmitted;
    }
  }

  const std::string server = service.canonical(project);
  report.converged = true;
  for (Peer& p : peers) {
    if (p.replica.store().canonical() != server) {
      report.converged = false;
      report.detail += p.replica.session() + " differs from the server; ";
    }
  }
  Store server_store = Store::from_document(nlohmann::json::parse(server));
  for (const std::string& problem : integrity_problems(server_store.state())) {
    report.converged = false;
    report.detail += "server state: " + problem + "; ";
  }
  std::vector<Transaction> log = server_store.log();
  report.replay_matches = Store::replay(log).canonical() == server;

  report.batches = service.committed_batches(project);
  std::uint64_t accepted_batches = 0;
  report.at_most_once = true;
  for (Peer& p : peers) {
    std::set<std::uint64_t> counters;
    for (const auto& [counter, ack] : p.replica.acks()) {
      if (!counters.insert(counter).second) continue;
      auto range = p.replica.acks().equal_range(counter);
      for (auto it = range.first; it != range.second; ++it) {
        if (it->second != ack) {
          report.at_most_once = false;
          report.detail += "different acks for one op; ";
        }
      }
      if (ack.value("accepted", false)) {
        ++report.accepted;
        if (!ack["sequences"].empty()) ++accepted_batches;
      } else {
        ++report.rejected;
      }
    }
  }
  if (accepted_batches != report.batches) {
    report.at_most_once = false;
    std::ostringstream os;
    os << "server committed " << report.batches << " batches for " << accepted_batches << " accepted ops; ";
    report.detail += os.str();
  }
  std::filesystem::remove_all(dir);
  return report;
}

}  // namespace mwb::test
