// One line per acceptance criterion; exit status 1 when any fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "collab_sim.hpp"
#include "edit_script.hpp"
#include "mwb/console.hpp"
#include "support.hpp"

using namespace mwb;
using mwb::test::val_of;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict check(bool ok, std::string detail) { return {ok, std::move(detail)}; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Tree value computed from the stored operands, left-to-right by x for the
// positional operators.
double tree_oracle(const State& st, ElementId id) {
  const DObject& o = st.get_as<DObject>(id);
  const std::string cls = st.get_as<DClass>(o.instance_of).name;
  if (cls == "Number") return val_of(st, id);
  ElementId l = std::get<ElementId>(value_of(st, id, "left")->values.at(0));
  ElementId r = std::get<ElementId>(value_of(st, id, "right")->values.at(0));
  double a = tree_oracle(st, l), b = tree_oracle(st, r);
  if (cls == "Add") return a + b;
  if (cls == "Mult") return a * b;
  if (st.find_node(r)->x < st.find_node(l)->x) std::swap(a, b);
  return cls == "Sub" ? a - b : a / b;
}

Verdict console_oracle() {
  std::ostringstream out, err;
  Console c(out, err);
  const char* lines[] = {"fixtures load erd", "select User",
                         "eval data.$ownedAttributes.values.map(attr => attr.name)",
                         "eval `${node.x} * ${node.y} = ${node.x * node.y}`", "eval view.applyTo"};
  for (const char* l : lines) {
    if (c.execute(l) != kOk) return check(false, "command failed: " + err.str());
  }
  const std::string expected =
      "loaded fixture erd, selected /ERDModel/Entity:User\n"
      "selected /ERDModel/Entity:User\n"
      "[ 'id', 'surname', 'firstname' ]\n"
      "495 * 120 = 59400\n"
      "context DObject inv: self.instanceof.name = 'Entity'\n";
  const NodeInfo& n = *c.workbench().state().find_node(*c.selected());
  return check(out.str() == expected && n.x == 495 && n.y == 120, "output match " + std::to_string(out.str() == expected));
}

Verdict expression_semantics() {
  Workbench a, b;
  auto fa = fixtures::load_expr(a, fixtures::Layout::LeftmostThousand);
  auto fb = fixtures::load_expr(b, fixtures::Layout::Mirrored);
  const double va = val_of(a.state(), fa.e[4]), vb = val_of(b.state(), fb.e[4]);
  std::ostringstream d;
  d << "leftmost " << va << ", mirrored " << vb;
  return check(va == 684 && vb == -684, d.str());
}

Verdict cascade_workflow() {
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  wb.set_tracing(true);
  Outcome o = wb.set_feature(f.e[0], "val", {Scalar(112.0)});
  bool ordered = o.cascade.fired.size() == 3 && o.cascade.transactions.size() == 3;
  const ElementId order[] = {f.e[1], f.e[3], f.e[4]};
  for (std::size_t i = 0; ordered && i < 3; ++i) {
    ordered = o.cascade.fired[i].subject == order[i] && o.cascade.fired[i].depth == static_cast<int>(i);
  }
  const double root = val_of(wb.state(), f.e[4]);
  std::string trace;
  for (const std::string& line : wb.trace()) trace += line + "\n";
  const bool golden = trace == read_file(std::string(MWB_GOLDEN_DIR) + "/cascade_trace.txt");
  std::ostringstream d;
  d << o.cascade.transactions.size() << " transactions, root " << root << ", oracle "
    << tree_oracle(wb.state(), f.e[4]) << ", golden " << (golden ? "match" : "differs");
  return check(ordered && root == 784 && root == tree_oracle(wb.state(), f.e[4]) && golden, d.str());
}

Verdict grid_snapping() {
  auto gen = test::rng(2024);
  std::uniform_real_distribution<double> coord(-2000.0, 4000.0);
  int bad = 0;
  for (bool grid : {true, false}) {
    Workbench wb;
    auto f = fixtures::load_erd(wb);
    wb.set_control_parameter(f.model, f.syntax, "grid", grid);
    for (int i = 0; i < 1000; ++i) {
      const double x = coord(gen), y = coord(gen);
      wb.simulate_drag(f.user, {{x, y}});
      const NodeInfo& n = *wb.state().find_node(f.user);
      const bool ok = grid ? std::fmod(n.x, 15.0) == 0 && std::fmod(n.y, 15.0) == 0 && std::abs(n.x - x) <= 7.5 &&
                                 std::abs(n.y - y) <= 7.5
                           : n.x == x && n.y == y;
      bad += !ok;
    }
  }
  return check(bad == 0, "2 x 1000 drops, " + std::to_string(bad) + " violations");
}

Verdict semantic_zoom() {
  auto predicted = [](int level) {
    std::vector<std::string> out;
    if (level == 0) out.push_back("overview");
    if (level == 1) out.push_back("mid-detail");
    if (level >= 2) out.push_back("full-detail");
    return out;
  };
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  RenderTree initial = render(wb.state(), f.model, f.syntax);
  bool ok = initial.level == 3 && guarded_sections(initial) == predicted(3);
  for (int level = 0; level <= 3; ++level) {
    wb.set_control_parameter(f.model, f.syntax, "level", Value(level));
    RenderTree t = render(wb.state(), f.model, f.syntax);
    ok = ok && t.level == level && guarded_sections(t) == predicted(level);
  }
  return check(ok, "default level " + std::to_string(initial.level) + ", levels 0-3 checked");
}

Verdict validation() {
  auto errors_on = [](const State& st, ElementId model, ElementId element) {
    int n = 0;
    for (const Marker& m : stored_markers(st, model)) n += m.element == element && m.severity == Severity::Error;
    return n;
  };
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  const bool initial = errors_on(wb.state(), f.model, f.role) == 1 && stored_markers(wb.state(), f.model).size() == 1;
  wb.set_feature(f.role_attributes[0], "isPK", {Scalar(true)});
  const bool cleared = stored_markers(wb.state(), f.model).empty();
  wb.undo();
  wb.co_evolve(meta_edit::RemoveFeature{f.is_pk});
  const bool removed = errors_on(wb.state(), f.model, f.user) == 1 && errors_on(wb.state(), f.model, f.role) == 1;
  wb.undo();
  const bool restored = errors_on(wb.state(), f.model, f.user) == 0 && errors_on(wb.state(), f.model, f.role) == 1;
  wb.co_evolve(meta_edit::RemoveFeature{f.is_pk});
  wb.co_evolve(meta_edit::AddAttribute{f.attribute, "isPK", AttributeType::of(PrimitiveKind::Boolean), 0, 1,
                                       Scalar(true)});
  const bool readded = stored_markers(wb.state(), f.model).empty();
  std::ostringstream d;
  d << "initial " << initial << ", isPK clears " << cleared << ", feature removal " << removed << ", undo " << restored
    << ", re-add " << readded;
  return check(initial && cleared && removed && restored && readded, d.str());
}

Verdict co_evolution() {
  auto sweep = [](const State& st, ElementId feature) {
    std::size_t n = 0;
    for (const auto& [id, e] : st.elements) {
      if (auto* v = std::get_if<DValue>(&e)) n += v->feature == feature;
    }
    return n;
  };
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  // Grow the model so the sweep covers more than the fixture.
  wb.apply([&](Draft& d) {
    for (int i = 0; i < 30; ++i) {
      nlohmann::json attrs = nlohmann::json::array();
      for (int k = 0; k < 1 + i % 4; ++k) attrs.push_back({{"name", "a" + std::to_string(k)}, {"type", "Integer"}});
      add_object(d, f.model, "Entity", {{"name", "E" + std::to_string(i)}, {"ownedAttributes", attrs}});
    }
  });
  const State before = wb.state();
  const std::size_t count = sweep(before, f.type);
  const std::size_t attributes = class_all_instances(before, f.attribute, f.model).size();
  wb.co_evolve(meta_edit::RemoveFeature{f.type});
  const std::size_t after = sweep(wb.state(), f.type);
  const std::size_t removed = before.elements.size() - wb.state().elements.size();
  wb.undo();
  const bool exact = wb.state().same_content(before);
  std::ostringstream d;
  d << count << " values over " << attributes << " attributes, " << after << " left, undo exact " << exact;
  return check(count == attributes && count > 0 && after == 0 && removed == count + 1 && exact, d.str());
}

Verdict collaboration() {
  const auto dir = std::filesystem::temp_directory_path() / "mwb_acceptance_collab";
  auto r = test::run_collab_sim(42, 200, 0.1, dir);
  std::filesystem::remove_all(dir);
  std::ostringstream d;
  d << r.submitted << " submitted, " << r.retransmitted << " retransmitted, " << r.accepted << " accepted, "
    << r.rejected << " rejected; converged " << r.converged << ", replay " << r.replay_matches << ", at-most-once "
    << r.at_most_once;
  return check(r.converged && r.replay_matches && r.at_most_once && r.retransmitted > 0, d.str());
}

Verdict replay_determinism() {
  int mismatches = 0;
  std::size_t transactions = 0;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    Workbench wb;
    auto f = fixtures::load_erd(wb);
    test::EditGenerator edits(f.model, seed);
    for (int step = 0; step < 60; ++step) {
      const int dice = edits.pick(0, 9);
      try {
        if (dice == 0) {
          wb.undo();
        } else if (dice == 1) {
          wb.redo();
        } else {
          wb.apply(edits.next(wb.state()));
        }
      } catch (const Error&) {
      }
    }
    transactions += wb.store().log().size();
    mismatches += Store::replay(wb.store().log()).canonical() != wb.store().canonical();
  }
  return check(mismatches == 0,
               "50 scripts, " + std::to_string(transactions) + " transactions, " + std::to_string(mismatches) + " mismatches");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
    double limit_s;  // 0: no time bound
  };
  const Criterion criteria[] = {
      {"console oracle", console_oracle, 1.0},
      {"expression semantics", expression_semantics, 1.0},
      {"cascade workflow", cascade_workflow, 0},
      {"grid snapping", grid_snapping, 0},
      {"semantic zoom", semantic_zoom, 0},
      {"validation", validation, 0},
      {"co-evolution", co_evolution, 0},
      {"collaboration convergence", collaboration, 30.0},
      {"replay determinism", replay_determinism, 0},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0 && seconds >= c.limit_s) {
      v.pass = false;
      v.detail += ", over the time limit";
    }
    failed += !v.pass;
    std::ostringstream t;
    t.precision(3);
    t << std::fixed << seconds;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << c.name << " (" << t.str() << " s";
    if (c.limit_s > 0) std::cout << " < " << c.limit_s << " s";
    std::cout << "): " << v.detail << std::endl;
  }
  return failed ? 1 : 0;
}
