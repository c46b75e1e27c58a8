#include "mwb/eca.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>

#include "mwb/edits.hpp"
#include "mwb/reflect.hpp"

namespace mwb {

std::string format_trace(const State& state, const FiredRule& f) {
  const std::string subject = state.find(f.subject) ? element_path(state, f.subject) : f.subject.str();
  std::string out = std::to_string(f.depth) + " " + std::string(to_string(f.trigger)) + " " + subject + " " + f.rule_name;
  for (std::size_t i = 0; i < f.writes.size(); ++i) {
    const WriteRecord& w = f.writes[i];
    out += (i ? ", " : " ") + w.target + " " + format_value(state, w.before) + "→" + format_value(state, w.after);
  }
  return out;
}

Value event_value(const Event& event) {
  std::map<std::string, Value> fields{
      {"trigger", std::string(to_string(event.trigger))},
      {"subject", event.subject},
      {"depth", static_cast<std::int64_t>(event.depth)},
  };
  if (event.geometry) {
    fields["x"] = (*event.geometry)[0];
    fields["y"] = (*event.geometry)[1];
    fields["width"] = (*event.geometry)[2];
    fields["height"] = (*event.geometry)[3];
  }
  return make_record(std::move(fields));
}

EvalContext rule_context(const State& state, ElementId element, ElementId viewpoint, ElementId view,
                         const Event& event) {
  EvalContext ctx = EvalContext::for_element(state, element);
  if (view) ctx.view = ViewRef{viewpoint, view};
  ctx.event = event_value(event);
  return ctx;
}

const RuleEngine::Compiled& RuleEngine::compiled(const Rule& rule) {
  auto it = rules_.find(rule.id);
  if (it != rules_.end() && it->second.condition_source == rule.condition &&
      it->second.action_source == rule.action) {
    return it->second;
  }
  Compiled c;
  c.condition_source = rule.condition;
  c.action_source = rule.action;
  if (rule.condition.find_first_not_of(" \t\r\n") != std::string::npos) c.condition = parse_predicate(rule.condition);
  c.action = parse_script(rule.action);
  return rules_[rule.id] = std::move(c);
}

const Predicate& RuleEngine::predicate(const std::string& source) {
  auto it = predicates_.find(source);
  if (it != predicates_.end()) return it->second;
  return predicates_.emplace(source, parse_predicate(source)).first->second;
}

ElementId RuleEngine::register_rule(Store& store, ElementId viewpoint, Rule rule) {
  if (rule.condition.find_first_not_of(" \t\r\n") != std::string::npos) parse_predicate(rule.condition);
  parse_script(rule.action);
  auto it = store.state().viewpoints.find(viewpoint);
  if (it == store.state().viewpoints.end()) fail(ErrorCode::NotFound, "no viewpoint " + viewpoint.str());
  if (rule.owning_view && !it->second.find_view(rule.owning_view)) {
    fail(ErrorCode::NotFound, "no view " + rule.owning_view.str() + " in " + it->second.name);
  }
  for (const Rule& r : it->second.rules) {
    if (r.name == rule.name) fail(ErrorCode::NameClash, "rule '" + rule.name + "' already exists");
  }
  ElementId id;
  store.transact("rules", [&](Draft& d) {
    Viewpoint vp = d.state().viewpoints.at(viewpoint);
    rule.id = d.fresh_id();
    id = rule.id;
    vp.rules.push_back(rule);
    put_viewpoint(d, std::move(vp));
  });
  return id;
}

bool RuleEngine::matches(const State& state, const Rule& rule, const EvalContext& ctx) {
  if (rule.owning_view) {
    const View* v = nullptr;
    for (const auto& [vpid, vp] : state.viewpoints) {
      if ((v = vp.find_view(rule.owning_view))) break;
    }
    if (!v) return false;
    if (!v->apply_to.empty() && !evaluate_predicate(predicate(v->apply_to), ctx)) return false;
  }
  const Compiled& c = compiled(rule);
  return !c.condition || evaluate_predicate(*c.condition, ctx);
}

namespace {

struct Candidate {
  ElementId viewpoint;
  const Rule* rule;
};

std::vector<ElementId> fan_out(const State& state, const Event& ev) {
  std::vector<ElementId> out{ev.subject};
  if (ev.trigger != Trigger::OnDataUpdate) return out;
  for (ElementId r : referrers(state, ev.subject)) {
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  }
  return out;
}

}  // namespace

CascadeReport RuleEngine::dispatch(Store& store, std::vector<Event> initial) {
  CascadeReport report;
  std::deque<Event> queue(initial.begin(), initial.end());
  std::set<std::tuple<ElementId, ElementId, int>> fired;
  std::set<std::pair<ElementId, int>> queued;
  for (const Event& e : initial) queued.insert({e.subject, e.depth});

  while (!queue.empty()) {
    Event ev = queue.front();
    queue.pop_front();
    if (ev.depth > depth_cap_) {
      std::set<ElementId> live{ev.subject};
      for (const Event& e : queue) live.insert(e.subject);
      std::string names;
      for (ElementId id : live) names += (names.empty() ? "" : ", ") + (store.state().find(id) ? element_path(store.state(), id) : id.str());
      throw Error(ErrorCode::CascadeDivergence,
                  "cascade passed depth " + std::to_string(depth_cap_) + " still updating " + names);
    }
    if (!store.state().find(ev.subject) && !store.state().find_node(ev.subject)) continue;

    std::vector<ElementId> targets = fan_out(store.state(), ev);
    // Snapshot the rule list: actions may edit viewpoints.
    std::vector<std::pair<ElementId, Rule>> rules;
    for (const auto& [vpid, vp] : store.state().viewpoints) {
      for (const Rule& r : vp.rules) {
        if (r.trigger == ev.trigger) rules.emplace_back(vpid, r);
      }
    }
    for (const auto& [vpid, rule] : rules) {
      for (ElementId target : targets) {
        if (!store.state().find(target)) continue;
        if (!fired.insert({rule.id, target, ev.depth}).second) continue;
        EvalContext ctx = rule_context(store.state(), target, vpid, rule.owning_view, ev);
        try {
          if (!matches(store.state(), rule, ctx)) continue;
          const Compiled& c = compiled(rule);
          std::vector<WriteRecord> writes;
          CommitResult r = store.transact(
              "rule:" + rule.name,
              [&](Draft& d) { writes = run_script(c.action, ctx, &d).writes; },
              false);
          if (r.empty) continue;
          report.transactions.push_back(r.id);
          report.fired.push_back({ev.depth, ev.trigger, target, rule.id, rule.name, r.id, std::move(writes)});
          for (ElementId a : r.affected) {
            if (std::find(report.touched.begin(), report.touched.end(), a) == report.touched.end()) {
              report.touched.push_back(a);
            }
            if (queued.insert({a, ev.depth + 1}).second) {
              queue.push_back(Event{Trigger::OnDataUpdate, a, std::nullopt, ev.depth + 1});
            }
          }
        } catch (const Error& e) {
          report.errors.push_back({rule.id, target, rule.name + ": " + e.what()});
        }
      }
    }
  }
  return report;
}

}  // namespace mwb
