#include "mwb/console.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mwb/fixtures.hpp"
#include "mwb/reflect.hpp"
#include "mwb/render.hpp"
#include "mwb/server.hpp"

namespace mwb {

namespace {

std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_word = false;
  char quote = 0;
  for (char c : line) {
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else {
        cur += c;
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_word) out.push_back(cur);
      cur.clear();
      in_word = false;
    } else {
      cur += c;
      in_word = true;
    }
  }
  if (quote) fail(ErrorCode::Syntax, "unterminated quote");
  if (in_word) out.push_back(cur);
  return out;
}

// Value of `--name` in `a`, removing both words.
std::optional<std::string> take_option(std::vector<std::string>& a, const std::string& name) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == name) {
      if (i + 1 >= a.size()) fail(ErrorCode::InvalidArgument, name + " needs a value");
      std::string v = a[i + 1];
      a.erase(a.begin() + static_cast<std::ptrdiff_t>(i), a.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      return v;
    }
  }
  return std::nullopt;
}

bool take_flag(std::vector<std::string>& a, const std::string& name) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == name) {
      a.erase(a.begin() + static_cast<std::ptrdiff_t>(i));
      return true;
    }
  }
  return false;
}

void no_extra(const std::vector<std::string>& a, std::size_t expected, const std::string& usage) {
  if (a.size() != expected) fail(ErrorCode::InvalidArgument, "usage: " + usage);
}

bool on_off(const std::string& v) {
  if (v == "on" || v == "true") return true;
  if (v == "off" || v == "false") return false;
  fail(ErrorCode::InvalidArgument, "expected on or off, got '" + v + "'");
}

double number(const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) fail(ErrorCode::InvalidArgument, "'" + v + "' is not a number");
  return d;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::Io, "cannot write " + path);
  f << text;
}

}  // namespace

Console::Console(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

void Console::reset(Workbench wb) {
  const bool tracing = wb_.tracing();
  wb_ = std::move(wb);
  wb_.set_tracing(tracing);
  selected_.reset();
  model_.reset();
  viewpoint_.reset();
}

int Console::run(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    int status = execute(line);
    if (status != kOk) return status;
  }
  return kOk;
}

int Console::execute(const std::string& line) {
  try {
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos) return kOk;
    const auto end = line.find_first_of(" \t", start);
    const std::string cmd = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const std::string rest = end == std::string::npos ? "" : line.substr(end + 1);
    if (cmd == "eval") {
      cmd_eval(rest);
      return kOk;
    }
    Args a = split_words(rest);
    if (cmd == "new") {
      cmd_new(a);
    } else if (cmd == "load") {
      cmd_load(a);
    } else if (cmd == "save") {
      cmd_save(a);
    } else if (cmd == "fixtures") {
      cmd_fixtures(a);
    } else if (cmd == "select") {
      cmd_select(a);
    } else if (cmd == "render") {
      cmd_render(a);
    } else if (cmd == "validate") {
      return cmd_validate(a);
    } else if (cmd == "drag") {
      cmd_drag(a);
    } else if (cmd == "set") {
      cmd_set(a);
    } else if (cmd == "undo" || cmd == "redo") {
      no_extra(a, 0, cmd);
      cmd_undo(cmd == "redo");
    } else if (cmd == "serve") {
      cmd_serve(a);
    } else if (cmd == "trace") {
      cmd_trace(a);
    } else if (cmd == "viewpoint") {
      cmd_viewpoint(a);
    } else if (cmd == "control") {
      cmd_control(a);
    } else {
      fail(ErrorCode::Syntax, "unknown command '" + cmd + "'");
    }
    return kOk;
  } catch (const Error& e) {
    flush_trace();
    err_ << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err_ << "error: " << e.what() << "\n";
  }
  return kCommandError;
}

ElementId Console::resolve(const std::string& ref) const {
  const State& st = wb_.state();
  if (!ref.empty() && ref[0] == '#') {
    ElementId id{0};
    try {
      id = ElementId{std::stoull(ref.substr(1))};
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad element id '" + ref + "'");
    }
    if (!st.find(id)) fail(ErrorCode::NotFound, "no element " + ref);
    return id;
  }
  std::vector<ElementId> hits;
  if (!ref.empty() && ref[0] == '/') {
    for (const auto& [id, e] : st.elements) {
      if (std::holds_alternative<DValue>(e)) continue;
      if (element_path(st, id) == ref) hits.push_back(id);
    }
  } else {
    for (const auto& [id, e] : st.elements) {
      if (!std::holds_alternative<DObject>(e)) continue;
      auto name = element_name(st, id);
      bool labelled = false;
      if (const NodeInfo* n = st.find_node(id)) {
        auto label = n->state.find("label");
        labelled = label != n->state.end() && label->second == ref;
      }
      if ((name && *name == ref) || labelled) hits.push_back(id);
    }
  }
  if (hits.empty()) fail(ErrorCode::NotFound, "no element '" + ref + "'");
  if (hits.size() > 1) {
    std::string all;
    for (ElementId h : hits) all += " " + element_path(st, h);
    fail(ErrorCode::Ambiguous, "'" + ref + "' matches" + all);
  }
  return hits[0];
}

ElementId Console::current_model() const {
  if (model_ && wb_.state().find(*model_)) return *model_;
  auto ms = models(wb_.state(), false);
  if (ms.empty()) fail(ErrorCode::NotFound, "no model is open");
  return ms.front();
}

ElementId Console::current_viewpoint() const {
  if (viewpoint_ && wb_.state().viewpoints.count(*viewpoint_)) return *viewpoint_;
  for (const auto& [id, vp] : wb_.state().viewpoints) {
    if (!vp.is_default && !vp.views.empty()) return id;
  }
  for (const auto& [id, vp] : wb_.state().viewpoints) {
    if (vp.is_default) return id;
  }
  return ElementId{};
}

void Console::flush_trace() {
  for (const std::string& line : wb_.trace()) out_ << "trace " << line << "\n";
  wb_.clear_trace();
}

void Console::cmd_new(const Args& a) {
  no_extra(a, 0, "new");
  reset(Workbench());
  fixtures::ensure_default_viewpoint(wb_);
  out_ << "new project\n";
}

void Console::cmd_load(const Args& a) {
  no_extra(a, 1, "load <file>");
  reset(Workbench(Store::load(a[0])));
  out_ << "loaded " << a[0] << "\n";
}

void Console::cmd_save(const Args& a) {
  no_extra(a, 1, "save <file>");
  wb_.store().save(a[0]);
  out_ << "saved " << a[0] << "\n";
}

void Console::cmd_fixtures(const Args& in) {
  Args a = in;
  const bool mirrored = take_flag(a, "--mirrored");
  if (a.size() != 2 || a[0] != "load") fail(ErrorCode::InvalidArgument, "usage: fixtures load {erd|expr} [--mirrored]");
  Workbench wb;
  wb.set_tracing(wb_.tracing());
  if (a[1] == "erd") {
    auto f = fixtures::load_erd(wb);
    reset(std::move(wb));
    model_ = f.model;
    viewpoint_ = f.syntax;
    selected_ = f.user;
  } else if (a[1] == "expr") {
    auto f = fixtures::load_expr(wb, mirrored ? fixtures::Layout::Mirrored : fixtures::Layout::LeftmostThousand);
    reset(std::move(wb));
    model_ = f.model;
    viewpoint_ = f.syntax;
    selected_ = f.e[4];
  } else {
    fail(ErrorCode::InvalidArgument, "unknown fixture '" + a[1] + "'");
  }
  wb_.clear_trace();
  out_ << "loaded fixture " << a[1] << ", selected " << element_path(wb_.state(), *selected_) << "\n";
}

void Console::cmd_select(const Args& a) {
  no_extra(a, 1, "select <element>");
  ElementId id = resolve(a[0]);
  selected_ = id;
  model_ = model_of(wb_.state(), id);
  out_ << "selected " << element_path(wb_.state(), id) << "\n";
}

void Console::cmd_eval(const std::string& source) {
  if (source.find_first_not_of(" \t") == std::string::npos) fail(ErrorCode::InvalidArgument, "usage: eval <expression>");
  const State& st = wb_.state();
  EvalContext ctx;
  if (selected_ && st.find(*selected_)) {
    ctx = view_context(st, *selected_, current_viewpoint());
  } else {
    ctx = EvalContext::for_element(st, current_model());
  }
  out_ << format_value(st, evaluate(source, ctx)) << "\n";
}

void Console::cmd_render(const Args& in) {
  Args a = in;
  auto out_file = take_option(a, "--out");
  auto level = take_option(a, "--level");
  auto grid = take_option(a, "--grid");
  auto vp_name = take_option(a, "--viewpoint");
  no_extra(a, 0, "render [--out file] [--level n] [--grid on|off] [--viewpoint name]");
  ParamOverrides overrides;
  if (level) {
    const double l = number(*level);
    if (l != static_cast<int>(l)) fail(ErrorCode::InvalidArgument, "level must be an integer");
    overrides["level"] = Value(static_cast<int>(l));
  }
  if (grid) overrides["grid"] = Value(on_off(*grid));
  ElementId vp = current_viewpoint();
  if (vp_name) {
    vp = ElementId{};
    for (const auto& [id, v] : wb_.state().viewpoints) {
      if (v.name == *vp_name) vp = id;
    }
    if (!vp) fail(ErrorCode::NotFound, "no viewpoint '" + *vp_name + "'");
  }
  const std::string svg = render_to_svg(render(wb_.state(), current_model(), vp, overrides));
  if (out_file) {
    write_file(*out_file, svg);
    out_ << "wrote " << *out_file << "\n";
  } else {
    out_ << svg;
  }
}

int Console::cmd_validate(const Args& in) {
  Args a = in;
  auto report = take_option(a, "--report");
  const bool strict = take_flag(a, "--strict");
  no_extra(a, 0, "validate [--report file] [--strict]");
  std::vector<Marker> all;
  for (ElementId m : models(wb_.state(), false)) {
    auto ms = wb_.validate(m);
    all.insert(all.end(), ms.begin(), ms.end());
  }
  std::size_t errors = 0;
  for (const Marker& m : all) {
    errors += m.severity == Severity::Error;
    out_ << to_string(m.severity) << " " << element_path(wb_.state(), m.element) << " " << m.rule << ": " << m.message
         << "\n";
  }
  out_ << errors << " error(s), " << all.size() - errors << " warning(s)\n";
  if (report) write_file(*report, marker_report(wb_.state(), all).dump(2) + "\n");
  return strict && errors ? kValidationFailed : kOk;
}

void Console::cmd_drag(const Args& a) {
  no_extra(a, 3, "drag <element> <x> <y>");
  ElementId id = resolve(a[0]);
  wb_.simulate_drag(id, {{number(a[1]), number(a[2])}});
  flush_trace();
  const NodeInfo& n = *wb_.state().find_node(id);
  out_ << element_path(wb_.state(), id) << " at (" << format_number(n.x) << ", " << format_number(n.y) << ")\n";
}

void Console::cmd_set(const Args& a) {
  no_extra(a, 2, "set <element>.<feature> <value>");
  const auto dot = a[0].rfind('.');
  if (dot == std::string::npos || dot == 0) fail(ErrorCode::InvalidArgument, "usage: set <element>.<feature> <value>");
  const ElementId id = resolve(a[0].substr(0, dot));
  const std::string feature = a[0].substr(dot + 1);
  const State& st = wb_.state();
  const DObject* o = st.find_as<DObject>(id);
  if (!o) fail(ErrorCode::TypeMismatch, element_path(st, id) + " is not an object");
  auto f = find_feature(st, o->instance_of, feature);
  if (!f) fail(ErrorCode::NotFound, "no feature '" + feature + "' on " + element_path(st, id));
  std::vector<std::string> items;
  const bool many = feature_upper(st, *f) != 1;
  if (a[1] != "[]") {
    if (many) {
      std::stringstream ss(a[1]);
      std::string item;
      while (std::getline(ss, item, ',')) items.push_back(item);
    } else {
      items.push_back(a[1]);
    }
  }
  std::vector<Scalar> values;
  for (const std::string& item : items) {
    if (const DAttribute* attr = st.find_as<DAttribute>(*f)) {
      values.push_back(parse_literal(st, *attr, item));
    } else {
      values.push_back(resolve(item));
    }
  }
  wb_.set_feature(id, feature, values);
  flush_trace();
  EvalContext ctx = EvalContext::for_element(wb_.state(), id);
  out_ << element_path(wb_.state(), id) << "." << feature << " = "
       << format_value(wb_.state(), evaluate("data." + feature, ctx)) << "\n";
}

void Console::cmd_undo(bool redo) {
  Outcome o = redo ? wb_.redo() : wb_.undo();
  flush_trace();
  out_ << (redo ? "redone" : "undone") << " (transaction " << o.commit.id << ")\n";
}

void Console::cmd_serve(const Args& in) {
  Args a = in;
  auto port = take_option(a, "--port");
  auto ws_port = take_option(a, "--ws-port");
  auto data = take_option(a, "--data");
  auto secret = take_option(a, "--secret");
  auto host = take_option(a, "--host");
  no_extra(a, 0, "serve [--port n] [--ws-port n] [--data dir] [--secret s] [--host addr]");
  const char* env = std::getenv("MWB_SECRET");
  CollabService service(data.value_or("mwb-data"), secret.value_or(env ? env : "mwb"));
  if (!wb_.state().elements.empty()) {
    ProjectRecord r = service.create_project(secret.value_or(env ? env : "mwb"), "console", "console",
                                             wb_.store().document());
    out_ << "project " << r.id << "\n";
  }
  const auto http = static_cast<std::uint16_t>(port ? number(*port) : 8080);
  const auto ws = static_cast<std::uint16_t>(ws_port ? number(*ws_port) : (http ? http + 1 : 0));
  CollabServer server(service, http, ws, host.value_or("127.0.0.1"));
  server.start();
  out_ << "serving projects on http://" << host.value_or("127.0.0.1") << ":" << server.http_port()
       << " and rooms on ws://" << host.value_or("127.0.0.1") << ":" << server.ws_port() << std::endl;
  server.wait();
}

void Console::cmd_trace(const Args& a) {
  no_extra(a, 1, "trace on|off");
  wb_.set_tracing(on_off(a[0]));
  wb_.clear_trace();
  out_ << "trace " << a[0] << "\n";
}

void Console::cmd_viewpoint(const Args& a) {
  no_extra(a, 1, "viewpoint <name>");
  for (const auto& [id, vp] : wb_.state().viewpoints) {
    if (vp.name == a[0]) {
      viewpoint_ = id;
      out_ << "viewpoint " << vp.name << "\n";
      return;
    }
  }
  fail(ErrorCode::NotFound, "no viewpoint '" + a[0] + "'");
}

void Console::cmd_control(const Args& a) {
  no_extra(a, 2, "control <name> <value>");
  Value v;
  if (a[1] == "on" || a[1] == "true") {
    v = true;
  } else if (a[1] == "off" || a[1] == "false") {
    v = false;
  } else {
    const double d = number(a[1]);
    v = d == static_cast<double>(static_cast<std::int64_t>(d)) ? Value(static_cast<std::int64_t>(d)) : Value(d);
  }
  const ElementId model = current_model();
  wb_.set_control_parameter(model, current_viewpoint(), a[0], v);
  flush_trace();
  out_ << a[0] << " = " << format_value(wb_.state(), v) << "\n";
}

}  // namespace mwb
