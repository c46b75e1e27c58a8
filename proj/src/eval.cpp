#include "mwb/eval.hpp"

#include <cmath>
#include <limits>

#include "mwb/edits.hpp"
#include "mwb/reflect.hpp"

namespace mwb {

EvalContext EvalContext::for_element(const State& state, ElementId id) {
  EvalContext ctx;
  ctx.state = &state;
  ctx.data = Value(id);
  if (state.find_node(id)) ctx.node = id;
  if (state.find(id)) ctx.model = model_of(state, id);
  return ctx;
}

namespace {

using Locals = std::map<std::string, Value>;

[[noreturn]] void fail_at(ErrorCode code, const std::string& msg, const Expr& e) {
  throw Error(code, msg, e.pos, print(e));
}

Value handles(const std::vector<ElementId>& ids) {
  ValueList out;
  out.reserve(ids.size());
  for (ElementId id : ids) out.emplace_back(id);
  return out;
}

Value values_of(const DValue& v, std::int32_t upper, bool single) {
  if (single || upper == 1) return v.values.empty() ? Value() : from_scalar(v.values.front());
  ValueList out;
  for (const Scalar& s : v.values) out.push_back(from_scalar(s));
  return out;
}

Value all_values(const DValue& v) { return values_of(v, kUnbounded, false); }

class Evaluator {
 public:
  explicit Evaluator(const EvalContext& ctx) : ctx_(ctx), st_(*ctx.state) {}

  Value eval(const Expr& e, const Locals& locals, bool soft) {
    switch (e.kind) {
      case ExprKind::Null: return {};
      case ExprKind::Bool: return e.boolean;
      case ExprKind::Int: return e.integer;
      case ExprKind::Real: return e.real;
      case ExprKind::String: return e.name;
      case ExprKind::Template: {
        std::string out;
        for (std::size_t i = 0; i < e.parts.size(); ++i) {
          out += e.parts[i];
          if (i < e.args.size()) out += display_text(st_, eval(*e.args[i], locals, soft));
        }
        return out;
      }
      case ExprKind::List: {
        ValueList out;
        for (const ExprPtr& a : e.args) out.push_back(eval(*a, locals, soft));
        return out;
      }
      case ExprKind::Ident: return ident(e, locals);
      case ExprKind::Member: return member(eval(*e.args[0], locals, soft), e.name, e, soft);
      case ExprKind::Dollar: return dollar(eval(*e.args[0], locals, soft), e, soft);
      case ExprKind::Index: return index(eval(*e.args[0], locals, soft), eval(*e.args[1], locals, soft), e, soft);
      case ExprKind::Call: {
        Value callee = eval(*e.args[0], locals, soft);
        std::vector<Value> args;
        for (std::size_t i = 1; i < e.args.size(); ++i) args.push_back(eval(*e.args[i], locals, soft));
        return call(callee, args, e);
      }
      case ExprKind::Lambda: {
        auto c = std::make_shared<Closure>();
        c->body = e.args[0];
        c->params = e.params;
        c->captured = locals;
        return std::shared_ptr<const Closure>(c);
      }
      case ExprKind::Unary: {
        Value v = eval(*e.args[0], locals, soft);
        if (e.op1 == Op1::Not) return !truthy(v);
        if (auto* i = v.as<std::int64_t>()) {
          if (*i == std::numeric_limits<std::int64_t>::min()) return -static_cast<double>(*i);
          return -*i;
        }
        if (auto* d = v.as<double>()) return -*d;
        fail_at(ErrorCode::TypeMismatch, "cannot negate a " + std::string(v.type_name()), e);
      }
      case ExprKind::Binary: return binary(e, locals, soft);
      case ExprKind::Conditional:
        return truthy(eval(*e.args[0], locals, soft)) ? eval(*e.args[1], locals, soft) : eval(*e.args[2], locals, soft);
    }
    return {};
  }

  Value call(const Value& callee, const std::vector<Value>& args, const Expr& at) {
    if (auto* c = callee.as<std::shared_ptr<const Closure>>()) {
      Locals scope = (*c)->captured;
      for (std::size_t i = 0; i < (*c)->params.size(); ++i) {
        scope[(*c)->params[i]] = i < args.size() ? args[i] : Value();
      }
      return eval(*(*c)->body, scope, false);
    }
    if (auto* b = callee.as<std::shared_ptr<const BuiltinFn>>()) return builtin(**b, args, at);
    fail_at(ErrorCode::TypeMismatch, "a " + std::string(callee.type_name()) + " is not callable", at);
  }

 private:
  Value ident(const Expr& e, const Locals& locals) {
    if (auto it = locals.find(e.name); it != locals.end()) return it->second;
    if (e.name == "data" || e.name == "self") return ctx_.data;
    if (e.name == "node") return ctx_.node ? Value(NodeRef{ctx_.node}) : Value();
    if (e.name == "view") return ctx_.view.view ? Value(ctx_.view) : Value();
    if (e.name == "model") return ctx_.model ? Value(ctx_.model) : Value();
    if (e.name == "event") return ctx_.event;
    if (e.name == "Math") {
      auto b = std::make_shared<BuiltinFn>();
      b->name = "Math";
      return std::shared_ptr<const BuiltinFn>(b);
    }
    fail_at(ErrorCode::Navigation, "unknown identifier", e);
  }

  Value missing(const std::string& what, const Expr& e, bool soft) {
    if (soft) return {};
    fail_at(ErrorCode::Navigation, what, e);
  }

  static Value method(std::string name, Value receiver) {
    auto b = std::make_shared<BuiltinFn>();
    b->name = std::move(name);
    b->receiver = std::move(receiver);
    return std::shared_ptr<const BuiltinFn>(b);
  }

  Value member(const Value& obj, const std::string& name, const Expr& e, bool soft) {
    if (obj.is_null()) {
      if (soft) return {};
      fail_at(ErrorCode::NullAccess, "cannot read '" + name + "' of null", e);
    }
    if (auto* id = obj.as<ElementId>()) {
      if (auto v = element_member(*id, name)) return *v;
      return missing("unknown member '" + name + "'", e, soft);
    }
    if (auto* n = obj.as<NodeRef>()) {
      const NodeInfo* info = st_.find_node(n->id);
      if (!info) return {};
      if (name == "x") return info->x;
      if (name == "y") return info->y;
      if (name == "width") return info->width;
      if (name == "height") return info->height;
      if (name == "state") return StateRef{n->id};
      if (name == "id") return n->id.str();
      if (name == "data" || name == "element") return n->id;
      return missing("unknown node member '" + name + "'", e, soft);
    }
    if (auto* s = obj.as<StateRef>()) {
      const NodeInfo* info = st_.find_node(s->id);
      if (!info) return {};
      auto it = info->state.find(name);
      return it == info->state.end() ? Value() : from_json(it->second);
    }
    if (auto* vr = obj.as<ViewRef>()) {
      const View* v = find_view(*vr);
      if (!v) return {};
      if (name == "name") return v->name;
      if (name == "applyTo" || name == "oclCondition") return v->apply_to;
      if (name == "id") return v->id.str();
      return missing("unknown view member '" + name + "'", e, soft);
    }
    if (const ValueList* l = obj.list()) {
      if (name == "size" || name == "length") return static_cast<std::int64_t>(l->size());
      if (name == "map" || name == "filter") return method(name, obj);
      return missing("unknown list member '" + name + "'", e, soft);
    }
    if (auto* str = obj.as<std::string>()) {
      if (name == "length") return static_cast<std::int64_t>(str->size());
      return missing("unknown string member '" + name + "'", e, soft);
    }
    if (const Record* r = obj.record()) {
      auto it = r->fields.find(name);
      if (it != r->fields.end()) return it->second;
      return missing("unknown field '" + name + "'", e, soft);
    }
    if (auto* b = obj.as<std::shared_ptr<const BuiltinFn>>()) {
      if ((*b)->name == "Math") {
        static const char* const kMath[] = {"round", "floor", "ceil", "abs", "min", "max"};
        for (const char* m : kMath) {
          if (name == m) return method(std::string("Math.") + m, {});
        }
      }
      return missing("unknown member '" + name + "'", e, soft);
    }
    return missing("a " + std::string(obj.type_name()) + " has no member '" + name + "'", e, soft);
  }

  const View* find_view(const ViewRef& vr) const {
    auto it = st_.viewpoints.find(vr.viewpoint);
    return it == st_.viewpoints.end() ? nullptr : it->second.find_view(vr.view);
  }

  Value dollar(const Value& obj, const Expr& e, bool soft) {
    if (obj.is_null()) {
      if (soft) return {};
      fail_at(ErrorCode::NullAccess, "cannot read '$" + e.name + "' of null", e);
    }
    const ElementId* id = obj.as<ElementId>();
    if (!id) fail_at(ErrorCode::Navigation, "'$" + e.name + "' needs a model element", e);
    try {
      return named_child(st_, *id, e.name);
    } catch (const Error& err) {
      if (soft && err.code() == ErrorCode::NotFound) return {};
      fail_at(err.code() == ErrorCode::Ambiguous ? ErrorCode::Ambiguous : ErrorCode::Navigation, err.message(), e);
    }
  }

  Value index(const Value& obj, const Value& key, const Expr& e, bool soft) {
    if (obj.is_null()) {
      if (soft) return {};
      fail_at(ErrorCode::NullAccess, "cannot index null", e);
    }
    if (const ValueList* l = obj.list()) {
      if (!key.is_number()) fail_at(ErrorCode::TypeMismatch, "list index must be a number", e);
      double k = key.number();
      if (k < 0 || k != std::floor(k) || k >= static_cast<double>(l->size())) return {};
      return (*l)[static_cast<std::size_t>(k)];
    }
    if (auto* s = obj.as<std::string>()) {
      if (!key.is_number()) fail_at(ErrorCode::TypeMismatch, "string index must be a number", e);
      double k = key.number();
      if (k < 0 || k != std::floor(k) || k >= static_cast<double>(s->size())) return {};
      return std::string(1, (*s)[static_cast<std::size_t>(k)]);
    }
    if (auto* k = key.as<std::string>()) return member(obj, *k, e, soft);
    fail_at(ErrorCode::TypeMismatch, "cannot index a " + std::string(obj.type_name()), e);
  }

  Value builtin(const BuiltinFn& b, const std::vector<Value>& args, const Expr& at) {
    auto arg = [&](std::size_t i) -> const Value& {
      static const Value kNull;
      return i < args.size() ? args[i] : kNull;
    };
    if (b.name == "map" || b.name == "filter") {
      const ValueList& l = *b.receiver.list();
      ValueList out;
      for (std::size_t i = 0; i < l.size(); ++i) {
        Value r = call(arg(0), {l[i], static_cast<std::int64_t>(i)}, at);
        if (b.name == "map") {
          out.push_back(std::move(r));
        } else if (truthy(r)) {
          out.push_back(l[i]);
        }
      }
      return out;
    }
    auto num = [&](std::size_t i) {
      const Value& v = arg(i);
      if (!v.is_number()) fail_at(ErrorCode::TypeMismatch, b.name + " expects numbers", at);
      return v;
    };
    auto keep_int = [](const Value& in, double r) -> Value {
      if (in.as<std::int64_t>()) return static_cast<std::int64_t>(r);
      return r;
    };
    if (b.name == "Math.round") {
      Value v = num(0);
      return keep_int(v, std::floor(v.number() + 0.5));
    }
    if (b.name == "Math.floor") {
      Value v = num(0);
      return keep_int(v, std::floor(v.number()));
    }
    if (b.name == "Math.ceil") {
      Value v = num(0);
      return keep_int(v, std::ceil(v.number()));
    }
    if (b.name == "Math.abs") {
      Value v = num(0);
      return keep_int(v, std::fabs(v.number()));
    }
    if (b.name == "Math.min" || b.name == "Math.max") {
      if (args.empty()) fail_at(ErrorCode::InvalidArgument, b.name + " needs arguments", at);
      Value best = num(0);
      for (std::size_t i = 1; i < args.size(); ++i) {
        Value v = num(i);
        if (b.name == "Math.min" ? v.number() < best.number() : v.number() > best.number()) best = v;
      }
      return best;
    }
    fail_at(ErrorCode::TypeMismatch, b.name + " is not callable", at);
  }

  Value binary(const Expr& e, const Locals& locals, bool soft) {
    const Expr& l = *e.args[0];
    const Expr& r = *e.args[1];
    switch (e.op2) {
      case Op2::Coalesce: {
        Value a = eval(l, locals, true);
        return a.is_null() ? eval(r, locals, soft) : a;
      }
      case Op2::And: {
        Value a = eval(l, locals, soft);
        return truthy(a) ? eval(r, locals, soft) : a;
      }
      case Op2::Or: {
        Value a = eval(l, locals, soft);
        return truthy(a) ? a : eval(r, locals, soft);
      }
      default: break;
    }
    const Value a = eval(l, locals, soft);
    const Value b = eval(r, locals, soft);
    switch (e.op2) {
      case Op2::Eq:
      case Op2::StrictEq: return values_equal(a, b);
      case Op2::Ne:
      case Op2::StrictNe: return !values_equal(a, b);
      case Op2::Lt:
      case Op2::Le:
      case Op2::Gt:
      case Op2::Ge: {
        int cmp = 0;
        if (a.is_number() && b.is_number()) {
          double x = a.number(), y = b.number();
          if (std::isnan(x) || std::isnan(y)) return false;
          cmp = x < y ? -1 : (x > y ? 1 : 0);
        } else if (a.as<std::string>() && b.as<std::string>()) {
          cmp = a.as<std::string>()->compare(*b.as<std::string>());
        } else {
          fail_at(ErrorCode::TypeMismatch,
                  "cannot compare " + std::string(a.type_name()) + " with " + std::string(b.type_name()), e);
        }
        switch (e.op2) {
          case Op2::Lt: return cmp < 0;
          case Op2::Le: return cmp <= 0;
          case Op2::Gt: return cmp > 0;
          default: return cmp >= 0;
        }
      }
      case Op2::Add:
        if (a.as<std::string>() || b.as<std::string>()) return display_text(st_, a) + display_text(st_, b);
        return arith(e, a, b);
      default: return arith(e, a, b);
    }
  }

  Value arith(const Expr& e, const Value& a, const Value& b) {
    if (!a.is_number() || !b.is_number()) {
      fail_at(ErrorCode::TypeMismatch,
              "operator " + std::string(to_string(e.op2)) + " on " + std::string(a.type_name()) + " and " +
                  std::string(b.type_name()),
              e);
    }
    const std::int64_t* x = a.as<std::int64_t>();
    const std::int64_t* y = b.as<std::int64_t>();
    if (e.op2 == Op2::Div) {
      if (b.number() == 0) fail_at(ErrorCode::InvalidArgument, "division by zero", e);
      return a.number() / b.number();
    }
    if (e.op2 == Op2::Mod) {
      if (b.number() == 0) fail_at(ErrorCode::InvalidArgument, "division by zero", e);
      if (x && y) return *x % *y;
      return std::fmod(a.number(), b.number());
    }
    if (x && y) {
      std::int64_t out = 0;
      bool overflow = false;
      switch (e.op2) {
        case Op2::Add: overflow = __builtin_add_overflow(*x, *y, &out); break;
        case Op2::Sub: overflow = __builtin_sub_overflow(*x, *y, &out); break;
        default: overflow = __builtin_mul_overflow(*x, *y, &out); break;
      }
      if (!overflow) return out;
    }
    switch (e.op2) {
      case Op2::Add: return a.number() + b.number();
      case Op2::Sub: return a.number() - b.number();
      default: return a.number() * b.number();
    }
  }

  std::optional<Value> element_member(ElementId id, const std::string& name) {
    const Element* el = st_.find(id);
    if (!el) return std::nullopt;
    if (name == "id") return id.str();
    if (name == "node") return st_.find_node(id) ? Value(NodeRef{id}) : Value();
    return std::visit([&](const auto& r) { return member_of(r, name); }, *el);
  }

  std::optional<Value> member_of(const DObject& o, const std::string& name) {
    if (name == "instanceof" || name == "instanceOf") return Value(o.instance_of);
    if (name == "className") return Value(st_.get_as<DClass>(o.instance_of).name);
    if (name == "parent" || name == "father") return o.container ? Value(o.container->parent) : Value();
    if (name == "model") return Value(o.model);
    if (auto f = find_feature(st_, o.instance_of, name)) {
      auto it = o.features.find(*f);
      if (it == o.features.end()) return Value();
      return values_of(st_.get_as<DValue>(it->second), feature_upper(st_, *f), false);
    }
    if (name == "name") return Value();
    return std::nullopt;
  }

  std::optional<Value> member_of(const DValue& v, const std::string& name) {
    if (name == "value") return values_of(v, 1, true);
    if (name == "values") return all_values(v);
    if (name == "owner" || name == "parent" || name == "father") return Value(v.owner);
    if (name == "feature") return Value(v.feature);
    if (name == "name") return Value(std::string(feature_name(st_, v.feature)));
    return std::nullopt;
  }

  std::vector<ElementId> instances(ElementId cls) {
    const DModel* m = ctx_.model ? st_.find_as<DModel>(ctx_.model) : nullptr;
    if (m && !m->is_metamodel && m->conforms_to == model_of(st_, cls)) return class_all_instances(st_, cls, m->id);
    std::vector<ElementId> out;
    for (const auto& [oid, e] : st_.elements) {
      const DObject* o = std::get_if<DObject>(&e);
      if (o && is_subclass_of(st_, o->instance_of, cls)) out.push_back(oid);
    }
    return out;
  }

  std::optional<Value> member_of(const DClass& c, const std::string& name) {
    if (name == "name") return Value(c.name);
    if (name == "isAbstract") return Value(c.flags.is_abstract);
    if (name == "isInterface") return Value(c.flags.is_interface);
    if (name == "isFinal") return Value(c.flags.is_final);
    if (name == "isSingleton") return Value(c.flags.is_singleton);
    if (name == "isRootable") return Value(c.flags.is_rootable);
    if (name == "isPrimitive") return Value(c.flags.is_primitive);
    if (name == "attributes") return handles(class_features(st_, c.id).attributes);
    if (name == "references") return handles(class_features(st_, c.id).references);
    if (name == "features") {
      FeatureSet fs = class_features(st_, c.id);
      fs.attributes.insert(fs.attributes.end(), fs.references.begin(), fs.references.end());
      return handles(fs.attributes);
    }
    if (name == "extends") return handles(c.extends);
    if (name == "extendedBy") return handles(class_hierarchy(st_, c.id).extended_by);
    if (name == "instances" || name == "allInstances") return handles(instances(c.id));
    if (name == "operations") {
      ValueList out;
      for (const auto& op : c.operations) out.emplace_back(op.name);
      return Value(std::move(out));
    }
    if (name == "package" || name == "parent" || name == "father") return Value(c.package);
    if (name == "model") return Value(model_of(st_, c.id));
    return std::nullopt;
  }

  std::optional<Value> member_of(const DAttribute& a, const std::string& name) {
    if (name == "name") return Value(a.name);
    if (name == "owner" || name == "parent" || name == "father") return Value(a.owner);
    if (name == "type") return a.type.is_enum() ? Value(a.type.enumeration) : Value(std::string(to_string(a.type.primitive)));
    if (name == "lowerBound") return Value(static_cast<std::int64_t>(a.lower));
    if (name == "upperBound") return Value(static_cast<std::int64_t>(a.upper));
    if (name == "defaultValue") return a.default_value ? from_scalar(*a.default_value) : Value();
    return std::nullopt;
  }

  std::optional<Value> member_of(const DReference& r, const std::string& name) {
    if (name == "name") return Value(r.name);
    if (name == "owner" || name == "parent" || name == "father") return Value(r.owner);
    if (name == "target" || name == "type") return Value(r.target);
    if (name == "lowerBound") return Value(static_cast<std::int64_t>(r.lower));
    if (name == "upperBound") return Value(static_cast<std::int64_t>(r.upper));
    if (name == "isContainment") return Value(r.is_containment);
    return std::nullopt;
  }

  std::optional<Value> member_of(const DModel& m, const std::string& name) {
    if (name == "name") return Value(m.name);
    if (name == "isMetamodel") return Value(m.is_metamodel);
    if (name == "packages") return handles(m.packages);
    if (name == "rootObjects") return handles(m.root_objects);
    if (name == "allInstances" || name == "objects") return handles(model_objects(st_, m.id));
    if (name == "classes" || name == "classifiers") {
      ElementId mm = m.is_metamodel ? m.id : m.conforms_to;
      return mm ? handles(metamodel_classifiers(st_, mm)) : Value(ValueList{});
    }
    if (name == "metamodel" || name == "conformsTo") return m.conforms_to ? Value(m.conforms_to) : Value();
    return std::nullopt;
  }

  std::optional<Value> member_of(const DPackage& p, const std::string& name) {
    if (name == "name") return Value(p.name);
    if (name == "classifiers") return handles(p.classifiers);
    if (name == "model" || name == "parent" || name == "father") return Value(p.model);
    return std::nullopt;
  }

  std::optional<Value> member_of(const DEnum& en, const std::string& name) {
    if (name == "name") return Value(en.name);
    if (name == "literals") {
      ValueList out;
      for (const auto& l : en.literals) out.emplace_back(l);
      return Value(std::move(out));
    }
    if (name == "package" || name == "parent" || name == "father") return Value(en.package);
    return std::nullopt;
  }

  const EvalContext& ctx_;
  const State& st_;
};

// --- scripts ---

class ScriptRunner {
 public:
  ScriptRunner(const EvalContext& ctx, Draft* draft) : ctx_(ctx), draft_(draft), ev_(ctx_) {
    result_.locals = ctx.locals;
  }

  ScriptResult run(const std::vector<StmtPtr>& body) {
    exec(body);
    return std::move(result_);
  }

 private:
  void exec(const std::vector<StmtPtr>& body) {
    for (const StmtPtr& s : body) exec(*s);
  }

  void exec(const Stmt& s) {
    Locals& locals = result_.locals;
    switch (s.kind) {
      case StmtKind::Let:
        locals[s.name] = ev_.eval(*s.value, locals, false);
        return;
      case StmtKind::Expr:
        result_.last = ev_.eval(*s.value, locals, false);
        return;
      case StmtKind::If:
        if (truthy(ev_.eval(*s.value, locals, false))) {
          exec(s.then_branch);
        } else {
          exec(s.else_branch);
        }
        return;
      case StmtKind::Assign:
        if (!s.target) {
          locals[s.name] = ev_.eval(*s.value, locals, false);
        } else {
          write(s);
        }
        return;
    }
  }

  [[noreturn]] void fail_write(const std::string& msg, const Stmt& s) {
    throw Error(ErrorCode::InvalidArgument, msg, s.pos, print(*s.target));
  }

  void write(const Stmt& s) {
    Locals& locals = result_.locals;
    const Expr& target = *s.target;
    if (!draft_) fail_write("this script is read-only", s);
    const State& st = draft_->state();
    Value holder = ev_.eval(*target.args[0], locals, false);
    Value value = ev_.eval(*s.value, locals, false);
    const std::string& name = target.name;

    if (auto* sr = holder.as<StateRef>()) {
      const NodeInfo* info = st.find_node(sr->id);
      if (!info) fail_write("no node", s);
      auto it = info->state.find(name);
      Value before = it == info->state.end() ? Value() : from_json(it->second);
      if (values_equal(before, value)) return;
      set_state(*draft_, sr->id, name, to_json(value));
      result_.writes.push_back({sr->id, "state." + name, before, value});
      return;
    }
    if (auto* nr = holder.as<NodeRef>()) {
      const NodeInfo* info = st.find_node(nr->id);
      if (!info) fail_write("no node", s);
      if (!value.is_number()) fail_write("layout values must be numbers", s);
      NodeInfo n = *info;
      double* slot = name == "x" ? &n.x : name == "y" ? &n.y : name == "width" ? &n.width : name == "height" ? &n.height : nullptr;
      if (!slot) fail_write("node has no writable '" + name + "'", s);
      Value before = *slot;
      if (*slot == value.number()) return;
      *slot = value.number();
      set_layout(*draft_, nr->id, n.x, n.y, n.width, n.height);
      result_.writes.push_back({nr->id, "node." + name, before, value});
      return;
    }
    const ElementId* id = holder.as<ElementId>();
    if (!id) fail_write("cannot assign to a member of a " + std::string(holder.type_name()), s);
    ElementId owner;
    ElementId feature;
    bool single = true;
    if (const DValue* v = st.find_as<DValue>(*id)) {
      if (name != "value" && name != "values") fail_write("assign to .value or .values", s);
      owner = v->owner;
      feature = v->feature;
      single = name == "value";
    } else if (const DObject* o = st.find_as<DObject>(*id)) {
      auto f = find_feature(st, o->instance_of, name);
      if (!f) fail_write("no feature '" + name + "'", s);
      owner = o->id;
      feature = *f;
      single = feature_upper(st, *f) == 1;
    } else {
      fail_write("cannot assign to this element", s);
    }
    const DObject& o = st.get_as<DObject>(owner);
    const DValue* current = nullptr;
    if (auto it = o.features.find(feature); it != o.features.end()) current = st.find_as<DValue>(it->second);
    Value before = current ? values_of(*current, single ? 1 : kUnbounded, single) : Value();
    std::vector<Scalar> scalars;
    if (const ValueList* l = value.list()) {
      for (const Value& x : *l) scalars.push_back(to_scalar(x));
    } else if (!value.is_null()) {
      scalars.push_back(to_scalar(value));
    }
    if (current) {
      std::vector<Scalar> now = current->values;
      if (now == scalars) return;
      // An int written into a real slot compares equal after widening.
      if (now.size() == scalars.size()) {
        bool same = true;
        for (std::size_t i = 0; i < now.size() && same; ++i) {
          same = values_equal(from_scalar(now[i]), from_scalar(scalars[i]));
        }
        if (same) return;
      }
    }
    set_feature(*draft_, owner, std::string(feature_name(st, feature)), std::move(scalars));
    result_.writes.push_back({owner, "$" + std::string(feature_name(st, feature)), before, value});
  }

  EvalContext ctx_;
  Draft* draft_;
  Evaluator ev_;
  ScriptResult result_;
};

}  // namespace

Value evaluate(const Expr& e, const EvalContext& ctx) {
  Evaluator ev(ctx);
  return ev.eval(e, ctx.locals, false);
}

Value evaluate(std::string_view source, const EvalContext& ctx) { return evaluate(*parse_expression(source), ctx); }

bool evaluate_predicate(const Predicate& p, const EvalContext& ctx) {
  if (!p.context_class.empty()) {
    const ElementId* id = ctx.data.as<ElementId>();
    const State& st = *ctx.state;
    if (p.context_class == "DObject") {
      if (!id || !st.find_as<DObject>(*id)) return false;
    } else if (p.context_class == "DClass" || p.context_class == "DModel" || p.context_class == "DValue" ||
               p.context_class == "DPackage" || p.context_class == "DAttribute" ||
               p.context_class == "DReference" || p.context_class == "DEnum") {
      if (!id || !st.find(*id) || to_string(kind_of(*st.find(*id))) != p.context_class) return false;
    } else {
      const DObject* o = id ? st.find_as<DObject>(*id) : nullptr;
      if (!o) return false;
      bool match = false;
      for (ElementId c : superclass_closure(st, o->instance_of)) {
        if (st.get_as<DClass>(c).name == p.context_class) match = true;
      }
      if (!match) return false;
    }
  }
  Value v = evaluate(*p.expr, ctx);
  const bool* b = v.as<bool>();
  if (!b) {
    throw Error(ErrorCode::PredicateType, "predicate yielded a " + std::string(v.type_name()) + ", not a boolean",
                p.expr->pos, print(*p.expr));
  }
  return *b;
}

bool evaluate_predicate(std::string_view source, const EvalContext& ctx) {
  return evaluate_predicate(parse_predicate(source), ctx);
}

ScriptResult run_script(const Script& script, const EvalContext& ctx, Draft* draft) {
  EvalContext local = ctx;
  if (draft) local.state = &draft->state();
  ScriptRunner runner(local, draft);
  return runner.run(script.body);
}

}  // namespace mwb
