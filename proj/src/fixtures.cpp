#include "mwb/fixtures.hpp"

#include "mwb/reflect.hpp"

namespace mwb::fixtures {

namespace {

using Props = std::map<std::string, std::string>;

TemplateNode tn(TemplateKind kind, Props props = {}, std::vector<TemplateNode> children = {}) {
  TemplateNode t;
  t.kind = kind;
  t.props = std::move(props);
  t.children = std::move(children);
  return t;
}

std::string is_class(const std::string& name) {
  return "context DObject inv: self.instanceof.name = '" + name + "'";
}

ElementId attr(Draft& d, ElementId owner, const std::string& name, AttributeType type, std::int32_t lower = 0,
               std::int32_t upper = 1, std::optional<Scalar> def = std::nullopt) {
  return co_evolve(d, meta_edit::AddAttribute{owner, name, type, lower, upper, std::move(def)});
}

ElementId ref(Draft& d, ElementId owner, const std::string& name, ElementId target, std::int32_t lower,
              std::int32_t upper, bool containment) {
  return co_evolve(d, meta_edit::AddReference{owner, name, target, lower, upper, containment});
}

void extend(Draft& d, ElementId cls, ElementId super) { co_evolve(d, meta_edit::AddSuperclass{cls, super}); }

ClassFlags abstract_flags() {
  ClassFlags f;
  f.is_abstract = true;
  return f;
}

std::vector<ElementId> handles(const State& st, ElementId object, const std::string& feature) {
  std::vector<ElementId> out;
  for (const Scalar& s : value_of(st, object, feature)->values) out.push_back(std::get<ElementId>(s));
  return out;
}

}  // namespace

ElementId ensure_default_viewpoint(Workbench& wb) {
  for (const auto& [id, vp] : wb.state().viewpoints) {
    if (vp.is_default) return id;
  }
  ElementId id;
  wb.store().transact(
      "fixture",
      [&](Draft& d) {
        Viewpoint vp;
        vp.name = "Default";
        vp.is_default = true;
        View model;
        model.name = "ModelView";
        model.apply_to = "context DModel inv: true";
        model.params = {{"grid", "node.state.grid ?? false"}};
        model.templ = tn(TemplateKind::ViewRoot, {{"className", "model ${grid ? 'grid' : ''}"}},
                         {tn(TemplateKind::Control, {{"title", "Controls"}},
                             {tn(TemplateKind::Toggle, {{"name", "grid"}, {"title", "Grid"}})})});
        vp.views.push_back(std::move(model));
        Rule snap;
        snap.name = "SnapToGrid";
        snap.trigger = Trigger::OnDataUpdate;
        snap.condition = "(model.node.state.grid ?? false) && event.subject == data && node != null";
        snap.action =
            "node.x = Math.round(node.x / 15) * 15\n"
            "node.y = Math.round(node.y / 15) * 15";
        vp.rules.push_back(std::move(snap));
        id = put_viewpoint(d, std::move(vp));
      },
      false);
  return id;
}

Erd load_erd(Workbench& wb) {
  Erd f;
  f.defaults = ensure_default_viewpoint(wb);
  CommitResult c = wb.store().transact(
      "fixture",
      [&](Draft& d) {
        f.metamodel = create_metamodel(d, "ERD");
        f.attribute_type = add_enum(d, f.metamodel, "AttributeType", {"Integer", "String", "Boolean", "Date"});
        f.named_element = add_class(d, f.metamodel, "NamedElement", abstract_flags());
        f.entity = add_class(d, f.metamodel, "Entity");
        f.attribute = add_class(d, f.metamodel, "Attribute");
        f.relation = add_class(d, f.metamodel, "Relation");
        f.cardinality = add_enum(d, f.metamodel, "Cardinality", {"OneToOne", "OneToMany", "ManyToMany"});
        f.name = attr(d, f.named_element, "name", AttributeType::of(PrimitiveKind::String));
        extend(d, f.entity, f.named_element);
        extend(d, f.attribute, f.named_element);
        extend(d, f.relation, f.named_element);
        f.owned_attributes = ref(d, f.entity, "ownedAttributes", f.attribute, 0, kUnbounded, true);
        f.type = attr(d, f.attribute, "type", AttributeType::of_enum(f.attribute_type));
        f.is_pk = attr(d, f.attribute, "isPK", AttributeType::of(PrimitiveKind::Boolean), 0, 1, Scalar(false));
        f.left = ref(d, f.relation, "left", f.entity, 1, 1, false);
        f.right = ref(d, f.relation, "right", f.entity, 1, 1, false);
        f.relation_cardinality = attr(d, f.relation, "cardinality", AttributeType::of_enum(f.cardinality));

        f.model = create_model(d, "ERDModel", f.metamodel);
        using nlohmann::json;
        f.user = add_object(d, f.model, "Entity",
                            {{"name", "User"},
                             {"ownedAttributes",
                              json::array({{{"name", "id"}, {"type", "Integer"}, {"isPK", true}},
                                           {{"name", "surname"}, {"type", "String"}},
                                           {{"name", "firstname"}, {"type", "String"}}})}});
        f.role = add_object(d, f.model, "Entity",
                            {{"name", "Role"},
                             {"ownedAttributes", json::array({{{"name", "id"}, {"type", "Integer"}},
                                                              {{"name", "name"}, {"type", "String"}},
                                                              {{"name", "description"}, {"type", "String"}}})}});
        f.has = add_object(d, f.model, "Relation",
                           {{"name", "has"},
                            {"left", f.user.str()},
                            {"right", f.role.str()},
                            {"cardinality", "OneToMany"}});
        f.user_attributes = handles(d.state(), f.user, "ownedAttributes");
        f.role_attributes = handles(d.state(), f.role, "ownedAttributes");
        set_layout(d, f.user, 495, 120, 180, 150);
        set_layout(d, f.role, 855, 120, 180, 150);
        set_layout(d, f.has, 705, 330, 120, 45);

        Viewpoint syntax;
        syntax.name = "ERD";
        View entity;
        entity.name = "Entity";
        entity.apply_to = is_class("Entity");
        entity.templ = tn(
            TemplateKind::ViewRoot, {{"className", "entity"}},
            {tn(TemplateKind::Box, {{"className", "entity-header"}},
                {tn(TemplateKind::Box, {{"className", "input-container mx-2"}},
                    {tn(TemplateKind::Input, {{"data", "data.$name"}, {"field", "value"}, {"autosize", "true"}})})}),
             tn(TemplateKind::Box, {{"className", "entity-body"}},
                {tn(TemplateKind::Repeat, {{"items", "data.$ownedAttributes.values"}, {"as", "attribute"}},
                    {tn(TemplateKind::DefaultNode, {{"data", "attribute"}})})}),
             tn(TemplateKind::Decorators)});
        entity.style = {{"headerColor", {StyleKind::Color, "#2f6f9f"}}, {"borderWidth", {StyleKind::Length, "1"}}};
        View attribute;
        attribute.name = "Attribute";
        attribute.apply_to = is_class("Attribute");
        attribute.templ = tn(
            TemplateKind::ViewRoot, {{"className", "attribute"}},
            {tn(TemplateKind::Box, {{"className", "attribute-header"}},
                {tn(TemplateKind::Input, {{"data", "data"}, {"field", "name"}, {"autosize", "true"}}),
                 tn(TemplateKind::If, {{"test", "data.$isPK.value"}}, {tn(TemplateKind::Text, {{"text", "(PK)"}})}),
                 tn(TemplateKind::Selector, {{"data", "data"}, {"field", "type"}})}),
             tn(TemplateKind::Decorators)});
        View relation;
        relation.name = "Relation";
        relation.apply_to = is_class("Relation");
        relation.templ = tn(
            TemplateKind::ViewRoot, {{"className", "relation"}},
            {tn(TemplateKind::Box, {{"className", "relation-header"}},
                {tn(TemplateKind::Input, {{"data", "data.$name"}, {"field", "value"}, {"autosize", "true"}})}),
             tn(TemplateKind::Edge, {{"view", "EdgeAssociation"}, {"start", "node"}, {"end", "data.$left.value.node"}}),
             tn(TemplateKind::Edge,
                {{"view", "EdgeAssociation"}, {"start", "node"}, {"end", "data.$right.value.node"}}),
             tn(TemplateKind::Decorators)});
        relation.options.child_layout = ChildLayout::GraphVertices;
        syntax.views = {entity, attribute, relation};
        f.syntax = put_viewpoint(d, std::move(syntax));
        const Viewpoint& sv = d.state().viewpoints.at(f.syntax);
        f.entity_view = sv.find_view("Entity")->id;
        f.attribute_view = sv.find_view("Attribute")->id;
        f.relation_view = sv.find_view("Relation")->id;

        Viewpoint validation;
        validation.name = "ERDValidation";
        ValidationRule pk;
        pk.name = "PrimaryKey";
        pk.applies_to = is_class("Entity");
        pk.check =
            "let err = null\n"
            "if (data.$ownedAttributes.values.filter(a => a.$isPK.value ?? false).size == 0) {\n"
            "  err = `Entity ${data.$name.value ?? data.id} has no primary key`\n"
            "}";
        validation.validation_rules.push_back(std::move(pk));
        f.validation = put_viewpoint(d, std::move(validation));
        f.pk_rule = d.state().viewpoints.at(f.validation).validation_rules.front().id;
      },
      false);
  wb.settle(c);
  return f;
}

std::array<double, 7> expr_x(Layout layout) {
  std::array<double, 7> x{300, 360, 420, 480, 330, 90, 600};
  if (layout == Layout::Mirrored) {
    for (double& v : x) v = 780 - v;
  }
  return x;
}

std::vector<ElementId> builtin_expression_semantics(Workbench& wb, ElementId model) {
  const State& st = wb.state();
  const DModel& m = st.get_as<DModel>(model);
  if (m.is_metamodel) fail(ErrorCode::InvalidArgument, m.name + " is a metamodel");
  for (const char* cls : {"Number", "Add", "Sub", "Mult", "Div"}) {
    auto c = find_classifier(st, m.conforms_to, cls);
    if (!c || !st.find_as<DClass>(*c)) fail(ErrorCode::InvalidArgument, "not an expression model: no class " + std::string(cls));
    for (const char* feat : {"val"}) {
      if (!find_feature(st, *c, feat)) fail(ErrorCode::InvalidArgument, std::string(cls) + " lacks '" + feat + "'");
    }
  }
  for (const char* cls : {"Add", "Sub", "Mult", "Div"}) {
    auto c = find_classifier(st, m.conforms_to, cls);
    if (!find_feature(st, *c, "left") || !find_feature(st, *c, "right")) {
      fail(ErrorCode::InvalidArgument, std::string(cls) + " lacks left/right");
    }
  }
  const std::string operands = "data.$left.value != null && data.$right.value != null";
  auto commutative = [&](const std::string& op) {
    return "data.$val.value = data.$left.value.$val.value " + op + " data.$right.value.$val.value";
  };
  auto positional = [&](const std::string& op) {
    return "let l = data.$left.value\n"
           "let r = data.$right.value\n"
           "if (l.node.x <= r.node.x) data.$val.value = l.$val.value " +
           op +
           " r.$val.value\n"
           "else data.$val.value = r.$val.value " +
           op + " l.$val.value";
  };
  struct Spec {
    const char* cls;
    std::string action;
  };
  const std::vector<Spec> specs{{"Add", commutative("+")},
                                {"Mult", commutative("*")},
                                {"Sub", positional("-")},
                                {"Div", positional("/")}};
  ElementId vpid;
  wb.store().transact(
      "rules",
      [&](Draft& d) {
        Viewpoint vp;
        vp.name = "ExpressionSemantics";
        for (const Spec& s : specs) {
          View v;
          v.name = std::string(s.cls) + "View";
          v.apply_to = is_class(s.cls);
          v.templ = tn(TemplateKind::ViewRoot, {{"className", "semantics"}});
          vp.views.push_back(std::move(v));
        }
        vpid = put_viewpoint(d, std::move(vp));
        Viewpoint with_rules = d.state().viewpoints.at(vpid);
        for (const Spec& s : specs) {
          Rule r;
          r.name = std::string(s.cls) + "Rule";
          r.trigger = Trigger::OnDataUpdate;
          r.condition = operands;
          r.action = s.action;
          r.owning_view = with_rules.find_view(std::string(s.cls) + "View")->id;
          with_rules.rules.push_back(std::move(r));
        }
        put_viewpoint(d, std::move(with_rules));
      },
      false);
  std::vector<ElementId> ids;
  for (const Rule& r : wb.state().viewpoints.at(vpid).rules) ids.push_back(r.id);
  return ids;
}

Expr load_expr(Workbench& wb, Layout layout) {
  Expr f;
  f.defaults = ensure_default_viewpoint(wb);
  wb.store().transact(
      "fixture",
      [&](Draft& d) {
        f.metamodel = create_metamodel(d, "ExpressionLanguage");
        f.expression = add_class(d, f.metamodel, "Expression", abstract_flags());
        f.bin_expression = add_class(d, f.metamodel, "BinExpression", abstract_flags());
        f.number = add_class(d, f.metamodel, "Number");
        f.add = add_class(d, f.metamodel, "Add");
        f.sub = add_class(d, f.metamodel, "Sub");
        f.mult = add_class(d, f.metamodel, "Mult");
        f.div = add_class(d, f.metamodel, "Div");
        f.val = attr(d, f.expression, "val", AttributeType::of(PrimitiveKind::Real), 0, 1, Scalar(0.0));
        extend(d, f.bin_expression, f.expression);
        f.left = ref(d, f.bin_expression, "left", f.expression, 1, 1, true);
        f.right = ref(d, f.bin_expression, "right", f.expression, 1, 1, true);
        extend(d, f.number, f.expression);
        for (ElementId c : {f.add, f.sub, f.mult, f.div}) extend(d, c, f.bin_expression);
        f.model = create_model(d, "Expr", f.metamodel);

        Viewpoint syntax;
        syntax.name = "ExpressionSyntax";
        View model;
        model.name = "ModelView";
        model.apply_to = "context DModel inv: true";
        model.params = {{"grid", "node.state.grid ?? false"}, {"level", "node.state.level ?? 3"}};
        model.templ = tn(
            TemplateKind::ViewRoot, {{"className", "model ${grid ? 'grid' : ''}"}},
            {tn(TemplateKind::Control, {{"title", "Controls"}},
                {tn(TemplateKind::Toggle, {{"name", "grid"}, {"title", "Grid"}}),
                 tn(TemplateKind::Slider, {{"name", "level"}, {"title", "Zoom level"}, {"min", "0"}, {"max", "3"}})}),
             tn(TemplateKind::If, {{"test", "level === 0"}},
                {tn(TemplateKind::Box, {{"className", "overview"}},
                    {tn(TemplateKind::Text, {{"text", "${data.rootObjects.size} expression tree(s)"}})})}),
             tn(TemplateKind::If, {{"test", "level === 1"}},
                {tn(TemplateKind::Box, {{"className", "mid-detail"}},
                    {tn(TemplateKind::Text, {{"text", "${data.objects.size} nodes"}})})}),
             tn(TemplateKind::If, {{"test", "level >= 2"}},
                {tn(TemplateKind::Box, {{"className", "full-detail"}},
                    {tn(TemplateKind::Text,
                        {{"text", "${data.objects.size} nodes, value ${data.rootObjects[0].$val.value ?? '-'}"}})})})});
        View number;
        number.name = "NumberView";
        number.apply_to = "context Number inv: true";
        number.templ = tn(TemplateKind::ViewRoot, {{"className", "number"}},
                          {tn(TemplateKind::Input, {{"data", "data.$val"}, {"field", "value"}})});
        View binary;
        binary.name = "BinaryView";
        binary.apply_to = "context BinExpression inv: true";
        binary.templ = tn(
            TemplateKind::ViewRoot, {{"className", "binary ${data.className}"}},
            {tn(TemplateKind::Text, {{"text", "${data.className} = ${data.$val.value}"}}),
             tn(TemplateKind::Edge, {{"view", "operand"}, {"start", "node"}, {"end", "data.$left.value.node"}}),
             tn(TemplateKind::Edge, {{"view", "operand"}, {"start", "node"}, {"end", "data.$right.value.node"}})});
        binary.options.child_layout = ChildLayout::GraphVertices;
        syntax.views = {model, number, binary};
        f.syntax = put_viewpoint(d, std::move(syntax));
        f.model_view = d.state().viewpoints.at(f.syntax).find_view("ModelView")->id;
      },
      false);
  f.rules = builtin_expression_semantics(wb, f.model);
  for (const auto& [id, vp] : wb.state().viewpoints) {
    if (vp.name == "ExpressionSemantics") f.semantics = id;
  }
  CommitResult c = wb.store().transact(
      "fixture",
      [&](Draft& d) {
        auto num = [&](double v) { return add_object(d, f.model, "Number", {{"val", v}}); };
        auto bin = [&](const char* cls, ElementId l, ElementId r) {
          return add_object(d, f.model, cls, {{"left", l.str()}, {"right", r.str()}});
        };
        f.e[0] = num(212);
        f.e[2] = num(2);
        f.e[1] = bin("Add", f.e[0], f.e[2]);
        f.e[6] = num(102);
        f.e[3] = bin("Add", f.e[1], f.e[6]);
        f.e[5] = num(1000);
        f.e[4] = bin("Sub", f.e[5], f.e[3]);
        const std::array<double, 7> xs = expr_x(layout);
        const std::array<double, 7> ys{390, 270, 390, 150, 30, 150, 270};
        for (std::size_t i = 0; i < 7; ++i) {
          set_layout(d, f.e[i], xs[i], ys[i], 90, 45);
          set_state(d, f.e[i], "label", "e" + std::to_string(i));
        }
      },
      false);
  wb.settle(c);
  return f;
}

}  // namespace mwb::fixtures
