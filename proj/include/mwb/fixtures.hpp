#pragma once

#include <array>
#include <vector>

#include "mwb/workbench.hpp"

namespace mwb::fixtures {

// Viewpoint flagged as default: a model view with the `grid` parameter and
// its toggle, plus the snap-to-grid rule. Created once per project.
ElementId ensure_default_viewpoint(Workbench& wb);

struct Erd {
  ElementId metamodel;
  ElementId model;
  ElementId named_element, entity, attribute, relation;
  ElementId attribute_type, cardinality;  // enums
  ElementId name, owned_attributes, type, is_pk, left, right, relation_cardinality;
  ElementId user, role, has;
  std::vector<ElementId> user_attributes;  // id, surname, firstname
  std::vector<ElementId> role_attributes;  // id, name, description
  ElementId syntax;                        // ERD viewpoint
  ElementId entity_view, attribute_view, relation_view;
  ElementId validation;  // validation viewpoint
  ElementId pk_rule;
  ElementId defaults;
};

// ERD language and a two-entity model: User (id as primary key, surname,
// firstname) at (495, 120), Role (id, name, description) without a primary
// key, and the relation `has` from User to Role.
Erd load_erd(Workbench& wb);

enum class Layout { LeftmostThousand, Mirrored };

struct Expr {
  ElementId metamodel;
  ElementId model;
  ElementId expression, bin_expression, number, add, sub, mult, div;
  ElementId val, left, right;
  // e0 = 212, e1 = e0 + e2, e2 = 2, e3 = e1 + e6, e4 = e5 - e3 (root),
  // e5 = 1000, e6 = 102.
  std::array<ElementId, 7> e;
  ElementId syntax;
  ElementId model_view;
  ElementId semantics;
  std::vector<ElementId> rules;
  ElementId defaults;
};

// Expression language with the tree 1000 - ((212 + 2) + 102). The layout
// places 1000 left of the addition subtree, or right of it when mirrored.
// Composite values are computed by the semantics rules.
Expr load_expr(Workbench& wb, Layout layout = Layout::LeftmostThousand);

// x coordinates of e0..e6 for a layout.
std::array<double, 7> expr_x(Layout layout);

// Registers Add/Mult (commutative) and Sub/Div (positional) rules for a
// model of the expression language; returns their ids.
std::vector<ElementId> builtin_expression_semantics(Workbench& wb, ElementId model);

}  // namespace mwb::fixtures
