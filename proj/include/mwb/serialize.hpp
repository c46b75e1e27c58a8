#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mwb/ops.hpp"

namespace mwb {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

json id_to_json(ElementId id);
ElementId id_from_json(const json& j);

json scalar_to_json(const Scalar& s);
Scalar scalar_from_json(const json& j);

json element_to_json(const Element& e);
Element element_from_json(const json& j);

json node_to_json(const NodeInfo& n);
NodeInfo node_from_json(const json& j);

json template_to_json(const TemplateNode& t);
TemplateNode template_from_json(const json& j);

json viewpoint_to_json(const Viewpoint& vp);
Viewpoint viewpoint_from_json(const json& j);

json op_to_json(const Op& op);
Op op_from_json(const json& j);

json transaction_to_json(const Transaction& tx);
Transaction transaction_from_json(const json& j);

// Canonical project document: top-level sections `metamodels`, `models`,
// `nodes`, `viewpoints`, `log`, plus `format` and `nextId`. Metamodels nest
// packages, classifiers and features; models nest objects with their values.
json project_to_json(const State& state, const std::vector<Transaction>& log);
std::pair<State, std::vector<Transaction>> project_from_json(const json& doc);

// Stable text rendering of a document (sorted keys, two-space indent).
std::string canonical_text(const json& doc);

}  // namespace mwb
