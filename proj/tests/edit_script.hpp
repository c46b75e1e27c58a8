#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mwb/edits.hpp"
#include "mwb/reflect.hpp"

namespace mwb::test {

// Random model edits over an ERD-shaped model: renames, layout and state
// changes, new and deleted attributes, key flags, type changes, and the odd
// metamodel change. Edits may throw when their target is gone by the time
// they run.
class EditGenerator {
 public:
  EditGenerator(ElementId model, std::uint64_t seed) : model_(model), gen_(seed) {}

  std::function<void(Draft&)> next(const State& st) {
    std::vector<ElementId> entities, attributes;
    for (ElementId o : model_objects(st, model_)) {
      const std::string cls = class_name_of(st, o);
      if (cls == "Entity") entities.push_back(o);
      if (cls == "Attribute") attributes.push_back(o);
    }
    const int kind = pick(0, 9);
    const int serial = counter_++;
    if (entities.empty() || kind == 0) {
      const std::string name = "T" + std::to_string(serial);
      const ElementId model = model_;
      return [model, name](Draft& d) { add_object(d, model, "Entity", {{"name", name}}); };
    }
    const ElementId entity = entities[pick(0, static_cast<int>(entities.size()) - 1)];
    const ElementId attribute =
        attributes.empty() ? ElementId{} : attributes[pick(0, static_cast<int>(attributes.size()) - 1)];
    const double x = pick(0, 400) * 2.5, y = pick(0, 400) * 2.5;
    switch (kind) {
      case 1:
        return [entity, serial](Draft& d) { set_feature(d, entity, "name", {Scalar("E" + std::to_string(serial))}); };
      case 2:
        return [entity, x, y](Draft& d) { set_layout(d, entity, x, y, 180, 150); };
      case 3: {
        const ElementId model = model_;
        return [model, entity, serial](Draft& d) {
          ElementId a = add_object(d, model, "Attribute", {{"name", "c" + std::to_string(serial)}, {"type", "String"}});
          mutate_feature(d, entity, "ownedAttributes", FeatureEdit{EditKind::Insert, {Scalar(a)}, std::nullopt});
        };
      }
      case 4:
        if (!attribute) break;
        return [attribute](Draft& d) { delete_element(d, attribute); };
      case 5:
        if (!attribute) break;
        return [attribute, serial](Draft& d) { set_feature(d, attribute, "isPK", {Scalar(serial % 2 == 0)}); };
      case 6:
        if (!attribute) break;
        return [attribute, serial](Draft& d) {
          static const char* types[] = {"Integer", "String", "Boolean", "Date"};
          set_feature(d, attribute, "type", {Scalar(std::string(types[serial % 4]))});
        };
      case 7:
        return [entity, serial](Draft& d) { set_state(d, entity, "note", serial); };
      case 8: {
        const ElementId model = model_;
        return [model, serial](Draft& d) {
          const State& s = d.state();
          ElementId mm = metamodel_of(s, model);
          ElementId cls = *find_classifier(s, mm, "Entity");
          const DClass& c = s.get_as<DClass>(cls);
          if (c.attributes.size() > 1 && serial % 2) {
            co_evolve(d, meta_edit::RemoveFeature{c.attributes.back()});
          } else {
            co_evolve(d, meta_edit::AddAttribute{cls, "m" + std::to_string(serial),
                                                 AttributeType::of(PrimitiveKind::Integer), 0, 1,
                                                 Scalar(std::int64_t{serial})});
          }
        };
      }
      default:
        break;
    }
    return [entity, x, y](Draft& d) { set_position(d, entity, x, y); };
  }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

 private:
  ElementId model_;
  std::mt19937_64 gen_;
  int counter_ = 0;
};

}  // namespace mwb::test
