#pragma once

#include <random>
#include <string>

#include "mwb/eval.hpp"
#include "mwb/fixtures.hpp"
#include "mwb/reflect.hpp"
#include "mwb/render.hpp"

namespace mwb::test {

inline Value eval_on(const State& st, ElementId id, const std::string& source) {
  return evaluate(source, EvalContext::for_element(st, id));
}

inline std::string show_in_view(const State& st, ElementId id, ElementId viewpoint, const std::string& source) {
  return format_value(st, evaluate(source, view_context(st, id, viewpoint)));
}

inline std::string show_on(const State& st, ElementId id, const std::string& source) {
  return format_value(st, eval_on(st, id, source));
}

inline double val_of(const State& st, ElementId object) {
  return std::get<double>(value_of(st, object, "val")->values.at(0));
}

// Seeded generator shared by the property tests.
inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace mwb::test
