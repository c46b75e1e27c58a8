#include "mwb/kernels.hpp"

#include <exception>

#include "mwb/eval.hpp"
#include "mwb/reflect.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mwb {

int parallel_width() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn, ExecPolicy policy) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<Value> execute_query(const State& state, std::string_view query, ElementId model, ExecPolicy policy,
                                 std::optional<std::string_view> class_name) {
  const DModel& m = state.get_as<DModel>(model);
  ExprPtr expr = parse_expression(query);
  std::vector<ElementId> objects = model_objects(state, model);
  if (class_name) {
    ElementId mm = m.is_metamodel ? m.id : m.conforms_to;
    auto cls = find_classifier(state, mm, *class_name);
    if (!cls) fail(ErrorCode::NotFound, "no class " + std::string(*class_name));
    std::erase_if(objects, [&](ElementId o) { return !is_subclass_of(state, state.get_as<DObject>(o).instance_of, *cls); });
  }
  std::vector<Value> results(objects.size());
  for_each_index(
      objects.size(),
      [&](std::size_t i) {
        EvalContext ctx = EvalContext::for_element(state, objects[i]);
        try {
          Value v = evaluate(*expr, ctx);
          if (const bool* b = v.as<bool>()) {
            results[i] = *b ? Value(objects[i]) : Value();
          } else {
            results[i] = std::move(v);
          }
        } catch (const Error& e) {
          throw Error(e.code(), e.message() + " (at " + objects[i].str() + ")", e.pos(), e.path());
        }
      },
      policy);
  std::vector<Value> out;
  for (Value& v : results) {
    if (!v.is_null()) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace mwb
