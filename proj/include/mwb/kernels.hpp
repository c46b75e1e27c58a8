#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "mwb/value.hpp"

namespace mwb {

enum class ExecPolicy : std::uint8_t { Serial, Parallel };

// Runs fn(i) for every i in [0, n). With Parallel the iterations are spread
// over OpenMP threads (serial when built without OpenMP). If any iteration
// throws, the exception of the lowest index is rethrown after the loop.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn, ExecPolicy policy);

// Number of threads a Parallel loop would use.
int parallel_width();

// Evaluates `query` with `data` bound to each object of `model` in turn.
// Boolean results select the object itself; other non-null results are
// collected as they are. An optional class name restricts the objects to
// instances of that class (or its subclasses). Errors carry the object id.
std::vector<Value> execute_query(const State& state, std::string_view query, ElementId model,
                                 ExecPolicy policy = ExecPolicy::Parallel,
                                 std::optional<std::string_view> class_name = std::nullopt);

}  // namespace mwb
