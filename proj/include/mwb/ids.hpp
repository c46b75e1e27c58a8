#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace mwb {

// Opaque element identity. Printed as "#<n>"; zero is the null id.
struct ElementId {
  std::uint64_t value = 0;

  auto operator<=>(const ElementId&) const = default;
  explicit operator bool() const { return value != 0; }

  std::string str() const { return "#" + std::to_string(value); }

  static std::optional<ElementId> parse(std::string_view text) {
    if (text.size() < 2 || text.front() != '#') return std::nullopt;
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || v == 0) return std::nullopt;
    return ElementId{v};
  }
};

using TxId = std::uint64_t;

}  // namespace mwb

template <>
struct std::hash<mwb::ElementId> {
  std::size_t operator()(const mwb::ElementId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
