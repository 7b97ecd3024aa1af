#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Files under resources/ compiled into the library.
namespace aiops::resources {

std::optional<std::string_view> find(std::string_view name);

// Names of all bundled resources starting with `prefix`, in build order.
std::vector<std::string_view> list(std::string_view prefix);

inline std::string_view require(std::string_view name) {
  if (auto found = find(name)) return *found;
  throw std::runtime_error("missing bundled resource: " + std::string(name));
}

}  // namespace aiops::resources
