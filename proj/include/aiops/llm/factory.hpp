#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "aiops/llm/backend.hpp"
#include "aiops/llm/http_backend.hpp"

namespace aiops::llm {

/// Endpoint list from YAML, either a bare sequence or a map with a
/// `backends` sequence. Entries without `base_url` are skipped (they name
/// scripted backends). Throws std::invalid_argument on malformed entries.
std::vector<EndpointConfig> parse_endpoints(std::string_view yaml_text);

/// Scripted ids build a ScriptedBackend; anything else must name an endpoint.
/// Throws std::invalid_argument for unknown ids.
std::shared_ptr<CompletionBackend> make_backend(std::string_view id, const std::vector<EndpointConfig>& endpoints);

}  // namespace aiops::llm
