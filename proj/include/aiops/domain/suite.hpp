#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aiops/domain/types.hpp"

namespace aiops {

class SuiteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The 25-query evaluation suite with its validators.
const std::vector<QueryCase>& builtin_suite();

/// Parses a suite document: a YAML list of {id, category, expected_tools,
/// text, validator}. Checks the QueryCase invariants.
std::vector<QueryCase> load_suite(std::string_view source);
std::vector<QueryCase> load_suite_file(const std::filesystem::path& path);

std::string serialize_suite(const std::vector<QueryCase>& suite);

/// Throws SuiteError when ids repeat or a category/tool-count invariant fails.
void validate_suite(const std::vector<QueryCase>& suite);

const QueryCase* find_query(const std::vector<QueryCase>& suite, std::string_view id);

}  // namespace aiops
