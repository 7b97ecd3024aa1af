#include "aiops/domain/suite.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "aiops/resources.hpp"

namespace aiops {
namespace {

std::string where_of(const YAML::Node& node, const std::string& what) {
  const auto mark = node.Mark();
  if (mark.is_null()) return what;
  return what + " (line " + std::to_string(mark.line + 1) + ")";
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& what) {
  std::vector<std::string> out;
  if (!node || node.IsNull()) return out;
  if (!node.IsSequence()) throw SuiteError(where_of(node, what) + " must be a list");
  for (const auto& item : node) out.push_back(item.as<std::string>());
  return out;
}

std::set<ToolId> tool_set(const YAML::Node& node, const std::string& what) {
  std::set<ToolId> out;
  for (const auto& t : string_list(node, what)) {
    try {
      out.insert(parse_tool_id(t));
    } catch (const std::invalid_argument& e) {
      throw SuiteError(where_of(node, what) + ": " + e.what());
    }
  }
  return out;
}

void check_regex(const std::string& pattern, const std::string& what) {
  try {
    std::regex re(pattern);
  } catch (const std::regex_error& e) {
    throw SuiteError(what + ": invalid regex '" + pattern + "': " + e.what());
  }
}

ValidatorSpec parse_validator(const YAML::Node& node, const std::string& what) {
  ValidatorSpec v;
  if (!node || node.IsNull()) return v;
  if (!node.IsMap()) throw SuiteError(where_of(node, what) + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto& val = kv.second;
    if (key == "required_substrings") {
      v.required_substrings = string_list(val, what + ".required_substrings");
    } else if (key == "answer_regex") {
      v.answer_regex = val.as<std::string>();
      check_regex(*v.answer_regex, what + ".answer_regex");
    } else if (key == "answer_lines_regex") {
      v.answer_lines_regex = val.as<std::string>();
      check_regex(*v.answer_lines_regex, what + ".answer_lines_regex");
    } else if (key == "required_tools") {
      v.required_tools = tool_set(val, what + ".required_tools");
    } else if (key == "ordering") {
      if (!val.IsSequence()) throw SuiteError(where_of(val, what + ".ordering") + " must be a list of pairs");
      for (const auto& pair : val) {
        if (!pair.IsSequence() || pair.size() != 2) {
          throw SuiteError(where_of(pair, what + ".ordering") + " entries must be [before, after]");
        }
        try {
          v.ordering.emplace_back(parse_tool_id(pair[0].as<std::string>()), parse_tool_id(pair[1].as<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw SuiteError(where_of(pair, what + ".ordering") + ": " + e.what());
        }
      }
    } else if (key == "artifact_checks") {
      if (!val.IsSequence()) throw SuiteError(where_of(val, what + ".artifact_checks") + " must be a list");
      for (const auto& c : val) {
        ArtifactCheck check;
        if (!c["filename_regex"]) throw SuiteError(where_of(c, what + ".artifact_checks") + " needs filename_regex");
        check.filename_regex = c["filename_regex"].as<std::string>();
        check_regex(check.filename_regex, what + ".artifact_checks");
        if (c["must_exist"]) check.must_exist = c["must_exist"].as<bool>();
        v.artifact_checks.push_back(std::move(check));
      }
    } else if (key == "expect_failure") {
      v.expect_failure = val.as<bool>();
    } else {
      throw SuiteError(where_of(kv.first, what) + ": unknown validator key '" + key + "'");
    }
  }
  return v;
}

}  // namespace

void validate_suite(const std::vector<QueryCase>& suite) {
  std::set<std::string> ids;
  for (const auto& q : suite) {
    if (q.id.empty()) throw SuiteError("query with empty id");
    if (!ids.insert(q.id).second) throw SuiteError("duplicate query id '" + q.id + "'");
    if (q.text.empty()) throw SuiteError(q.id + ": empty query text");
    if (q.category == Category::AR && q.expected_tools.size() < 2) {
      throw SuiteError(q.id + ": AR queries need at least two expected tools");
    }
    if (q.category == Category::SR && q.expected_tools.size() > 1) {
      throw SuiteError(q.id + ": SR queries use at most one tool");
    }
    if (!q.validator.expect_failure && !q.validator.has_checks()) {
      throw SuiteError(q.id + ": validator has no checks");
    }
  }
}

std::vector<QueryCase> load_suite(std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(source));
  } catch (const YAML::ParserException& e) {
    throw SuiteError("suite syntax error at line " + std::to_string(e.mark.line + 1) + ", column " +
                     std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsSequence()) throw SuiteError("suite document must be a list of queries");
  std::vector<QueryCase> suite;
  try {
    for (const auto& node : root) {
      if (!node.IsMap()) throw SuiteError(where_of(node, "suite entry") + " must be a mapping");
      QueryCase q;
      for (const char* key : {"id", "category", "text"}) {
        if (!node[key]) throw SuiteError(where_of(node, "suite entry") + " is missing '" + key + "'");
      }
      q.id = node["id"].as<std::string>();
      const auto what = "query " + q.id;
      try {
        q.category = parse_category(node["category"].as<std::string>());
      } catch (const std::invalid_argument& e) {
        throw SuiteError(what + ": " + e.what());
      }
      q.expected_tools = tool_set(node["expected_tools"], what + ".expected_tools");
      q.text = node["text"].as<std::string>();
      q.validator = parse_validator(node["validator"], what + ".validator");
      for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (key != "id" && key != "category" && key != "expected_tools" && key != "text" && key != "validator") {
          throw SuiteError(where_of(kv.first, what) + ": unknown key '" + key + "'");
        }
      }
      suite.push_back(std::move(q));
    }
  } catch (const YAML::Exception& e) {
    throw SuiteError("suite error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  validate_suite(suite);
  return suite;
}

std::vector<QueryCase> load_suite_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SuiteError("cannot open suite file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_suite(ss.str());
}

const std::vector<QueryCase>& builtin_suite() {
  static const std::vector<QueryCase> suite = load_suite(resources::require("suites/builtin.yaml"));
  return suite;
}

std::string serialize_suite(const std::vector<QueryCase>& suite) {
  YAML::Emitter out;
  auto tools = [&](const auto& set) {
    out << YAML::Flow << YAML::BeginSeq;
    for (auto t : set) out << to_string(t);
    out << YAML::EndSeq;
  };
  out << YAML::BeginSeq;
  for (const auto& q : suite) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << q.id;
    out << YAML::Key << "category" << YAML::Value << to_string(q.category);
    out << YAML::Key << "expected_tools" << YAML::Value;
    tools(q.expected_tools);
    out << YAML::Key << "text" << YAML::Value << YAML::DoubleQuoted << q.text;
    const auto& v = q.validator;
    out << YAML::Key << "validator" << YAML::Value << YAML::BeginMap;
    if (!v.required_substrings.empty()) {
      out << YAML::Key << "required_substrings" << YAML::Value << YAML::BeginSeq;
      for (const auto& s : v.required_substrings) out << YAML::DoubleQuoted << s;
      out << YAML::EndSeq;
    }
    if (v.answer_regex) out << YAML::Key << "answer_regex" << YAML::Value << YAML::DoubleQuoted << *v.answer_regex;
    if (v.answer_lines_regex) {
      out << YAML::Key << "answer_lines_regex" << YAML::Value << YAML::DoubleQuoted << *v.answer_lines_regex;
    }
    if (!v.required_tools.empty()) {
      out << YAML::Key << "required_tools" << YAML::Value;
      tools(v.required_tools);
    }
    if (!v.ordering.empty()) {
      out << YAML::Key << "ordering" << YAML::Value << YAML::BeginSeq;
      for (const auto& [a, b] : v.ordering) {
        out << YAML::Flow << YAML::BeginSeq << to_string(a) << to_string(b) << YAML::EndSeq;
      }
      out << YAML::EndSeq;
    }
    if (!v.artifact_checks.empty()) {
      out << YAML::Key << "artifact_checks" << YAML::Value << YAML::BeginSeq;
      for (const auto& c : v.artifact_checks) {
        out << YAML::BeginMap << YAML::Key << "filename_regex" << YAML::Value << YAML::DoubleQuoted
            << c.filename_regex << YAML::Key << "must_exist" << YAML::Value << c.must_exist << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    out << YAML::Key << "expect_failure" << YAML::Value << v.expect_failure;
    out << YAML::EndMap << YAML::EndMap;
  }
  out << YAML::EndSeq;
  return std::string(out.c_str()) + "\n";
}

const QueryCase* find_query(const std::vector<QueryCase>& suite, std::string_view id) {
  for (const auto& q : suite) {
    if (q.id == id) return &q;
  }
  return nullptr;
}

}  // namespace aiops
