#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "aiops/eval/harness.hpp"
#include "aiops/util/text.hpp"

namespace aiops::eval {

std::string format_accuracy(double pct) {
  const double rounded = std::round(pct * 10.0) / 10.0;
  if (rounded == std::floor(rounded)) return std::to_string(static_cast<long long>(rounded));
  return text::fixed(rounded, 1);
}

std::string format_seconds(double s) { return text::fixed(s, 3); }

std::string format_tokens(double t) { return text::fixed(t, 1); }

std::set<ReportFormat> parse_report_formats(std::string_view list) {
  std::set<ReportFormat> out;
  std::string item;
  const auto flush = [&] {
    const auto name = text::to_lower(text::trim(item));
    item.clear();
    if (name.empty()) return;
    if (name == "csv") out.insert(ReportFormat::Csv);
    else if (name == "markdown" || name == "md") out.insert(ReportFormat::Markdown);
    else if (name == "json") out.insert(ReportFormat::Json);
    else throw std::invalid_argument("unknown report format '" + name + "'");
  };
  for (char c : list) {
    if (c == ',') flush();
    else item += c;
  }
  flush();
  if (out.empty()) throw std::invalid_argument("no report format given");
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string token_source(const BenchmarkReport& r, const std::string& backend) {
  const auto it = r.tokens_approximated.find(backend);
  return it != r.tokens_approximated.end() && it->second ? "approximated" : "provider_reported";
}

std::string annotations(const BenchmarkReport& r, const std::string& query) {
  std::string out;
  for (const auto& b : r.backend_ids) {
    const auto* c = r.cell(query, b);
    if (!c || c->annotation.empty()) continue;
    if (!out.empty()) out += "; ";
    out += b + ": " + c->annotation;
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

using CellValue = std::string (*)(const ReportCell&);

Table accuracy_table(const BenchmarkReport& r, bool percent_sign) {
  Table t;
  t.header.push_back("Query No.");
  for (const auto& b : r.backend_ids) t.header.push_back(b);
  t.header.push_back("note");
  for (const auto& q : r.query_ids) {
    std::vector<std::string> row{q};
    for (const auto& b : r.backend_ids) {
      const auto* c = r.cell(q, b);
      row.push_back(c ? format_accuracy(c->accuracy_pct) + (percent_sign ? "%" : "") : "");
    }
    row.push_back(annotations(r, q));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table latency_table(const BenchmarkReport& r) {
  Table t;
  t.header = {"Query No.", "Metric"};
  for (const auto& b : r.backend_ids) t.header.push_back(b);
  const std::pair<const char*, double LatencySummary::*> metrics[] = {
      {"P-50", &LatencySummary::p50_s}, {"P-90", &LatencySummary::p90_s}, {"Max", &LatencySummary::max_s}};
  for (const auto& q : r.query_ids) {
    for (const auto& [name, field] : metrics) {
      std::vector<std::string> row{q, name};
      for (const auto& b : r.backend_ids) {
        const auto* c = r.cell(q, b);
        row.push_back(c ? format_seconds(c->latency.*field) : "");
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

Table token_table(const BenchmarkReport& r) {
  Table t;
  t.header.push_back("Query No.");
  for (const auto& b : r.backend_ids) t.header.push_back(b + " (" + token_source(r, b) + ")");
  for (const auto& q : r.query_ids) {
    std::vector<std::string> row{q};
    for (const auto& b : r.backend_ids) {
      const auto* c = r.cell(q, b);
      row.push_back(c ? format_tokens(c->avg_tokens) : "");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string to_csv(const Table& t) {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
  return out;
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

std::string to_markdown(const Table& t) {
  std::string out = "|";
  for (const auto& h : t.header) out += " " + md_cell(h) + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) out += " --- |";
  out += '\n';
  for (const auto& row : t.rows) {
    out += "|";
    for (const auto& c : row) out += " " + md_cell(c) + " |";
    out += '\n';
  }
  return out;
}

std::string rollup_markdown(const BenchmarkReport& r, const std::string& title,
                            const std::function<std::string(const CategoryRollup&)>& value) {
  Table t;
  t.header.push_back("Category");
  for (const auto& b : r.backend_ids) t.header.push_back(b);
  for (auto cat : {Category::SR, Category::AR}) {
    std::vector<std::string> row{to_string(cat) + " avg"};
    bool any = false;
    for (const auto& b : r.backend_ids) {
      const auto bit = r.rollups.find(b);
      const CategoryRollup* roll = nullptr;
      if (bit != r.rollups.end()) {
        const auto cit = bit->second.find(cat);
        if (cit != bit->second.end()) roll = &cit->second;
      }
      any = any || roll;
      row.push_back(roll ? value(*roll) : "");
    }
    if (any) t.rows.push_back(std::move(row));
  }
  return "\n### " + title + "\n\n" + to_markdown(t);
}

nlohmann::json to_json(const BenchmarkReport& r, const std::string& which) {
  nlohmann::json j;
  j["queries"] = r.query_ids;
  j["backends"] = r.backend_ids;
  nlohmann::json sources = nlohmann::json::object();
  for (const auto& b : r.backend_ids) sources[b] = token_source(r, b);
  if (which == "rq3") j["token_source"] = sources;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json e{{"query_id", c.query_id}, {"backend_id", c.backend_id}};
    if (which == "rq1") {
      e["repetitions"] = c.repetitions;
      e["successes"] = c.successes;
      e["accuracy_pct"] = c.accuracy_pct;
      e["annotation"] = c.annotation;
    } else if (which == "rq2") {
      e["p50_s"] = c.latency.p50_s;
      e["p90_s"] = c.latency.p90_s;
      e["max_s"] = c.latency.max_s;
    } else {
      e["avg_tokens"] = c.avg_tokens;
    }
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  nlohmann::json rollups = nlohmann::json::object();
  for (const auto& [b, cats] : r.rollups) {
    for (const auto& [cat, roll] : cats) {
      nlohmann::json e{{"queries", roll.queries}};
      if (which == "rq1") e["accuracy_pct"] = roll.accuracy_pct;
      else if (which == "rq2") e.update({{"p50_s", roll.p50_s}, {"p90_s", roll.p90_s}, {"max_s", roll.max_s}});
      else e["avg_tokens"] = roll.avg_tokens;
      rollups[b][to_string(cat)] = std::move(e);
    }
  }
  j["rollups"] = std::move(rollups);
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> emit_reports(const BenchmarkReport& report, const std::filesystem::path& out_dir,
                                                const std::set<ReportFormat>& formats) {
  if (report.cells.empty()) throw std::invalid_argument("report is empty");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw std::runtime_error("cannot create " + out_dir.string());

  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    write_file(path, content);
    written.push_back(path);
  };
  const auto pct = [](const CategoryRollup& r) { return format_accuracy(r.accuracy_pct) + "%"; };
  const auto secs = [](const CategoryRollup& r) {
    return format_seconds(r.p50_s) + " / " + format_seconds(r.p90_s) + " / " + format_seconds(r.max_s);
  };
  const auto toks = [](const CategoryRollup& r) { return format_tokens(r.avg_tokens); };

  for (auto f : formats) {
    switch (f) {
      case ReportFormat::Csv:
        emit("rq1_accuracy.csv", to_csv(accuracy_table(report, false)));
        emit("rq2_latency.csv", to_csv(latency_table(report)));
        emit("rq3_tokens.csv", to_csv(token_table(report)));
        break;
      case ReportFormat::Markdown:
        emit("rq1_accuracy.md", "## Task accuracy\n\n" + to_markdown(accuracy_table(report, true)) +
                                    rollup_markdown(report, "Category averages", pct));
        emit("rq2_latency.md", "## Response times (seconds)\n\n" + to_markdown(latency_table(report)) +
                                   rollup_markdown(report, "Category averages (P-50 / P-90 / Max)", secs));
        emit("rq3_tokens.md", "## Average token count\n\n" + to_markdown(token_table(report)) +
                                  rollup_markdown(report, "Category averages", toks));
        break;
      case ReportFormat::Json:
        emit("rq1_accuracy.json", to_json(report, "rq1").dump(2) + "\n");
        emit("rq2_latency.json", to_json(report, "rq2").dump(2) + "\n");
        emit("rq3_tokens.json", to_json(report, "rq3").dump(2) + "\n");
        break;
    }
  }
  return written;
}

}  // namespace aiops::eval
