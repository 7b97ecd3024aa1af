#include "aiops/tools/rag.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "aiops/resources.hpp"
#include "aiops/util/text.hpp"

namespace aiops::tools {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

std::map<std::string, int> term_frequencies(std::string_view text) {
  std::map<std::string, int> tf;
  for (auto& t : tokenize(text)) ++tf[t];
  return tf;
}

}  // namespace

double tf_cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [term, n] : a) {
    na += double(n) * n;
    if (auto it = b.find(term); it != b.end()) dot += double(n) * it->second;
  }
  for (const auto& [term, n] : b) nb += double(n) * n;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

void RagCorpus::add_document(std::string_view name, std::string_view markdown) {
  const auto stem = std::filesystem::path(std::string(name)).stem().string();
  std::vector<std::string> bodies;
  for (auto line : text::split_lines(markdown)) {
    if (bodies.empty() || text::starts_with(line, "#")) {
      if (bodies.empty() || !text::trim(bodies.back()).empty()) bodies.emplace_back();
    }
    bodies.back() += line;
    bodies.back() += '\n';
  }
  int index = 0;
  for (auto& body : bodies) {
    auto trimmed = std::string(text::trim(body));
    if (trimmed.empty()) continue;
    DocChunk chunk;
    chunk.id = stem + "#" + std::to_string(index++);
    chunk.tf = term_frequencies(trimmed);
    chunk.text = std::move(trimmed);
    chunks_.push_back(std::move(chunk));
  }
}

std::vector<ScoredChunk> RagCorpus::search(std::string_view query, int k) const {
  const auto q = term_frequencies(query);
  std::vector<ScoredChunk> scored;
  scored.reserve(chunks_.size());
  for (const auto& c : chunks_) scored.push_back({&c, tf_cosine(q, c.tf)});
  std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.chunk->id < b.chunk->id;
  });
  const auto n = static_cast<std::size_t>(std::clamp(k, 0, static_cast<int>(scored.size())));
  scored.resize(n);
  return scored;
}

const RagCorpus& builtin_corpus() {
  static const RagCorpus corpus = [] {
    RagCorpus c;
    for (auto name : resources::list("rag/")) c.add_document(name, resources::require(name));
    return c;
  }();
  return corpus;
}

RagRender render(const std::vector<ScoredChunk>& hits) {
  RagRender out;
  out.low_confidence = std::all_of(hits.begin(), hits.end(), [](const ScoredChunk& h) { return h.score == 0.0; });
  if (out.low_confidence) out.content = "low confidence: no query term matched the documentation\n";
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (i) out.content += "\n";
    out.content += "[" + hits[i].chunk->id + " score=" + text::fixed(hits[i].score, 4) + "]\n" + hits[i].chunk->text + "\n";
  }
  while (!out.content.empty() && out.content.back() == '\n') out.content.pop_back();
  return out;
}

}  // namespace aiops::tools
