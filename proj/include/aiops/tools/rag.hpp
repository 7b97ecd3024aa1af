#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace aiops::tools {

struct DocChunk {
  std::string id;  // <file stem>#<index>
  std::string text;
  std::map<std::string, int> tf;
};

struct ScoredChunk {
  const DocChunk* chunk = nullptr;
  double score = 0.0;
};

/// Lowercased runs of [a-z0-9].
std::vector<std::string> tokenize(std::string_view text);

/// Cosine similarity of two term-frequency vectors; 0 when either is empty.
double tf_cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b);

/// Markdown documents split at heading lines. Each heading starts a new chunk
/// holding the heading and its body.
class RagCorpus {
 public:
  RagCorpus() = default;

  void add_document(std::string_view name, std::string_view markdown);
  const std::vector<DocChunk>& chunks() const { return chunks_; }
  bool empty() const { return chunks_.empty(); }

  /// Top-k chunks by score, ties broken by chunk id. k is clamped to the
  /// corpus size.
  std::vector<ScoredChunk> search(std::string_view query, int k) const;

 private:
  std::vector<DocChunk> chunks_;
};

/// Corpus built from the bundled rag/*.md resources.
const RagCorpus& builtin_corpus();

struct RagRender {
  std::string content;
  bool low_confidence = false;
};

RagRender render(const std::vector<ScoredChunk>& hits);

}  // namespace aiops::tools
