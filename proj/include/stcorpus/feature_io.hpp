#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stcorpus {

enum class FeatureKind : std::uint8_t { logits = 0, embeddings = 1, vad_probs = 2 };
std::string_view to_string(FeatureKind k);

/// Row-major float matrix produced by the feature-extraction adapter.
///
/// logits: every row is a log-probability vector (|logsumexp| <= 1e-3).
/// vad_probs: one column, values in [0, 1].
/// embeddings: frame_seconds is 0.
struct FeatureMatrix {
  FeatureKind kind = FeatureKind::embeddings;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  float frame_seconds = 0.0f;
  std::vector<float> data;

  std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  /// Throws ValidationError.
  void validate() const;

  bool operator==(const FeatureMatrix&) const = default;
};

inline constexpr std::size_t kFeatureHeaderBytes = 17;
inline constexpr double kLogSumExpTolerance = 1e-3;

/// "BAF1" magic, kind byte, rows u32 LE, cols u32 LE, frame_seconds f32 LE, data f32 LE.
std::string encode_features(const FeatureMatrix& m);
FeatureMatrix decode_features(std::string_view bytes);

void write_features(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_features(const std::filesystem::path& path);

/// Conventional file name for a document's feature file: <doc_id>.<kind>.baf.
std::string feature_file_name(std::string_view doc_id, std::string_view kind);

/// CTC output vocabulary.
class TokenVocab {
 public:
  TokenVocab(std::vector<std::string> tokens, std::size_t blank_index,
             std::optional<std::string> word_delimiter = std::nullopt);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  std::size_t blank_index() const { return blank_; }
  /// Token emitted between words, if the vocabulary has one.
  std::optional<std::size_t> word_delimiter() const { return delimiter_; }
  std::optional<std::size_t> find(std::string_view token) const;
  const std::string& token(std::size_t i) const { return tokens_.at(i); }

 private:
  std::vector<std::string> tokens_;
  std::size_t blank_;
  std::optional<std::size_t> delimiter_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// JSON: {"tokens": [...], "blank_index": n, "word_delimiter": "|"?}
TokenVocab parse_vocab(std::string_view json_text);
TokenVocab read_vocab(const std::filesystem::path& path);

}  // namespace stcorpus
