#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stcorpus/lang.hpp"

namespace stcorpus {

inline constexpr int kSampleRateHz = 16000;

/// Seconds are kept at microsecond resolution throughout.
double quantize_seconds(double seconds);
std::int64_t to_micros(double seconds);

struct DocumentRef {
  std::string doc_id;
  std::string audio_path;
  double audio_seconds = 0.0;
  int sample_rate_hz = kSampleRateHz;

  bool operator==(const DocumentRef&) const = default;
};

struct QualityScores {
  double sigma = 0.0;  // cosine mining score, [-1, 1]
  double tau = 0.0;    // normalized edit similarity, [0, 1]

  bool operator==(const QualityScores&) const = default;
};

enum class Provenance { existing, mined, synthetic };
std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

struct UtteranceRecord {
  DocumentRef doc;
  Direction direction;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string source_text;
  std::string target_text;
  std::optional<QualityScores> scores;
  Provenance provenance = Provenance::mined;

  double duration() const { return end_s - start_s; }
  /// Throws ValidationError naming the first violated field.
  void validate() const;

  bool operator==(const UtteranceRecord&) const = default;
};

enum class Split { train, test };
std::string_view to_string(Split s);

struct Manifest {
  Split split = Split::train;
  std::vector<UtteranceRecord> records;
  /// 1-based source line per record when read from a file; empty for manifests built in memory.
  std::vector<std::size_t> source_lines;

  bool operator==(const Manifest& o) const { return split == o.split && records == o.records; }
};

/// Exact sum of record durations, in microseconds.
std::int64_t manifest_duration_us(const Manifest& m);
double manifest_duration(const Manifest& m);

/// JSONL. Key order: doc_id, audio_path, audio_seconds, sample_rate_hz, src_lang, tgt_lang,
/// start_s, end_s, source_text, target_text, sigma?, tau?, provenance.
Manifest read_manifest(const std::filesystem::path& path, Split split = Split::train);
Manifest parse_manifest(std::string_view text, Split split = Split::train);
void write_manifest(const Manifest& m, const std::filesystem::path& path);
std::string format_manifest(const Manifest& m);

}  // namespace stcorpus
