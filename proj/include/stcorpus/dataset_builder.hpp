#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stcorpus/corpus_model.hpp"

namespace stcorpus {

struct Thresholds {
  double sigma_min = 0.6;
  double tau_min = 0.8;

  bool operator==(const Thresholds&) const = default;
};

struct FilterPolicy {
  double sigma_min = 0.6;
  double tau_min = 0.8;
  /// Keyed by the non-English language of a record's direction.
  std::map<LangCode, Thresholds> per_language_overrides;

  Thresholds thresholds_for(LangCode lang) const;
  /// Throws ConfigError unless sigma thresholds lie in [-1, 1] and tau thresholds in [0, 1].
  void validate() const;

  bool operator==(const FilterPolicy&) const = default;
};

/// JSON object {"hin": {"sigma_min": 0.7, "tau_min": 0.85}, ...}. A missing field falls back to
/// the policy default given here. Throws ConfigError.
std::map<LangCode, Thresholds> parse_overrides(std::string_view json_text, Thresholds defaults);
std::string format_overrides(const std::map<LangCode, Thresholds>& overrides);

struct FilterResult {
  Manifest kept;
  Manifest dropped;
};

/// kept: sigma >= sigma_min and tau >= tau_min. Records without scores pass unless their
/// provenance is mined, which throws ValidationError. Order is preserved on both sides.
FilterResult filter_manifest(const Manifest& m, const FilterPolicy& policy);

struct SampleSpec {
  double target_seconds = 1200.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless target_seconds > 0.
  void validate() const;
  bool operator==(const SampleSpec&) const = default;
};

struct GroupReport {
  Direction direction;
  std::size_t records = 0;
  std::size_t test_records = 0;
  double total_seconds = 0.0;
  double test_seconds = 0.0;
  bool saturated = false;  // whole group went to test
};

struct SampleResult {
  Manifest test;
  Manifest train;
  std::vector<GroupReport> groups;  // ordered by (source, target)
  std::vector<std::string> warnings;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Uniform integer in [0, bound) from a full-range 64-bit engine: draws below 2^64 mod bound are
/// rejected, the rest reduced modulo bound.
template <class Engine>
std::uint64_t bounded_draw(Engine& engine, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine();
    if (x >= threshold) return x % bound;
  }
}

/// Per (source_lang, target_lang) group: the group's records, in manifest order, are shuffled
/// with Fisher-Yates driven by std::mt19937_64 seeded with seed ^ fnv1a64("<src>-<tgt>"), then
/// taken until the cumulative duration reaches target_seconds (the record that crosses the
/// target is included). A group consumed entirely goes to test and is reported with a warning.
/// Both outputs keep manifest order.
SampleResult sample_test_set(const Manifest& m, const SampleSpec& spec);

std::string format_sample_report(const SampleResult& r);

/// Hours with two decimals, rounded half-to-even from exact microseconds.
std::string format_hours(std::int64_t micros);

struct StatsColumn {
  std::string direction;  // "en-xx" / "xx-en"
  Provenance provenance = Provenance::mined;
  Split split = Split::train;

  std::string label() const;
  auto operator<=>(const StatsColumn&) const = default;
};

struct StatsCell {
  std::int64_t micros = 0;
  std::size_t utterances = 0;

  StatsCell& operator+=(const StatsCell& o) {
    micros += o.micros;
    utterances += o.utterances;
    return *this;
  }
  bool operator==(const StatsCell&) const = default;
};

/// Languages by row, (direction, provenance, split) by column, with row and column totals.
struct StatsTable {
  std::vector<LangCode> languages;
  std::vector<StatsColumn> columns;
  std::vector<std::vector<StatsCell>> cells;  // [language][column]
  std::vector<StatsCell> row_totals;
  std::vector<StatsCell> column_totals;
  StatsCell grand_total;
};

StatsTable stats_report(std::span<const Manifest> manifests);
std::string stats_csv(const StatsTable& t);
std::string stats_text(const StatsTable& t);

}  // namespace stcorpus
