#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "stcorpus/bitext_dp.hpp"
#include "stcorpus/dataset_builder.hpp"
#include "stcorpus/llm_client.hpp"
#include "stcorpus/vad_chunker.hpp"

namespace stcorpus {

enum class MiningMode { greedy, dp };
std::string_view to_string(MiningMode m);
MiningMode parse_mining_mode(std::string_view s);

std::string_view to_string(LlmMode m);
LlmMode parse_llm_mode(std::string_view s);

/// Everything a pipeline run needs.
///
/// File format: "key = value" lines, '#' starts a comment line, blank lines ignored, unknown keys
/// rejected. format_config writes every key, so parse(format(c)) == c.
///
///   input_dir, work_dir, noise_patterns          paths (noise_patterns may be empty)
///   vad.on_threshold, vad.off_threshold, vad.min_speech_s, vad.min_silence_s, vad.pad_s,
///   vad.max_chunk_s
///   filter.sigma_min, filter.tau_min, filter.overrides (path, may be empty)
///   sample.target_seconds, sample.seed
///   mining.mode (greedy|dp), mining.skip_penalty
///   llm.mode (service|fallback)
///   histogram.bins, jobs (0 = all cores), strict (true|false)
///   chrf.hyp, chrf.ref                           paths for the chrf stage (may be empty)
struct PipelineConfig {
  std::filesystem::path input_dir = "input";
  std::filesystem::path work_dir = "work";
  std::filesystem::path noise_patterns;
  VadConfig vad;
  double sigma_min = 0.6;
  double tau_min = 0.8;
  std::filesystem::path overrides;
  SampleSpec sample;
  MiningMode mining_mode = MiningMode::greedy;
  double skip_penalty = kDefaultSkipPenalty;
  LlmMode llm_mode = LlmMode::fallback;
  std::size_t histogram_bins = 20;
  unsigned jobs = 0;
  bool strict = false;
  std::filesystem::path chrf_hyp;
  std::filesystem::path chrf_ref;

  /// Value checks only. Throws ConfigError.
  void validate() const;
  /// Thresholds with the overrides file applied. Throws MissingInputError or ConfigError.
  FilterPolicy filter_policy() const;
  unsigned worker_count() const;

  bool operator==(const PipelineConfig&) const = default;
};

/// Throws ConfigError naming the line.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string format_config(const PipelineConfig& cfg);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace stcorpus
