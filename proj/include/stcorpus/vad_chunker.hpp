#pragma once

#include <cstdint>
#include <vector>

#include "stcorpus/feature_io.hpp"

namespace stcorpus {

struct SpeechSpan {
  double start_s = 0.0;
  double end_s = 0.0;

  double duration() const { return end_s - start_s; }
  bool operator==(const SpeechSpan&) const = default;
};

struct VadConfig {
  double on_threshold = 0.5;
  double off_threshold = 0.35;
  double min_speech_s = 0.25;
  double min_silence_s = 0.10;
  double pad_s = 0.05;
  double max_chunk_s = 30.0;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const VadConfig&) const = default;
};

/// Two-threshold hysteresis over per-frame speech probabilities.
///
/// A span opens at the first frame with p >= on_threshold and closes once p < off_threshold has
/// held for min_silence_s. Spans shorter than min_speech_s are dropped, the rest padded by pad_s
/// (clipped to the audio) and merged when they touch. Spans longer than max_chunk_s are cut at the
/// lowest-probability frame boundary in their middle third, recursively. Boundaries are in seconds,
/// rounded to the microsecond.
std::vector<SpeechSpan> detect_speech(const FeatureMatrix& probs, const VadConfig& cfg);

struct LogitSlice {
  FeatureMatrix logits;
  std::uint32_t start_frame = 0;
};

/// Inclusive frame range floor(start/frame) .. ceil(end/frame), the end clamped to the last frame.
/// Frame positions within 1e-4 frames of an integer snap to it. Throws PreconditionError for spans
/// outside [0, rows * frame_seconds].
std::pair<std::uint32_t, std::uint32_t> span_frames(const SpeechSpan& span, double frame_seconds, std::uint32_t rows);

LogitSlice slice_logits(const FeatureMatrix& logits, const SpeechSpan& span);

}  // namespace stcorpus
