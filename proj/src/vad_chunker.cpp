#include "stcorpus/vad_chunker.hpp"

#include <algorithm>
#include <cmath>

#include "stcorpus/corpus_model.hpp"
#include "stcorpus/errors.hpp"

namespace stcorpus {

namespace {

constexpr double kEps = 1e-9;

void split_long(const SpeechSpan& span, const FeatureMatrix& probs, double fs, double max_len,
                std::vector<SpeechSpan>& out) {
  const double len = span.end_s - span.start_s;
  if (len <= max_len) {
    out.push_back(span);
    return;
  }
  const double lo = span.start_s + len / 3.0;
  const double hi = span.start_s + 2.0 * len / 3.0;
  double cut = span.start_s + len / 2.0;
  const auto first = static_cast<std::int64_t>(std::ceil(lo / fs - kEps));
  const auto last = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(hi / fs + kEps)), probs.rows - 1);
  float best = 2.0f;
  for (std::int64_t f = std::max<std::int64_t>(first, 0); f <= last; ++f) {
    if (probs.data[f] < best) {
      best = probs.data[f];
      cut = static_cast<double>(f) * fs;
    }
  }
  cut = quantize_seconds(cut);
  if (cut <= span.start_s || cut >= span.end_s) {
    out.push_back(span);
    return;
  }
  split_long({span.start_s, cut}, probs, fs, max_len, out);
  split_long({cut, span.end_s}, probs, fs, max_len, out);
}

double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < 1e-4 ? r : x;
}

}  // namespace

void VadConfig::validate() const {
  if (!(off_threshold > 0.0 && off_threshold <= on_threshold && on_threshold < 1.0))
    throw ConfigError("vad thresholds must satisfy 0 < off <= on < 1");
  if (min_speech_s < 0.0 || min_silence_s < 0.0 || pad_s < 0.0)
    throw ConfigError("vad durations must be nonnegative");
  if (!(max_chunk_s > min_speech_s)) throw ConfigError("max_chunk_s must exceed min_speech_s");
}

std::vector<SpeechSpan> detect_speech(const FeatureMatrix& probs, const VadConfig& cfg) {
  if (probs.kind != FeatureKind::vad_probs)
    throw PreconditionError("detect_speech needs vad_probs, got " + std::string(to_string(probs.kind)));
  if (!(probs.frame_seconds > 0.0f)) throw PreconditionError("frame_seconds must be positive");
  cfg.validate();

  const double fs = probs.frame_seconds;
  const std::uint32_t T = probs.rows;

  // Frame ranges [begin, end).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> raw;
  bool speaking = false;
  std::uint32_t start = 0, silence_start = 0, silence_run = 0;
  for (std::uint32_t t = 0; t < T; ++t) {
    const double p = probs.data[t];
    if (!speaking) {
      if (p >= cfg.on_threshold) {
        speaking = true;
        start = t;
        silence_run = 0;
      }
      continue;
    }
    if (p < cfg.off_threshold) {
      if (silence_run == 0) silence_start = t;
      ++silence_run;
      if (silence_run * fs + kEps >= cfg.min_silence_s) {
        raw.emplace_back(start, silence_start);
        speaking = false;
      }
    } else {
      silence_run = 0;
    }
  }
  if (speaking) raw.emplace_back(start, silence_run > 0 ? silence_start : T);

  const double total = T * fs;
  std::vector<SpeechSpan> padded;
  for (auto [b, e] : raw) {
    if ((e - b) * fs + kEps < cfg.min_speech_s) continue;
    SpeechSpan s{quantize_seconds(std::max(0.0, b * fs - cfg.pad_s)),
                 quantize_seconds(std::min(total, e * fs + cfg.pad_s))};
    if (!padded.empty() && s.start_s <= padded.back().end_s)
      padded.back().end_s = std::max(padded.back().end_s, s.end_s);
    else
      padded.push_back(s);
  }

  std::vector<SpeechSpan> out;
  for (const auto& s : padded) split_long(s, probs, fs, cfg.max_chunk_s, out);
  return out;
}

std::pair<std::uint32_t, std::uint32_t> span_frames(const SpeechSpan& span, double fs, std::uint32_t rows) {
  if (!(fs > 0.0)) throw PreconditionError("frame_seconds must be positive");
  const double total = rows * fs;
  if (!(span.start_s >= 0.0) || !(span.end_s >= span.start_s) || span.end_s > total + 1e-6)
    throw PreconditionError("span [" + std::to_string(span.start_s) + ", " + std::to_string(span.end_s) +
                            "] outside [0, " + std::to_string(total) + "]");
  const auto first = static_cast<std::uint32_t>(std::floor(snap(span.start_s / fs)));
  const auto last_unclamped = static_cast<std::int64_t>(std::ceil(snap(span.end_s / fs)));
  const auto last = static_cast<std::uint32_t>(std::min<std::int64_t>(last_unclamped, rows - 1));
  if (first >= rows || first > last) throw PreconditionError("span selects no frames");
  return {first, last};
}

LogitSlice slice_logits(const FeatureMatrix& logits, const SpeechSpan& span) {
  if (logits.kind != FeatureKind::logits) throw PreconditionError("slice_logits needs a logits matrix");
  const auto [first, last] = span_frames(span, logits.frame_seconds, logits.rows);
  LogitSlice s;
  s.start_frame = first;
  s.logits.kind = FeatureKind::logits;
  s.logits.rows = last - first + 1;
  s.logits.cols = logits.cols;
  s.logits.frame_seconds = logits.frame_seconds;
  s.logits.data.assign(logits.data.begin() + static_cast<std::ptrdiff_t>(first) * logits.cols,
                       logits.data.begin() + static_cast<std::ptrdiff_t>(last + 1) * logits.cols);
  return s;
}

}  // namespace stcorpus
