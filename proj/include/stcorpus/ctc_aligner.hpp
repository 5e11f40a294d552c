#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stcorpus/corpus_model.hpp"
#include "stcorpus/feature_io.hpp"
#include "stcorpus/vad_chunker.hpp"

namespace stcorpus {

/// Tokens to force-align, grouped into words and words into segments.
struct TargetSequence {
  std::vector<std::uint32_t> tokens;
  std::vector<std::uint32_t> word_index;     // per token, nondecreasing, 0-based without gaps
  std::vector<std::uint32_t> segment_index;  // per word, nondecreasing, 0-based without gaps

  std::size_t word_count() const { return segment_index.size(); }
  std::size_t segment_count() const { return segment_index.empty() ? 0 : segment_index.back() + 1; }
};

/// Character-level target for a list of segments. Words are split on whitespace; each code point
/// maps to its vocabulary token (falling back to its lowercase form). Punctuation missing from the
/// vocabulary is skipped; any other unknown character throws ValidationError. When the vocabulary
/// has a word delimiter it is inserted between consecutive words and counted with the word before it.
TargetSequence build_target(const TokenVocab& vocab, std::span<const std::string> segments);

/// Inclusive frame range.
struct FrameSpan {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;

  bool operator==(const FrameSpan&) const = default;
};

struct AlignmentResult {
  std::vector<FrameSpan> token_spans;
  std::vector<FrameSpan> word_spans;
  std::vector<FrameSpan> segment_spans;
  double path_log_prob = 0.0;
  double frame_seconds = 0.0;
};

/// Minimum frame count for a CTC path: tokens plus one separating blank per adjacent repeat.
std::size_t min_ctc_frames(std::span<const std::uint32_t> tokens);

/// Viterbi forced alignment over the blank-interleaved state sequence (2L+1 states).
///
/// A state is entered from itself, the previous state, or two back when skipping a blank between
/// distinct tokens. Ties prefer staying, then advancing one, then two; at the last frame the path
/// ends on the final token unless the trailing blank scores strictly higher. A token's span is the
/// frames spent in its state; blank frames belong to no token. Word spans are hulls of their
/// non-delimiter tokens, segment spans hulls of their words. The path score accumulates in double.
///
/// Throws PreconditionError for an empty or malformed target, DimensionError when the logits
/// width differs from the vocabulary, InfeasibleError when there are too few frames.
AlignmentResult ctc_viterbi_align(const FeatureMatrix& logits, const TokenVocab& vocab, const TargetSequence& target);

AlignmentResult offset_alignment(AlignmentResult a, std::int64_t chunk_start_frame);

/// One (time span, sentence) pair per aligned segment. A segment covering frames [a, b] maps to
/// [a * frame_seconds, (b + 1) * frame_seconds], clipped to the document duration.
std::vector<std::pair<SpeechSpan, std::string>> segments_to_utterances(const AlignmentResult& a, const DocumentRef& doc,
                                                                       std::span<const std::string> sentences);

/// Best-path decoding of frames [first, last]: per-frame argmax (lowest index on ties), repeats
/// collapsed, blanks dropped, the word delimiter rendered as a space.
std::string greedy_decode(const FeatureMatrix& logits, const TokenVocab& vocab, std::size_t first, std::size_t last);

}  // namespace stcorpus
