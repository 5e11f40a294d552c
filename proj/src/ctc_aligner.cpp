#include "stcorpus/ctc_aligner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stcorpus/errors.hpp"
#include "stcorpus/utf8.hpp"

namespace stcorpus {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_target(const TargetSequence& target, const TokenVocab& vocab) {
  if (target.tokens.empty()) throw PreconditionError("empty target sequence");
  if (target.word_index.size() != target.tokens.size())
    throw PreconditionError("word_index must have one entry per token");
  for (std::size_t i = 0; i < target.tokens.size(); ++i) {
    if (target.tokens[i] >= vocab.size()) throw PreconditionError("token index out of vocabulary range");
    if (target.tokens[i] == vocab.blank_index()) throw PreconditionError("target contains the blank token");
    const auto w = target.word_index[i];
    const auto prev = i == 0 ? 0u : target.word_index[i - 1];
    if ((i == 0 && w != 0) || (i > 0 && w != prev && w != prev + 1))
      throw PreconditionError("word_index must start at 0 and increase by at most 1");
  }
  if (target.segment_index.size() != target.word_index.back() + 1)
    throw PreconditionError("segment_index must have one entry per word");
  for (std::size_t w = 0; w < target.segment_index.size(); ++w) {
    const auto s = target.segment_index[w];
    const auto prev = w == 0 ? 0u : target.segment_index[w - 1];
    if ((w == 0 && s != 0) || (w > 0 && s != prev && s != prev + 1))
      throw PreconditionError("segment_index must start at 0 and increase by at most 1");
  }
}

FrameSpan hull(FrameSpan a, FrameSpan b) {
  return {std::min(a.start_frame, b.start_frame), std::max(a.end_frame, b.end_frame)};
}

}  // namespace

TargetSequence build_target(const TokenVocab& vocab, std::span<const std::string> segments) {
  TargetSequence t;
  const auto delimiter = vocab.word_delimiter();
  std::uint32_t word = 0;
  for (std::size_t seg = 0; seg < segments.size(); ++seg) {
    bool segment_has_words = false;
    for (const auto& w : utf8::split_whitespace(std::u32string_view(utf8::decode(segments[seg])))) {
      std::vector<std::uint32_t> toks;
      for (char32_t cp : w) {
        auto id = vocab.find(utf8::encode(std::u32string(1, cp)));
        if (!id) id = vocab.find(utf8::encode(std::u32string(1, utf8::to_lower(cp))));
        if (!id) {
          if (utf8::is_punctuation(cp)) continue;
          throw ValidationError("transcript", "character '" + utf8::encode(std::u32string(1, cp)) +
                                                  "' is not in the vocabulary");
        }
        if (*id == vocab.blank_index()) throw ValidationError("transcript", "character maps to the blank token");
        toks.push_back(static_cast<std::uint32_t>(*id));
      }
      if (toks.empty()) continue;
      if (!t.tokens.empty() && delimiter) {
        t.tokens.push_back(static_cast<std::uint32_t>(*delimiter));
        t.word_index.push_back(word - 1);
      }
      for (auto id : toks) {
        t.tokens.push_back(id);
        t.word_index.push_back(word);
      }
      t.segment_index.push_back(static_cast<std::uint32_t>(seg));
      ++word;
      segment_has_words = true;
    }
    if (!segment_has_words)
      throw ValidationError("transcript", "segment " + std::to_string(seg) + " has no alignable characters");
  }
  return t;
}

std::size_t min_ctc_frames(std::span<const std::uint32_t> tokens) {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < tokens.size(); ++i)
    if (tokens[i] == tokens[i - 1]) ++repeats;
  return tokens.size() + repeats;
}

AlignmentResult ctc_viterbi_align(const FeatureMatrix& logits, const TokenVocab& vocab, const TargetSequence& target) {
  if (logits.kind != FeatureKind::logits) throw PreconditionError("alignment needs a logits matrix");
  check_target(target, vocab);
  if (logits.cols != vocab.size())
    throw DimensionError("logits have " + std::to_string(logits.cols) + " columns, vocabulary has " +
                         std::to_string(vocab.size()) + " tokens");
  const std::size_t T = logits.rows;
  const std::size_t L = target.tokens.size();
  const std::size_t need = min_ctc_frames(target.tokens);
  if (T < need) throw InfeasibleError(T, need);

  const std::size_t S = 2 * L + 1;
  const auto blank = static_cast<std::uint32_t>(vocab.blank_index());
  auto label = [&](std::size_t s) { return s % 2 == 0 ? blank : target.tokens[s / 2]; };
  auto emit = [&](std::size_t t, std::size_t s) { return static_cast<double>(logits.at(t, label(s))); };

  std::vector<double> prev(S, kNegInf), cur(S, kNegInf);
  // Step taken to enter (t, s): 0 stay, 1 or 2 advance.
  std::vector<std::uint8_t> back(T * S, 0);

  prev[0] = emit(0, 0);
  prev[1] = emit(0, 1);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double best = prev[s];
      std::uint8_t step = 0;
      if (s >= 1 && prev[s - 1] > best) {
        best = prev[s - 1];
        step = 1;
      }
      if (s >= 2 && s % 2 == 1 && label(s) != label(s - 2) && prev[s - 2] > best) {
        best = prev[s - 2];
        step = 2;
      }
      back[t * S + s] = step;
      cur[s] = best == kNegInf ? kNegInf : best + emit(t, s);
    }
    std::swap(prev, cur);
  }

  std::size_t state = prev[S - 1] > prev[S - 2] ? S - 1 : S - 2;
  AlignmentResult r;
  r.path_log_prob = prev[state];
  r.frame_seconds = logits.frame_seconds;

  std::vector<FrameSpan> token_spans(L, FrameSpan{-1, -1});
  for (std::size_t t = T; t-- > 0;) {
    if (state % 2 == 1) {
      auto& span = token_spans[state / 2];
      if (span.end_frame < 0) span.end_frame = static_cast<std::int64_t>(t);
      span.start_frame = static_cast<std::int64_t>(t);
    }
    if (t > 0) state -= back[t * S + state];
  }
  r.token_spans = std::move(token_spans);

  const auto delimiter = vocab.word_delimiter();
  const std::size_t W = target.word_index.back() + 1;
  std::vector<FrameSpan> words(W, FrameSpan{-1, -1});
  std::vector<FrameSpan> words_any(W, FrameSpan{-1, -1});
  for (std::size_t i = 0; i < L; ++i) {
    const auto w = target.word_index[i];
    auto& any = words_any[w];
    any = any.start_frame < 0 ? r.token_spans[i] : hull(any, r.token_spans[i]);
    if (delimiter && target.tokens[i] == *delimiter) continue;
    auto& span = words[w];
    span = span.start_frame < 0 ? r.token_spans[i] : hull(span, r.token_spans[i]);
  }
  for (std::size_t w = 0; w < W; ++w)
    if (words[w].start_frame < 0) words[w] = words_any[w];
  r.word_spans = std::move(words);

  const std::size_t G = target.segment_index.back() + 1;
  std::vector<FrameSpan> segs(G, FrameSpan{-1, -1});
  for (std::size_t w = 0; w < W; ++w) {
    auto& span = segs[target.segment_index[w]];
    span = span.start_frame < 0 ? r.word_spans[w] : hull(span, r.word_spans[w]);
  }
  r.segment_spans = std::move(segs);
  return r;
}

AlignmentResult offset_alignment(AlignmentResult a, std::int64_t chunk_start_frame) {
  for (auto* spans : {&a.token_spans, &a.word_spans, &a.segment_spans}) {
    for (auto& s : *spans) {
      s.start_frame += chunk_start_frame;
      s.end_frame += chunk_start_frame;
    }
  }
  return a;
}

std::vector<std::pair<SpeechSpan, std::string>> segments_to_utterances(const AlignmentResult& a, const DocumentRef& doc,
                                                                       std::span<const std::string> sentences) {
  if (a.segment_spans.size() != sentences.size())
    throw PreconditionError("segment count " + std::to_string(a.segment_spans.size()) + " does not match " +
                            std::to_string(sentences.size()) + " sentences");
  std::vector<std::pair<SpeechSpan, std::string>> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& f = a.segment_spans[i];
    SpeechSpan span{quantize_seconds(static_cast<double>(f.start_frame) * a.frame_seconds),
                    quantize_seconds(static_cast<double>(f.end_frame + 1) * a.frame_seconds)};
    if (doc.audio_seconds > 0.0) span.end_s = std::min(span.end_s, doc.audio_seconds);
    out.emplace_back(span, sentences[i]);
  }
  return out;
}

std::string greedy_decode(const FeatureMatrix& logits, const TokenVocab& vocab, std::size_t first, std::size_t last) {
  if (logits.cols != vocab.size()) throw DimensionError("logits width does not match vocabulary");
  if (first > last || last >= logits.rows) throw PreconditionError("frame range out of bounds");
  const auto delimiter = vocab.word_delimiter();
  std::string out;
  std::size_t prev = vocab.size();
  for (std::size_t t = first; t <= last; ++t) {
    auto row = logits.row(t);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best != prev && best != vocab.blank_index()) {
      if (delimiter && best == *delimiter)
        out += ' ';
      else
        out += vocab.token(best);
    }
    prev = best;
  }
  std::string joined;
  for (const auto& w : utf8::split_whitespace(std::string_view(out))) {
    if (!joined.empty()) joined += ' ';
    joined += w;
  }
  return joined;
}

}  // namespace stcorpus
