#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stcorpus/lang.hpp"

namespace stcorpus {

/// chrF++ settings. Defaults give the signature nrefs:1|case:mixed|eff:yes|nc:6|nw:2|space:no.
struct ChrfConfig {
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
  bool effective_order = true;
  bool lowercase = false;
  bool whitespace = false;

  std::string signature() const;
};

/// Per order (chars 1..char_order, then words 1..word_order): hypothesis n-grams, reference
/// n-grams, clipped matches.
struct ChrfStats {
  std::vector<std::array<std::uint64_t, 3>> orders;

  ChrfStats& operator+=(const ChrfStats& o);
  bool operator==(const ChrfStats&) const = default;
};

/// Word tokens for the word n-grams: whitespace split, then a word longer than one character
/// loses one trailing ASCII punctuation character (or, failing that, a leading one) as a separate
/// token.
std::vector<std::string> chrf_word_tokens(std::string_view text);

ChrfStats chrf_segment_stats(std::string_view hypothesis, std::string_view reference, const ChrfConfig& cfg = {});

/// With effective_order: precision and recall are averaged over orders that have both hypothesis
/// and reference n-grams, then combined into one F-beta. Without it: the mean of per-order F-beta
/// with 1e-16 smoothing. Returns a value in [0, 100].
double chrf_score(const ChrfStats& stats, const ChrfConfig& cfg = {});

struct ChrfReport {
  double corpus_score = 0.0;
  std::vector<double> per_segment;
  std::string signature;
};

/// Corpus score from summed statistics; per-segment scores from each segment's own statistics.
/// Throws PreconditionError on a length mismatch or an empty reference set.
ChrfReport chrf_pp(std::span<const std::string> hypotheses, std::span<const std::string> references,
                   const ChrfConfig& cfg = {}, unsigned threads = 0);

/// Whitespace split, with trailing sentence marks and clause punctuation (। ॥ ۔ ؟ , ; : ...)
/// detached as separate tokens.
std::vector<std::string> tokenize_indic(std::string_view text, LangCode lang);

}  // namespace stcorpus
