#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stcorpus/feature_io.hpp"
#include "stcorpus/lang.hpp"

namespace stcorpus {

/// Edit distance over Unicode code points (unit-cost insert, delete, substitute).
std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein_distance(std::string_view a, std::string_view b);

/// clean_text, then lowercase, drop punctuation, collapse whitespace.
std::u32string normalize_for_tau(std::string_view text, LangCode lang = {});

/// Alignment score: 1 - d / max(|r|, |h|) over normalized code points; 1 when both are empty.
double alignment_score_tau(std::string_view reference, std::string_view hypothesis, LangCode lang = {});

/// Cosine similarity clamped to [-1, 1]. Throws DimensionError on length mismatch and
/// DegenerateInputError when either vector has zero norm.
double cosine_sigma(std::span<const float> u, std::span<const float> v);

struct ScoredPair {
  std::size_t source_idx = 0;
  std::size_t target_idx = 0;
  double sigma = 0.0;

  bool operator==(const ScoredPair&) const = default;
};

/// Greedy best-match mining: for every source row, the target row with the highest cosine
/// (smallest index on ties). Tiles the target matrix and splits source rows across `threads`
/// workers (0 = hardware concurrency); output order is by source row regardless.
std::vector<ScoredPair> mine_pairs(const FeatureMatrix& src_emb, const FeatureMatrix& tgt_emb, unsigned threads = 0);

/// Equal-width bins over [0, 1]; values are clamped into range first. Bins are right-exclusive
/// except the last.
std::vector<std::size_t> score_histogram(std::span<const double> sigmas, std::size_t bins);

/// "bin_low,bin_high,count" with a header line.
std::string histogram_csv(std::span<const std::size_t> counts);

}  // namespace stcorpus
