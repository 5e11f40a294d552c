#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stcorpus/feature_io.hpp"

namespace stcorpus {

// Declaration order is the tie-break priority.
enum class AlignOpKind { one_one, two_one, one_two, skip_src, skip_tgt };
std::string_view to_string(AlignOpKind k);

/// Half-open index range.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

struct AlignOp {
  AlignOpKind kind = AlignOpKind::one_one;
  IndexRange src_span;
  IndexRange tgt_span;
  double score = 0.0;

  bool operator==(const AlignOp&) const = default;
};

inline constexpr double kDefaultSkipPenalty = 0.25;

/// Cosine between span embeddings. Rows are L2-normalized first; a two-row span uses the
/// re-normalized mean of its rows (a zero mean scores 0).
double span_similarity(const FeatureMatrix& src, IndexRange s, const FeatureMatrix& tgt, IndexRange t);

/// Monotone alignment maximizing the summed op score. Matches (1-1, 2-1, 1-2) score the cosine of
/// their span embeddings, skips score -skip_penalty. Ties prefer one_one, two_one, one_two,
/// skip_src, skip_tgt, resolved from the end of the documents backwards.
///
/// Throws PreconditionError on empty input or negative penalty, DimensionError on width mismatch,
/// DegenerateInputError on a zero row.
std::vector<AlignOp> align_documents(const FeatureMatrix& src_emb, const FeatureMatrix& tgt_emb,
                                     double skip_penalty = kDefaultSkipPenalty);

/// Sum of op scores in order.
double total_score(std::span<const AlignOp> ops);

struct TextPair {
  std::string source;
  std::string target;
  double sigma = 0.0;

  bool operator==(const TextPair&) const = default;
};

/// Skips dropped; merged sentences joined with single spaces.
std::vector<TextPair> ops_to_pairs(std::span<const AlignOp> ops, std::span<const std::string> src_sents,
                                   std::span<const std::string> tgt_sents);

}  // namespace stcorpus
