#include "stcorpus/bitext_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stcorpus/errors.hpp"

namespace stcorpus {

std::string_view to_string(AlignOpKind k) {
  switch (k) {
    case AlignOpKind::one_one: return "one_one";
    case AlignOpKind::two_one: return "two_one";
    case AlignOpKind::one_two: return "one_two";
    case AlignOpKind::skip_src: return "skip_src";
    case AlignOpKind::skip_tgt: return "skip_tgt";
  }
  return "?";
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool normalize(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  if (n == 0.0) return false;
  for (auto& x : v) x /= n;
  return true;
}

Vec unit_row(const FeatureMatrix& m, std::size_t r) {
  auto row = m.row(r);
  Vec v(row.begin(), row.end());
  if (!normalize(v)) throw DegenerateInputError("zero-norm embedding at row " + std::to_string(r));
  return v;
}

// Re-normalized mean of unit rows; empty vector when the mean vanishes.
Vec pooled(const std::vector<Vec>& units, IndexRange span) {
  if (span.size() == 1) return units[span.begin];
  Vec v(units[span.begin].size(), 0.0);
  for (std::size_t r = span.begin; r < span.end; ++r)
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += units[r][k];
  for (auto& x : v) x /= static_cast<double>(span.size());
  if (!normalize(v)) return {};
  return v;
}

double similarity(const Vec& a, const Vec& b) {
  if (a.empty() || b.empty()) return 0.0;
  return std::clamp(dot(a, b), -1.0, 1.0);
}

std::vector<Vec> unit_rows(const FeatureMatrix& m) {
  std::vector<Vec> out;
  out.reserve(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) out.push_back(unit_row(m, r));
  return out;
}

void check_inputs(const FeatureMatrix& src, const FeatureMatrix& tgt) {
  if (src.rows == 0 || tgt.rows == 0) throw PreconditionError("alignment needs nonempty documents");
  if (src.cols != tgt.cols)
    throw DimensionError("embedding widths differ: " + std::to_string(src.cols) + " vs " + std::to_string(tgt.cols));
}

}  // namespace

double span_similarity(const FeatureMatrix& src, IndexRange s, const FeatureMatrix& tgt, IndexRange t) {
  check_inputs(src, tgt);
  if (s.size() == 0 || t.size() == 0 || s.end > src.rows || t.end > tgt.rows)
    throw PreconditionError("span out of range");
  std::vector<Vec> su, tu;
  for (std::size_t r = s.begin; r < s.end; ++r) su.push_back(unit_row(src, r));
  for (std::size_t r = t.begin; r < t.end; ++r) tu.push_back(unit_row(tgt, r));
  return similarity(pooled(su, {0, s.size()}), pooled(tu, {0, t.size()}));
}

std::vector<AlignOp> align_documents(const FeatureMatrix& src, const FeatureMatrix& tgt, double skip_penalty) {
  check_inputs(src, tgt);
  if (!(skip_penalty >= 0.0)) throw PreconditionError("skip_penalty must be nonnegative");

  const std::size_t n = src.rows, m = tgt.rows;
  const auto su = unit_rows(src);
  const auto tu = unit_rows(tgt);
  std::vector<Vec> src_pairs(n), tgt_pairs(m);
  for (std::size_t i = 0; i + 1 < n; ++i) src_pairs[i] = pooled(su, {i, i + 2});
  for (std::size_t j = 0; j + 1 < m; ++j) tgt_pairs[j] = pooled(tu, {j, j + 2});

  constexpr double kNone = -std::numeric_limits<double>::infinity();
  const std::size_t W = m + 1;
  std::vector<double> best((n + 1) * W, kNone);
  std::vector<AlignOp> op((n + 1) * W);
  best[0] = 0.0;

  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      double v = kNone;
      AlignOp chosen;
      auto consider = [&](std::size_t pi, std::size_t pj, AlignOpKind kind, double score) {
        const double prev = best[pi * W + pj];
        if (prev == kNone) return;
        const double total = prev + score;
        if (total > v) {
          v = total;
          chosen = {kind, {pi, i}, {pj, j}, score};
        }
      };
      if (i >= 1 && j >= 1) consider(i - 1, j - 1, AlignOpKind::one_one, similarity(su[i - 1], tu[j - 1]));
      if (i >= 2 && j >= 1) consider(i - 2, j - 1, AlignOpKind::two_one, similarity(src_pairs[i - 2], tu[j - 1]));
      if (i >= 1 && j >= 2) consider(i - 1, j - 2, AlignOpKind::one_two, similarity(su[i - 1], tgt_pairs[j - 2]));
      if (i >= 1) consider(i - 1, j, AlignOpKind::skip_src, -skip_penalty);
      if (j >= 1) consider(i, j - 1, AlignOpKind::skip_tgt, -skip_penalty);
      best[i * W + j] = v;
      op[i * W + j] = chosen;
    }
  }

  std::vector<AlignOp> ops;
  for (std::size_t i = n, j = m; i > 0 || j > 0;) {
    const auto& o = op[i * W + j];
    ops.push_back(o);
    i = o.src_span.begin;
    j = o.tgt_span.begin;
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

double total_score(std::span<const AlignOp> ops) {
  double s = 0.0;
  for (const auto& o : ops) s += o.score;
  return s;
}

std::vector<TextPair> ops_to_pairs(std::span<const AlignOp> ops, std::span<const std::string> src_sents,
                                   std::span<const std::string> tgt_sents) {
  auto join = [](std::span<const std::string> sents, IndexRange r) {
    if (r.end > sents.size()) throw PreconditionError("op span exceeds sentence count");
    std::string out;
    for (std::size_t k = r.begin; k < r.end; ++k) {
      if (k > r.begin) out += ' ';
      out += sents[k];
    }
    return out;
  };
  std::vector<TextPair> out;
  for (const auto& o : ops) {
    if (o.kind == AlignOpKind::skip_src || o.kind == AlignOpKind::skip_tgt) continue;
    out.push_back({join(src_sents, o.src_span), join(tgt_sents, o.tgt_span), o.score});
  }
  return out;
}

}  // namespace stcorpus
