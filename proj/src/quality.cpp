#include "stcorpus/quality.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "stcorpus/errors.hpp"
#include "stcorpus/text_normalize.hpp"
#include "stcorpus/utf8.hpp"

namespace stcorpus {

std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  return levenshtein_distance(std::u32string_view(utf8::decode(a)), std::u32string_view(utf8::decode(b)));
}

std::u32string normalize_for_tau(std::string_view text, LangCode lang) {
  std::u32string cps = utf8::decode(clean_text(text, lang));
  for (auto& c : cps) c = utf8::to_lower(c);
  return utf8::strip_punctuation(cps);
}

double alignment_score_tau(std::string_view reference, std::string_view hypothesis, LangCode lang) {
  const auto r = normalize_for_tau(reference, lang);
  const auto h = normalize_for_tau(hypothesis, lang);
  const std::size_t longest = std::max(r.size(), h.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_distance(r, h)) / static_cast<double>(longest);
}

namespace {

double dot(std::span<const float> u, std::span<const float> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  return s;
}

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

double cosine_sigma(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size())
    throw DimensionError("vectors differ in length: " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  const double nu = std::sqrt(dot(u, u));
  const double nv = std::sqrt(dot(v, v));
  if (nu == 0.0 || nv == 0.0) throw DegenerateInputError("zero-norm vector");
  return clamp_unit(dot(u, v) / (nu * nv));
}

std::vector<ScoredPair> mine_pairs(const FeatureMatrix& src, const FeatureMatrix& tgt, unsigned threads) {
  if (src.rows == 0 || tgt.rows == 0) throw PreconditionError("mine_pairs needs nonempty matrices");
  if (src.cols != tgt.cols)
    throw DimensionError("embedding widths differ: " + std::to_string(src.cols) + " vs " + std::to_string(tgt.cols));

  auto norms = [](const FeatureMatrix& m) {
    std::vector<double> n(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
      n[r] = std::sqrt(dot(m.row(r), m.row(r)));
      if (n[r] == 0.0) throw DegenerateInputError("zero-norm embedding at row " + std::to_string(r));
    }
    return n;
  };
  const auto src_norm = norms(src);
  const auto tgt_norm = norms(tgt);

  std::vector<ScoredPair> out(src.rows);
  for (std::size_t i = 0; i < src.rows; ++i) out[i] = {i, 0, -2.0};

  constexpr std::size_t kSrcBlock = 16;
  const std::size_t tile_rows = std::max<std::size_t>(1, (32 * 1024) / (sizeof(float) * tgt.cols));
  auto work = [&](std::size_t src_begin, std::size_t src_end) {
    for (std::size_t t0 = 0; t0 < tgt.rows; t0 += tile_rows) {
      const std::size_t t1 = std::min<std::size_t>(tgt.rows, t0 + tile_rows);
      for (std::size_t i = src_begin; i < src_end; ++i) {
        auto& best = out[i];
        for (std::size_t j = t0; j < t1; ++j) {
          const double s = clamp_unit(dot(src.row(i), tgt.row(j)) / (src_norm[i] * tgt_norm[j]));
          if (s > best.sigma) best = {i, j, s};
        }
      }
    }
  };

  const std::size_t blocks = (src.rows + kSrcBlock - 1) / kSrcBlock;
  std::size_t n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, blocks);
  if (n_threads <= 1) {
    work(0, src.rows);
    return out;
  }
  std::vector<std::jthread> pool;
  for (std::size_t k = 0; k < n_threads; ++k) {
    pool.emplace_back([&, k] {
      for (std::size_t b = k; b < blocks; b += n_threads)
        work(b * kSrcBlock, std::min<std::size_t>(src.rows, (b + 1) * kSrcBlock));
    });
  }
  pool.clear();
  return out;
}

std::vector<std::size_t> score_histogram(std::span<const double> sigmas, std::size_t bins) {
  if (bins == 0) throw PreconditionError("histogram needs at least one bin");
  std::vector<std::size_t> counts(bins, 0);
  for (double v : sigmas) {
    const double x = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    const auto b = std::min(bins - 1, static_cast<std::size_t>(x * static_cast<double>(bins)));
    ++counts[b];
  }
  return counts;
}

std::string histogram_csv(std::span<const std::size_t> counts) {
  std::string out = "bin_low,bin_high,count\n";
  const double n = static_cast<double>(counts.size());
  char buf[64];
  for (std::size_t b = 0; b < counts.size(); ++b) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%zu\n", static_cast<double>(b) / n, static_cast<double>(b + 1) / n,
                  counts[b]);
    out += buf;
  }
  return out;
}

}  // namespace stcorpus
