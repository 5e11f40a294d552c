#include "stcorpus/metrics.hpp"

#include <algorithm>
#include <thread>
#include <unordered_map>

#include "stcorpus/errors.hpp"
#include "stcorpus/text_normalize.hpp"
#include "stcorpus/utf8.hpp"

namespace stcorpus {

namespace {

constexpr std::u32string_view kAsciiPunct = U"!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

// Python str.isspace additionally treats the information separators as whitespace.
bool is_split_space(char32_t c) { return utf8::is_whitespace(c) || (c >= 0x1C && c <= 0x1F); }

std::vector<std::u32string> split_words(std::u32string_view text) {
  std::vector<std::u32string> out;
  std::u32string cur;
  for (char32_t c : text) {
    if (is_split_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_ascii_punct(char32_t c) { return kAsciiPunct.find(c) != std::u32string_view::npos; }

std::vector<std::u32string> word_tokens(std::u32string_view text) {
  std::vector<std::u32string> out;
  for (auto& w : split_words(text)) {
    if (w.size() > 1 && is_ascii_punct(w.back())) {
      out.push_back(w.substr(0, w.size() - 1));
      out.push_back(w.substr(w.size() - 1));
    } else if (w.size() > 1 && is_ascii_punct(w.front())) {
      out.push_back(w.substr(0, 1));
      out.push_back(w.substr(1));
    } else {
      out.push_back(std::move(w));
    }
  }
  return out;
}

using Counts = std::unordered_map<std::u32string, std::uint64_t>;

Counts char_ngrams(std::u32string_view s, std::size_t n) {
  Counts c;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++c[std::u32string(s.substr(i, n))];
  return c;
}

Counts word_ngrams(const std::vector<std::u32string>& toks, std::size_t n) {
  Counts c;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::u32string key;
    for (std::size_t k = i; k < i + n; ++k) {
      if (k > i) key += U' ';
      key += toks[k];
    }
    ++c[key];
  }
  return c;
}

std::array<std::uint64_t, 3> match(const Counts& hyp, const Counts& ref) {
  std::array<std::uint64_t, 3> s{0, 0, 0};
  for (const auto& [g, n] : hyp) {
    s[0] += n;
    if (auto it = ref.find(g); it != ref.end()) s[2] += std::min(n, it->second);
  }
  for (const auto& [g, n] : ref) s[1] += n;
  return s;
}

std::u32string prepare(std::string_view text, const ChrfConfig& cfg) {
  auto cps = utf8::decode(text);
  if (cfg.lowercase)
    for (auto& c : cps) c = utf8::to_lower(c);
  return cps;
}

}  // namespace

std::string ChrfConfig::signature() const {
  return "nrefs:1|case:" + std::string(lowercase ? "lc" : "mixed") + "|eff:" + (effective_order ? "yes" : "no") +
         "|nc:" + std::to_string(char_order) + "|nw:" + std::to_string(word_order) +
         "|space:" + (whitespace ? "yes" : "no");
}

ChrfStats& ChrfStats::operator+=(const ChrfStats& o) {
  if (orders.empty()) orders.resize(o.orders.size(), {0, 0, 0});
  if (orders.size() != o.orders.size()) throw PreconditionError("chrF statistics have different orders");
  for (std::size_t i = 0; i < orders.size(); ++i)
    for (int k = 0; k < 3; ++k) orders[i][k] += o.orders[i][k];
  return *this;
}

std::vector<std::string> chrf_word_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : word_tokens(utf8::decode(text))) out.push_back(utf8::encode(t));
  return out;
}

ChrfStats chrf_segment_stats(std::string_view hypothesis, std::string_view reference, const ChrfConfig& cfg) {
  const auto hyp = prepare(hypothesis, cfg);
  const auto ref = prepare(reference, cfg);
  auto squeeze = [&](const std::u32string& s) {
    if (cfg.whitespace) return s;
    std::u32string out;
    for (char32_t c : s)
      if (!is_split_space(c)) out += c;
    return out;
  };
  const auto hc = squeeze(hyp), rc = squeeze(ref);
  ChrfStats st;
  for (int n = 1; n <= cfg.char_order; ++n) st.orders.push_back(match(char_ngrams(hc, n), char_ngrams(rc, n)));
  if (cfg.word_order > 0) {
    const auto hw = word_tokens(hyp), rw = word_tokens(ref);
    for (int n = 1; n <= cfg.word_order; ++n) st.orders.push_back(match(word_ngrams(hw, n), word_ngrams(rw, n)));
  }
  return st;
}

double chrf_score(const ChrfStats& stats, const ChrfConfig& cfg) {
  constexpr double eps = 1e-16;
  const double factor = cfg.beta * cfg.beta;
  double smoothed = 0.0, avg_prec = 0.0, avg_rec = 0.0;
  int effective = 0;
  for (const auto& [n_hyp, n_ref, n_match] : stats.orders) {
    const double prec = n_hyp > 0 ? static_cast<double>(n_match) / static_cast<double>(n_hyp) : eps;
    const double rec = n_ref > 0 ? static_cast<double>(n_match) / static_cast<double>(n_ref) : eps;
    const double denom = factor * prec + rec;
    smoothed += denom > 0 ? (1 + factor) * prec * rec / denom : eps;
    if (n_hyp > 0 && n_ref > 0) {
      avg_prec += prec;
      avg_rec += rec;
      ++effective;
    }
  }
  if (!cfg.effective_order) return stats.orders.empty() ? 0.0 : 100.0 * smoothed / stats.orders.size();
  if (effective == 0) return 0.0;
  avg_prec /= effective;
  avg_rec /= effective;
  if (avg_prec + avg_rec == 0.0) return 0.0;
  return 100.0 * (1 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec);
}

ChrfReport chrf_pp(std::span<const std::string> hypotheses, std::span<const std::string> references,
                   const ChrfConfig& cfg, unsigned threads) {
  if (references.empty()) throw PreconditionError("empty reference set");
  if (hypotheses.size() != references.size())
    throw PreconditionError(std::to_string(hypotheses.size()) + " hypotheses for " +
                            std::to_string(references.size()) + " references");
  const std::size_t n = references.size();
  std::vector<ChrfStats> seg(n);
  std::size_t workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) seg[i] = chrf_segment_stats(hypotheses[i], references[i], cfg);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) seg[i] = chrf_segment_stats(hypotheses[i], references[i], cfg);
      });
  }

  ChrfReport r;
  r.signature = cfg.signature();
  ChrfStats total;
  for (const auto& s : seg) {
    total += s;
    r.per_segment.push_back(chrf_score(s, cfg));
  }
  r.corpus_score = chrf_score(total, cfg);
  return r;
}

std::vector<std::string> tokenize_indic(std::string_view text, LangCode lang) {
  std::u32string marks = TerminalMarks::defaults().marks(lang);
  marks += U",;:،؛";
  std::vector<std::string> out;
  for (const auto& w : split_words(utf8::decode(text))) {
    std::size_t end = w.size();
    while (end > 0 && marks.find(w[end - 1]) != std::u32string::npos) --end;
    if (end > 0) out.push_back(utf8::encode(std::u32string_view(w).substr(0, end)));
    for (std::size_t k = end; k < w.size(); ++k) out.push_back(utf8::encode(std::u32string(1, w[k])));
  }
  return out;
}

}  // namespace stcorpus
