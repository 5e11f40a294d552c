#include "stcorpus/text_normalize.hpp"

#include <algorithm>

#include "default_noise_patterns.hpp"
#include "stcorpus/errors.hpp"
#include "stcorpus/io_util.hpp"
#include "stcorpus/utf8.hpp"

namespace stcorpus {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string unescape_literal(std::string_view s, std::size_t line) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 >= s.size()) {
      out.push_back(s[i]);
      continue;
    }
    if (s[i + 1] == '\\') {
      out.push_back('\\');
      ++i;
    } else if (s[i + 1] == 'u') {
      if (i + 6 > s.size()) throw ParseError("truncated \\u escape", line);
      char32_t cp = 0;
      for (std::size_t k = i + 2; k < i + 6; ++k) {
        int h = hex_value(s[k]);
        if (h < 0) throw ParseError("bad \\u escape", line);
        cp = cp * 16 + static_cast<char32_t>(h);
      }
      utf8::append(out, cp);
      i += 5;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

// One cleaning pass; clean_text iterates this to a fixed point.
std::string clean_pass(const std::string& text, LangCode lang, const NoiseConfig& noise) {
  std::string no_controls;
  no_controls.reserve(text.size());
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_control(cp)) {
      if (utf8::is_whitespace(cp)) no_controls.push_back(' ');
      continue;
    }
    utf8::append(no_controls, cp);
  }

  const std::string denoised = noise.remove(std::move(no_controls), lang);
  std::u32string cps;
  try {
    cps = utf8::decode(denoised);
  } catch (const DecodeError&) {
    throw ConfigError("noise pattern split a UTF-8 sequence");
  }

  std::string out;
  out.reserve(denoised.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (utf8::is_whitespace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    utf8::append(out, cp);
  }
  return out;
}

}  // namespace

std::string_view default_noise_patterns() { return generated::kNoisePatterns; }

const NoiseConfig& NoiseConfig::defaults() {
  static const NoiseConfig cfg = parse(default_noise_patterns());
  return cfg;
}

NoiseConfig NoiseConfig::parse(std::string_view text) {
  NoiseConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kVersion = "# version:";
      if (line.starts_with(kVersion)) cfg.version_ = utf8::trim(line.substr(kVersion.size()));
      continue;
    }
    Pattern p;
    if (line.front() == '@') {
      const auto space = line.find(' ');
      if (space == std::string_view::npos) throw ParseError("language-scoped pattern is missing its pattern", line_no);
      try {
        p.lang = LangCode::parse(line.substr(1, space - 1));
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), line_no);
      }
      line = line.substr(space + 1);
    }
    if (line.starts_with("re:")) {
      try {
        p.regex.emplace(std::string(line.substr(3)), std::regex::ECMAScript | std::regex::optimize);
      } catch (const std::regex_error& e) {
        throw ParseError(std::string("bad regex: ") + e.what(), line_no);
      }
    } else {
      p.literal = unescape_literal(line, line_no);
      if (!utf8::is_valid(p.literal)) throw ParseError("literal is not valid UTF-8", line_no);
    }
    cfg.patterns_.push_back(std::move(p));
  }
  return cfg;
}

NoiseConfig NoiseConfig::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string NoiseConfig::remove(std::string text, LangCode lang) const {
  for (const auto& p : patterns_) {
    if (p.lang && *p.lang != lang) continue;
    if (p.regex) {
      text = std::regex_replace(text, *p.regex, "");
    } else if (!p.literal.empty()) {
      std::string out;
      std::size_t pos = 0;
      for (std::size_t hit; (hit = text.find(p.literal, pos)) != std::string::npos; pos = hit + p.literal.size())
        out.append(text, pos, hit - pos);
      out.append(text, pos);
      text = std::move(out);
    }
  }
  return text;
}

std::string clean_text(std::string_view raw, LangCode lang, const NoiseConfig& noise) {
  std::string cur(raw);
  utf8::decode(cur);
  for (;;) {
    std::string next = clean_pass(cur, lang, noise);
    if (next == cur) return next;
    cur = std::move(next);
  }
}

TerminalMarks::TerminalMarks() {
  const std::u32string common = U".!?…";
  for (auto code : kRegisteredLanguages) marks_[LangCode::parse(code)] = common;
  for (auto code : {"hin", "mar", "npi", "ben", "asm", "ory", "pan", "guj", "mni"}) add(LangCode::parse(code), U"।॥");
  for (auto code : {"urd", "snd"}) add(LangCode::parse(code), U"۔؟");
}

const TerminalMarks& TerminalMarks::defaults() {
  static const TerminalMarks marks;
  return marks;
}

void TerminalMarks::add(LangCode lang, std::u32string_view extra) {
  auto& set = marks_[lang];
  for (char32_t c : extra)
    if (set.find(c) == std::u32string::npos) set.push_back(c);
}

TerminalMarks TerminalMarks::parse(std::string_view text) {
  TerminalMarks tm;
  std::size_t line_no = 0;
  for (std::size_t pos = 0; pos <= text.size();) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line = utf8::trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError("expected '<lang>: <marks>'", line_no);
    LangCode lang;
    try {
      lang = LangCode::parse(utf8::trim(std::string_view(line).substr(0, colon)));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    std::u32string extra;
    for (const auto& mark : utf8::split_whitespace(std::u32string_view(utf8::decode(line.substr(colon + 1)))))
      extra += mark;
    tm.add(lang, extra);
  }
  return tm;
}

NormalizedDoc segment_sentences(std::string_view cleaned, LangCode lang, char32_t sentinel,
                                const TerminalMarks& marks) {
  const std::u32string text = utf8::decode(cleaned);
  if (text.find(sentinel) != std::u32string::npos)
    throw PreconditionError("input already contains the sentinel character");
  const std::u32string& terminals = marks.marks(lang);
  auto is_terminal = [&](char32_t c) { return terminals.find(c) != std::u32string::npos; };

  std::u32string marked;
  marked.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (!is_terminal(text[i])) {
      marked.push_back(text[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_terminal(text[j])) ++j;
    if (j == text.size() || utf8::is_whitespace(text[j]))
      marked.push_back(sentinel);
    else
      marked.append(text, i, j - i);
    i = j;
  }

  NormalizedDoc doc;
  doc.sentinel = sentinel;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= marked.size(); ++i) {
    if (i == marked.size() || marked[i] == sentinel) {
      auto piece = utf8::trim(std::u32string_view(marked).substr(start, i - start));
      if (!piece.empty()) doc.sentences.push_back(utf8::encode(piece));
      start = i + 1;
    }
  }
  return doc;
}

}  // namespace stcorpus
