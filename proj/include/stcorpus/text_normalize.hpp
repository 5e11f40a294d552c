#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "stcorpus/lang.hpp"

namespace stcorpus {

/// Noise removal list.
///
/// Text format, one pattern per line:
///   # comment            ignored (a "# version: N" comment sets version())
///   re:<ECMAScript>      regex, matched against UTF-8 bytes
///   <literal>            literal text; \uXXXX escapes allowed
///   @<lang> <pattern>    pattern applies to that language only
class NoiseConfig {
 public:
  static const NoiseConfig& defaults();
  static NoiseConfig parse(std::string_view text);
  static NoiseConfig load(const std::filesystem::path& path);

  const std::string& version() const { return version_; }
  std::size_t size() const { return patterns_.size(); }

  /// One removal pass over `text`.
  std::string remove(std::string text, LangCode lang) const;

 private:
  struct Pattern {
    std::optional<LangCode> lang;
    std::string literal;
    std::optional<std::regex> regex;
  };
  std::vector<Pattern> patterns_;
  std::string version_ = "unversioned";
};

/// Text of the built-in noise list (also shipped as config/noise_patterns.txt).
std::string_view default_noise_patterns();

/// Removes controls and configured noise, turns line breaks into spaces, collapses whitespace
/// and trims. Everything else is kept byte-for-byte. Idempotent. Throws DecodeError.
std::string clean_text(std::string_view raw, LangCode lang, const NoiseConfig& noise = NoiseConfig::defaults());

inline constexpr char32_t kDefaultSentinel = U'␞';

struct NormalizedDoc {
  std::vector<std::string> sentences;
  char32_t sentinel = kDefaultSentinel;
};

/// Per-language sentence terminators. Defaults: . ! ? … everywhere, । ॥ for the
/// danda-using scripts, ۔ ؟ for Arabic-script languages.
class TerminalMarks {
 public:
  static const TerminalMarks& defaults();
  /// Lines "<lang>: <mark> <mark> ...", '#' comments. Marks are added to the defaults.
  static TerminalMarks parse(std::string_view text);

  const std::u32string& marks(LangCode lang) const { return marks_.at(lang); }
  void add(LangCode lang, std::u32string_view extra);

 private:
  TerminalMarks();
  std::map<LangCode, std::u32string> marks_;
};

/// Replaces terminal punctuation runs (followed by whitespace or end of text) with the sentinel,
/// splits on it, trims, and drops empty pieces. Throws PreconditionError if `cleaned` already
/// contains the sentinel.
NormalizedDoc segment_sentences(std::string_view cleaned, LangCode lang, char32_t sentinel = kDefaultSentinel,
                                const TerminalMarks& marks = TerminalMarks::defaults());

}  // namespace stcorpus
