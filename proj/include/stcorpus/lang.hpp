#pragma once

#include <array>
#include <compare>
#include <string>
#include <string_view>

namespace stcorpus {

/// Three-letter code from the registered language set. Construction validates.
class LangCode {
 public:
  LangCode() : LangCode("eng") {}
  /// Throws ValidationError("lang") for anything outside the registered set.
  static LangCode parse(std::string_view code);
  static bool is_registered(std::string_view code);

  std::string_view str() const { return std::string_view(code_.data(), 3); }
  bool is_english() const { return str() == "eng"; }

  /// ISO 15924 script tag. mni is written in Bengali script ("beng").
  std::string_view script() const;
  /// English display name used in prompts.
  std::string_view name() const;

  auto operator<=>(const LangCode&) const = default;

 private:
  explicit LangCode(std::string_view code) { code.copy(code_.data(), 3); }
  std::array<char, 3> code_{};
};

inline const std::array<std::string_view, 16> kRegisteredLanguages = {
    "asm", "ben", "guj", "hin", "kan", "mal", "mar", "npi",
    "ory", "pan", "snd", "tam", "tel", "urd", "eng", "mni"};

/// En<->Indic translation direction. Exactly one side is eng.
struct Direction {
  LangCode source;
  LangCode target;

  static Direction make(LangCode source, LangCode target);

  /// The non-English side.
  LangCode indic() const { return source.is_english() ? target : source; }
  /// "en-xx" or "xx-en".
  std::string_view label() const { return source.is_english() ? "en-xx" : "xx-en"; }

  auto operator<=>(const Direction&) const = default;
};

}  // namespace stcorpus
