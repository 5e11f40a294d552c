#include "stcorpus/lang.hpp"

#include <algorithm>

#include "stcorpus/errors.hpp"

namespace stcorpus {

namespace {

struct LangInfo {
  std::string_view code;
  std::string_view name;
  std::string_view script;
};

constexpr std::array<LangInfo, 16> kInfo = {{
    {"asm", "Assamese", "beng"},  {"ben", "Bengali", "beng"},  {"guj", "Gujarati", "gujr"},
    {"hin", "Hindi", "deva"},     {"kan", "Kannada", "knda"},  {"mal", "Malayalam", "mlym"},
    {"mar", "Marathi", "deva"},   {"npi", "Nepali", "deva"},   {"ory", "Odia", "orya"},
    {"pan", "Punjabi", "guru"},   {"snd", "Sindhi", "arab"},   {"tam", "Tamil", "taml"},
    {"tel", "Telugu", "telu"},    {"urd", "Urdu", "arab"},     {"eng", "English", "latn"},
    {"mni", "Manipuri", "beng"},
}};

const LangInfo& info(std::string_view code) {
  for (const auto& i : kInfo)
    if (i.code == code) return i;
  throw ValidationError("lang", "unregistered language code '" + std::string(code) + "'");
}

}  // namespace

bool LangCode::is_registered(std::string_view code) {
  return std::find(kRegisteredLanguages.begin(), kRegisteredLanguages.end(), code) !=
         kRegisteredLanguages.end();
}

LangCode LangCode::parse(std::string_view code) {
  if (code.size() != 3 || !std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; }))
    throw ValidationError("lang", "expected 3 lowercase ASCII letters, got '" + std::string(code) + "'");
  if (!is_registered(code))
    throw ValidationError("lang", "unregistered language code '" + std::string(code) + "'");
  return LangCode(code);
}

std::string_view LangCode::script() const { return info(str()).script; }
std::string_view LangCode::name() const { return info(str()).name; }

Direction Direction::make(LangCode source, LangCode target) {
  if (source == target) throw ValidationError("direction", "source and target are the same language");
  if (source.is_english() == target.is_english())
    throw ValidationError("direction", "exactly one side must be eng");
  return Direction{source, target};
}

}  // namespace stcorpus
