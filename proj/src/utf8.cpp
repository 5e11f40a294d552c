#include "stcorpus/utf8.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "stcorpus/errors.hpp"

namespace stcorpus::utf8 {

namespace {

using Range = std::pair<char32_t, char32_t>;

// Sorted, inclusive.
constexpr std::array kPunctuation = {
    Range{0x21, 0x23},     Range{0x25, 0x2A},     Range{0x2C, 0x2F},     Range{0x3A, 0x3B},
    Range{0x3F, 0x40},     Range{0x5B, 0x5D},     Range{0x5F, 0x5F},     Range{0x7B, 0x7B},
    Range{0x7D, 0x7D},     Range{0xA1, 0xA1},     Range{0xA7, 0xA7},     Range{0xAB, 0xAB},
    Range{0xB6, 0xB7},     Range{0xBB, 0xBB},     Range{0xBF, 0xBF},     Range{0x37E, 0x37E},
    Range{0x387, 0x387},   Range{0x55A, 0x55F},   Range{0x589, 0x58A},   Range{0x5BE, 0x5BE},
    Range{0x5C0, 0x5C0},   Range{0x5C3, 0x5C3},   Range{0x5C6, 0x5C6},   Range{0x5F3, 0x5F4},
    Range{0x609, 0x60A},   Range{0x60C, 0x60D},   Range{0x61B, 0x61B},   Range{0x61D, 0x61F},
    Range{0x66A, 0x66D},   Range{0x6D4, 0x6D4},   Range{0x964, 0x965},   Range{0x970, 0x970},
    Range{0x9FD, 0x9FD},   Range{0xA76, 0xA76},   Range{0xAF0, 0xAF0},   Range{0xC77, 0xC77},
    Range{0xC84, 0xC84},   Range{0xDF4, 0xDF4},   Range{0xE4F, 0xE4F},   Range{0xE5A, 0xE5B},
    Range{0x10FB, 0x10FB}, Range{0x1360, 0x1368}, Range{0x166E, 0x166E}, Range{0x169B, 0x169C},
    Range{0x16EB, 0x16ED}, Range{0x1735, 0x1736}, Range{0x17D4, 0x17D6}, Range{0x17D8, 0x17DA},
    Range{0x1800, 0x180A}, Range{0x2010, 0x2027}, Range{0x2030, 0x2043}, Range{0x2045, 0x2051},
    Range{0x2053, 0x205E}, Range{0x207D, 0x207E}, Range{0x208D, 0x208E}, Range{0x2308, 0x230B},
    Range{0x2329, 0x232A}, Range{0x2768, 0x2775}, Range{0x27C5, 0x27C6}, Range{0x27E6, 0x27EF},
    Range{0x2983, 0x2998}, Range{0x29D8, 0x29DB}, Range{0x29FC, 0x29FD}, Range{0x2CF9, 0x2CFC},
    Range{0x2CFE, 0x2CFF}, Range{0x2E00, 0x2E2E}, Range{0x2E30, 0x2E4F}, Range{0x3001, 0x3003},
    Range{0x3008, 0x3011}, Range{0x3014, 0x301F}, Range{0x3030, 0x3030}, Range{0x303D, 0x303D},
    Range{0x30A0, 0x30A0}, Range{0x30FB, 0x30FB}, Range{0xFE10, 0xFE19}, Range{0xFE30, 0xFE52},
    Range{0xFE54, 0xFE61}, Range{0xFE63, 0xFE63}, Range{0xFE68, 0xFE68}, Range{0xFE6A, 0xFE6B},
    Range{0xFF01, 0xFF03}, Range{0xFF05, 0xFF0A}, Range{0xFF0C, 0xFF0F}, Range{0xFF1A, 0xFF1B},
    Range{0xFF1F, 0xFF20}, Range{0xFF3B, 0xFF3D}, Range{0xFF3F, 0xFF3F}, Range{0xFF5B, 0xFF5B},
    Range{0xFF5D, 0xFF5D}, Range{0xFF5F, 0xFF65},
};

[[noreturn]] void bad(std::size_t offset) {
  throw DecodeError("invalid UTF-8 at byte " + std::to_string(offset));
}

}  // namespace

std::u32string decode(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
      min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
      min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
      min = 0x10000;
    } else {
      bad(i);
    }
    if (i + len > n) bad(i);
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) bad(i);
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) bad(i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

bool is_valid(std::string_view bytes) {
  try {
    decode(bytes);
    return true;
  } catch (const DecodeError&) {
    return false;
  }
}

bool is_whitespace(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
         cp == 0x205F || cp == 0x3000;
}

bool is_punctuation(char32_t cp) {
  auto it = std::upper_bound(kPunctuation.begin(), kPunctuation.end(), cp,
                             [](char32_t c, const Range& r) { return c < r.first; });
  if (it == kPunctuation.begin()) return false;
  --it;
  return cp >= it->first && cp <= it->second;
}

bool is_control(char32_t cp) { return cp < 0x20 || (cp >= 0x7F && cp <= 0x9F); }

char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if ((cp >= 0xC0 && cp <= 0xDE && cp != 0xD7)) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  return cp;
}

std::vector<std::u32string> split_whitespace(std::u32string_view text) {
  std::vector<std::u32string> out;
  std::u32string cur;
  for (char32_t cp : text) {
    if (is_whitespace(cp)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(cp);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& w : split_whitespace(std::u32string_view(decode(text)))) out.push_back(encode(w));
  return out;
}

std::u32string trim(std::u32string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && is_whitespace(text[b])) ++b;
  while (e > b && is_whitespace(text[e - 1])) --e;
  return std::u32string(text.substr(b, e - b));
}

std::string trim(std::string_view text) {
  return encode(trim(std::u32string_view(decode(text))));
}

std::u32string strip_punctuation(std::u32string_view text) {
  std::u32string out;
  bool pending_space = false;
  for (char32_t cp : text) {
    if (is_punctuation(cp)) continue;
    if (is_whitespace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return out;
}

}  // namespace stcorpus::utf8
