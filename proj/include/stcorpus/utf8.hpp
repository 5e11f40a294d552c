#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stcorpus::utf8 {

/// Strict decode: rejects overlong forms, surrogates and code points above U+10FFFF.
/// Throws DecodeError with the byte offset of the first bad sequence.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view cps);
void append(std::string& out, char32_t cp);

bool is_valid(std::string_view bytes);

// Unicode White_Space property.
bool is_whitespace(char32_t cp);

// General Category P* (ASCII, Latin-1, the script blocks used by the supported languages,
// General/Supplemental Punctuation, CJK and fullwidth forms).
bool is_punctuation(char32_t cp);

// C0, DEL and C1 controls.
bool is_control(char32_t cp);

// Simple one-to-one lowercase mapping for Latin, Greek and Cyrillic; identity elsewhere.
char32_t to_lower(char32_t cp);

std::vector<std::u32string> split_whitespace(std::u32string_view text);
std::vector<std::string> split_whitespace(std::string_view text);

std::u32string trim(std::u32string_view text);
std::string trim(std::string_view text);

/// Drops punctuation, collapses whitespace runs to one space and trims.
std::u32string strip_punctuation(std::u32string_view text);

}  // namespace stcorpus::utf8
