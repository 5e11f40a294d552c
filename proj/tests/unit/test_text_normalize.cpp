#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "stcorpus/errors.hpp"
#include "stcorpus/io_util.hpp"
#include "stcorpus/text_normalize.hpp"
#include "stcorpus/utf8.hpp"

using namespace stcorpus;

namespace {

const LangCode eng = LangCode::parse("eng");
const LangCode hin = LangCode::parse("hin");
const LangCode urd = LangCode::parse("urd");

std::vector<std::string> sentences(std::string_view text, LangCode lang) {
  return segment_sentences(text, lang).sentences;
}

// Whitespace tokens with all punctuation removed, empty ones dropped.
std::vector<std::string> bare_words(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& w : utf8::split_whitespace(text)) {
    const auto s = utf8::encode(utf8::strip_punctuation(utf8::decode(w)));
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

// Tokens with trailing terminal marks removed, empty ones dropped.
std::string strip_terminals(std::string_view text, std::u32string_view marks) {
  std::string out;
  for (const auto& w : utf8::split_whitespace(text)) {
    auto cps = utf8::decode(w);
    while (!cps.empty() && marks.find(cps.back()) != std::u32string_view::npos) cps.pop_back();
    if (cps.empty()) continue;
    if (!out.empty()) out += ' ';
    out += utf8::encode(cps);
  }
  return out;
}

std::string random_text(std::mt19937& rng) {
  static const std::vector<std::string> words = {"a",    "cat",  "sat", "नमस्ते", "दुनिया", "3.14", "e.g",
                                                 "don't", "x,y", "আকাশ", "یہ",   "hi",   "ok"};
  static const std::vector<std::string> seps = {" ",  "  ", ". ", "? ", "! ", "। ", "॥ ", ", ",
                                                "\n", " . ", "?! ", "… ", "\t", "۔ "};
  std::uniform_int_distribution<std::size_t> w(0, words.size() - 1), s(0, seps.size() - 1), n(0, 12);
  std::string out;
  const std::size_t len = n(rng);
  for (std::size_t i = 0; i < len; ++i) out += words[w(rng)] + seps[s(rng)];
  return out;
}

std::string random_noisy(std::mt19937& rng) {
  static const std::vector<std::string> parts = {"a",   " ",     "\n",     "\r\n", "♪",        "[Music]", "<i>",
                                                 "</i>", "\x07", "\u00AD", "नमस्ते", "\u200B",  "  ",      "[", "]",
                                                 "।",   "\t",    "ZWJ\u200D", "\u00A0"};
  std::uniform_int_distribution<std::size_t> p(0, parts.size() - 1), n(0, 20);
  std::string out;
  const std::size_t len = n(rng);
  for (std::size_t i = 0; i < len; ++i) out += parts[p(rng)];
  return out;
}

}  // namespace

TEST_CASE("clean_text examples") {
  CHECK(clean_text("hello   world\n\n", eng) == "hello world");
  CHECK(clean_text("[Music] नमस्ते  दुनिया", hin) == "नमस्ते दुनिया");
  CHECK(clean_text("", eng) == "");
}

TEST_CASE("clean_text removes the documented noise") {
  CHECK(clean_text("♪ la la ♫", eng) == "la la");
  CHECK(clean_text("<b>bold</b> text", eng) == "bold text");
  CHECK(clean_text("co\u00ADop\u200Beration", eng) == "cooperation");
  CHECK(clean_text("line\r\nbreak\tand\x01 bell", eng) == "line break and bell");
  CHECK(clean_text("\uFEFFstart", eng) == "start");
}

TEST_CASE("clean_text keeps Indic text byte for byte") {
  const std::string s = "क्षत्रिय ক্ষ ஸ்ரீ ਪੰਜਾਬ اردو ਕ\u200Dਕ";
  CHECK(clean_text(s, hin) == s);
}

TEST_CASE("clean_text rejects invalid UTF-8") {
  CHECK_THROWS_AS(clean_text("ab\xFF", eng), DecodeError);
}

TEST_CASE("segment_sentences examples") {
  CHECK(sentences("a. b? c!", eng) == std::vector<std::string>{"a", "b", "c"});
  CHECK(sentences("यह वाक्य है। दूसरा वाक्य॥", hin) == std::vector<std::string>{"यह वाक्य है", "दूसरा वाक्य"});
  CHECK(sentences("no terminator", eng) == std::vector<std::string>{"no terminator"});
}

TEST_CASE("segment_sentences per-language marks and runs") {
  CHECK(sentences("یہ ہے۔ کیا؟", urd) == std::vector<std::string>{"یہ ہے", "کیا"});
  CHECK(sentences("wait... what?! ok", eng) == std::vector<std::string>{"wait", "what", "ok"});
  CHECK(sentences("pi is 3.14 today.", eng) == std::vector<std::string>{"pi is 3.14 today"});
  CHECK(sentences("danda। in english", eng) == std::vector<std::string>{"danda। in english"});
  CHECK(sentences(". . .", eng).empty());
  CHECK(sentences("", eng).empty());
}

TEST_CASE("segment_sentences rejects text containing the sentinel") {
  CHECK_THROWS_AS(segment_sentences("a ␞ b", eng), PreconditionError);
  CHECK(segment_sentences("a ␞ b", eng, U'¤').sentences == std::vector<std::string>{"a ␞ b"});
}

TEST_CASE("normalized sentences satisfy the document invariants") {
  std::mt19937 rng(21);
  for (int i = 0; i < 500; ++i) {
    const auto doc = segment_sentences(clean_text(random_text(rng), hin), hin);
    for (const auto& s : doc.sentences) {
      CHECK_FALSE(s.empty());
      CHECK(s == utf8::trim(s));
      CHECK(utf8::decode(s).find(doc.sentinel) == std::u32string::npos);
    }
  }
}

TEST_CASE("property: clean_text is idempotent") {
  std::mt19937 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_noisy(rng);
    const auto once = clean_text(x, hin);
    CHECK(clean_text(once, hin) == once);
  }
}

TEST_CASE("property: segmentation preserves words") {
  std::mt19937 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto x = clean_text(random_text(rng), hin);
    std::vector<std::string> after;
    for (const auto& s : sentences(x, hin))
      for (const auto& w : bare_words(s)) after.push_back(w);
    auto before = bare_words(x);
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);
  }
}

TEST_CASE("property: joined sentences equal the text without terminal marks") {
  std::mt19937 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto x = clean_text(random_text(rng), hin);
    std::string joined;
    for (const auto& s : sentences(x, hin)) joined += (joined.empty() ? "" : " ") + s;
    CHECK(clean_text(joined, hin) == strip_terminals(x, TerminalMarks::defaults().marks(hin)));
  }
}

TEST_CASE("noise config syntax") {
  const auto cfg = NoiseConfig::parse(
      "# version: 7\n"
      "# comment\n"
      "\n"
      "UM\n"
      "re:\\(laughs\\)\n"
      "\\u2669\n"
      "@hin जी\n");
  CHECK(cfg.version() == "7");
  CHECK(cfg.size() == 4);
  CHECK(clean_text("UM hello (laughs) ♩ जी", eng, cfg) == "hello जी");
  CHECK(clean_text("UM hello (laughs) ♩ जी", hin, cfg) == "hello");
  CHECK(NoiseConfig::defaults().version() == "1");

  CHECK_THROWS_AS(NoiseConfig::parse("re:([\n"), ParseError);
  CHECK_THROWS_AS(NoiseConfig::parse("\\u12\n"), ParseError);
  CHECK_THROWS_AS(NoiseConfig::parse("@hin\n"), ParseError);
  CHECK_THROWS_AS(NoiseConfig::parse("@xyz foo\n"), ParseError);

  const auto dir = fixture::temp_dir("noise");
  write_file_atomic(dir / "noise.txt", "foo\n");
  CHECK(clean_text("foo bar", eng, NoiseConfig::load(dir / "noise.txt")) == "bar");
  CHECK_THROWS_AS(NoiseConfig::load(dir / "absent.txt"), MissingInputError);
}

TEST_CASE("terminal marks config") {
  const auto marks = TerminalMarks::parse("# extra\neng: ;\n");
  CHECK(segment_sentences("a; b", eng, kDefaultSentinel, marks).sentences == std::vector<std::string>{"a", "b"});
  CHECK(marks.marks(hin).find(U'।') != std::u32string::npos);
  CHECK_THROWS_AS(TerminalMarks::parse("eng ;\n"), ParseError);
}
