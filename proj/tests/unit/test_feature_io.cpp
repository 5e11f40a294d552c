#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "stcorpus/errors.hpp"
#include "stcorpus/feature_io.hpp"
#include "stcorpus/io_util.hpp"

using namespace stcorpus;

namespace {

FeatureMatrix vad(std::vector<float> p, float fs = 0.02f) {
  FeatureMatrix m;
  m.kind = FeatureKind::vad_probs;
  m.rows = static_cast<std::uint32_t>(p.size());
  m.cols = 1;
  m.frame_seconds = fs;
  m.data = std::move(p);
  return m;
}

FeatureMatrix embeddings(std::uint32_t rows, std::uint32_t cols, float base = 0.0f) {
  FeatureMatrix m;
  m.kind = FeatureKind::embeddings;
  m.rows = rows;
  m.cols = cols;
  for (std::uint32_t i = 0; i < rows * cols; ++i) m.data.push_back(base + static_cast<float>(i) * 0.25f);
  return m;
}

}  // namespace

TEST_CASE("golden bytes of a 1x1 vad file") {
  const std::string bytes = encode_features(vad({0.5f}, 0.5f));
  const std::string expected("BAF1\x02\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x3f\x00\x00\x00\x3f", 21);
  CHECK(bytes.size() == 21);
  CHECK(bytes == expected);
}

TEST_CASE("golden bytes of a 2x3 embeddings file") {
  const std::string bytes = encode_features(embeddings(2, 3));
  CHECK(bytes.size() == 41);
  CHECK(bytes.substr(0, 17) == std::string("BAF1\x01\x02\x00\x00\x00\x03\x00\x00\x00\x00\x00\x00\x00", 17));
  // 1.25f = 0x3FA00000, the sixth value
  CHECK(bytes.substr(37, 4) == std::string("\x00\x00\xa0\x3f", 4));
}

TEST_CASE("normalized logits row passes, unnormalized fails") {
  auto ok = fixture::log_matrix({{0.5, 0.5}}, 0.02f);
  CHECK_NOTHROW(ok.validate());
  FeatureMatrix bad = ok;
  bad.data = {0.0f, 0.0f};
  try {
    bad.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "data");
  }
  CHECK_THROWS_AS(decode_features(encode_features(bad)), ValidationError);
}

TEST_CASE("logits tolerance edge") {
  FeatureMatrix m = fixture::log_matrix({{0.25, 0.75}}, 0.02f);
  for (float& x : m.data) x += 0.0009f;
  CHECK_NOTHROW(m.validate());
  for (float& x : m.data) x += 0.0011f;
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("kind-specific invariants") {
  CHECK_THROWS_AS(vad({1.5f}).validate(), ValidationError);
  CHECK_THROWS_AS(vad({-0.1f}).validate(), ValidationError);
  auto two_col = vad({0.1f, 0.2f});
  two_col.rows = 1;
  two_col.cols = 2;
  CHECK_THROWS_AS(two_col.validate(), ValidationError);
  auto e = embeddings(1, 2);
  e.frame_seconds = 0.02f;
  CHECK_THROWS_AS(e.validate(), ValidationError);
  auto empty = embeddings(0, 4);
  CHECK_THROWS_AS(empty.validate(), ValidationError);
  auto ragged = embeddings(2, 2);
  ragged.data.pop_back();
  CHECK_THROWS_AS(ragged.validate(), ValidationError);
}

TEST_CASE("decode errors") {
  std::string bytes = encode_features(embeddings(2, 3));
  std::string bad_magic = bytes;
  bad_magic.replace(0, 4, "XXXX");
  CHECK_THROWS_AS(decode_features(bad_magic), FormatError);

  std::string bad_kind = bytes;
  bad_kind[4] = 7;
  CHECK_THROWS_AS(decode_features(bad_kind), FormatError);

  try {
    decode_features(bytes.substr(0, 30));
    FAIL("expected LengthError");
  } catch (const LengthError& e) {
    CHECK(e.expected() == 41);
    CHECK(e.actual() == 30);
  }
  CHECK_THROWS_AS(decode_features(bytes.substr(0, 10)), LengthError);
  CHECK_THROWS_AS(decode_features(bytes + "x"), LengthError);
}

TEST_CASE("file round-trip and missing file") {
  const auto dir = fixture::temp_dir("baf");
  const auto m = fixture::log_matrix({{0.1, 0.9}, {0.7, 0.3}}, 0.04f);
  write_features(m, dir / feature_file_name("doc", "logits"));
  CHECK(read_features(dir / "doc.logits.baf") == m);
  CHECK_THROWS_AS(read_features(dir / "absent.baf"), MissingInputError);
  write_file_atomic(dir / "junk.baf", "XXXXjunkjunkjunkjunk");
  CHECK_THROWS_AS(read_features(dir / "junk.baf"), FormatError);
}

TEST_CASE("property: random matrices round-trip with size 17 + 4 rows cols") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint32_t> dim(1, 12);
  std::normal_distribution<float> g(0.0f, 3.0f);
  for (int trial = 0; trial < 300; ++trial) {
    auto m = embeddings(dim(rng), dim(rng));
    for (float& x : m.data) x = g(rng);
    const auto bytes = encode_features(m);
    CHECK(bytes.size() == 17 + 4 * std::size_t{m.rows} * m.cols);
    const auto back = decode_features(bytes);
    CHECK(back.rows == m.rows);
    CHECK(back.cols == m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i)
      CHECK(std::bit_cast<std::uint32_t>(back.data[i]) == std::bit_cast<std::uint32_t>(m.data[i]));
  }
}

TEST_CASE("property: distinct matrices give distinct files") {
  const auto a = embeddings(2, 3), b = embeddings(3, 2), c = embeddings(2, 3, 1.0f);
  CHECK(encode_features(a) != encode_features(b));
  CHECK(encode_features(a) != encode_features(c));
}

TEST_CASE("vocabulary JSON") {
  const auto v = parse_vocab(R"({"tokens":["<b>","a","b"],"blank_index":0})");
  CHECK(v.size() == 3);
  CHECK(v.blank_index() == 0);
  CHECK(v.find("b") == std::optional<std::size_t>(2));
  CHECK_FALSE(v.find("c").has_value());
  CHECK_FALSE(v.word_delimiter().has_value());

  auto field_of = [](const char* json) {
    try {
      parse_vocab(json);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string("none");
  };
  CHECK(field_of(R"({"tokens":["<b>","a","b"],"blank_index":3})") == "blank_index");
  CHECK(field_of(R"({"tokens":["<b>","a","a"],"blank_index":0})") == "tokens");
  CHECK(field_of(R"({"tokens":[],"blank_index":0})") == "tokens");
  CHECK(field_of(R"({"tokens":["<b>","a"],"blank_index":0,"word_delimiter":"|"})") == "word_delimiter");
  CHECK(field_of(R"({"tokens":["<b>","a"],"blank_index":-1})") == "blank_index");
  CHECK_THROWS_AS(parse_vocab("{"), ParseError);

  const auto d = parse_vocab(R"({"tokens":["<b>","|","a"],"blank_index":0,"word_delimiter":"|"})");
  CHECK(d.word_delimiter() == std::optional<std::size_t>(1));
}

TEST_CASE("vocabulary file written by the fixture") {
  const auto dir = fixture::temp_dir("vocab");
  fixture::write_char_vocab(dir);
  const auto v = read_vocab(dir / "vocab.json");
  CHECK(v.size() == 28);
  CHECK(v.token(2) == "a");
  CHECK(v.word_delimiter() == std::optional<std::size_t>(1));
}
