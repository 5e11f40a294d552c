#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>

#include "fixtures.hpp"
#include "stcorpus/corpus_model.hpp"
#include "stcorpus/errors.hpp"
#include "stcorpus/io_util.hpp"

using namespace stcorpus;

namespace {

const char* kLine =
    R"({"doc_id":"d1","audio_path":"audio/d1.wav","audio_seconds":10.0,"sample_rate_hz":16000,"src_lang":"eng",)"
    R"("tgt_lang":"hin","start_s":0.0,"end_s":2.5,"source_text":"hello","target_text":"नमस्ते","sigma":0.9,"tau":0.95,)"
    R"("provenance":"mined"})";

std::string with(std::string line, const std::string& from, const std::string& to) {
  line.replace(line.find(from), from.size(), to);
  return line;
}

Manifest random_manifest(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  static const std::vector<std::string> langs = {"hin", "ben", "tam", "urd", "mni"};
  Manifest m;
  for (std::size_t i = 0; i < n; ++i) {
    const double start = std::floor(u(rng) * 1e7) / 1e6;
    const double end = quantize_seconds(start + 0.001 + std::floor(u(rng) * 2e7) / 1e6);
    const auto& lang = langs[i % langs.size()];
    auto r = fixture::make_record("doc" + std::to_string(i), i % 2 ? lang : "eng", i % 2 ? "eng" : lang, start, end,
                                  QualityScores{u(rng) * 2 - 1, u(rng)});
    r.source_text = "src \"quoted\" \\ " + std::to_string(u(rng));
    r.target_text = "लक्ष्य " + std::to_string(i);
    if (i % 3 == 0) {
      r.scores.reset();
      r.provenance = Provenance::existing;
    }
    m.records.push_back(r);
  }
  return m;
}

}  // namespace

TEST_CASE("empty manifest") {
  const auto m = parse_manifest("");
  CHECK(m.records.empty());
  CHECK(manifest_duration(m) == 0.0);
}

TEST_CASE("one valid line") {
  const auto m = parse_manifest(std::string(kLine) + "\n");
  REQUIRE(m.records.size() == 1);
  CHECK(manifest_duration(m) == 2.5);
  CHECK(m.records[0].direction.target.str() == "hin");
  CHECK(m.source_lines == std::vector<std::size_t>{1});
}

TEST_CASE("end before start names end_s with the line") {
  const std::string bad = with(kLine, R"("end_s":2.5)", R"("end_s":-1.0)");
  try {
    parse_manifest(std::string(kLine) + "\n" + bad + "\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "end_s");
    CHECK(e.line() == 2);
  }
}

TEST_CASE("malformed JSON reports the line") {
  try {
    parse_manifest(std::string(kLine) + "\n\n{not json\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("field violations name the field") {
  auto field_of = [](const std::string& line) {
    try {
      parse_manifest(line);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string("none");
  };
  CHECK(field_of(with(kLine, R"("sigma":0.9)", R"("sigma":1.5)")) == "sigma");
  CHECK(field_of(with(kLine, R"("tau":0.95)", R"("tau":-0.1)")) == "tau");
  CHECK(field_of(with(kLine, R"("sample_rate_hz":16000)", R"("sample_rate_hz":8000)")) == "sample_rate_hz");
  CHECK(field_of(with(kLine, R"("source_text":"hello")", R"("source_text":"  ")")) == "source_text");
  CHECK(field_of(with(kLine, R"("end_s":2.5)", R"("end_s":11.0)")) == "end_s");
  CHECK(field_of(with(kLine, R"("tgt_lang":"hin")", R"("tgt_lang":"xxx")")) == "lang");
  CHECK(field_of(with(kLine, R"("tgt_lang":"hin")", R"("tgt_lang":"eng")")) == "direction");
  CHECK(field_of(with(kLine, R"("sigma":0.9,)", "")) == "sigma");
  CHECK(field_of(with(kLine, R"("provenance":"mined")", R"("provenance":"scraped")")) == "provenance");
  CHECK(field_of(with(kLine, R"("doc_id":"d1",)", "")) == "doc_id");
}

TEST_CASE("mined records carry scores") {
  const std::string no_scores = with(kLine, R"("sigma":0.9,"tau":0.95,)", "");
  CHECK_THROWS_AS(parse_manifest(no_scores), ValidationError);
  const auto m = parse_manifest(with(no_scores, R"("provenance":"mined")", R"("provenance":"existing")"));
  REQUIRE(m.records.size() == 1);
  CHECK_FALSE(m.records[0].scores.has_value());
}

TEST_CASE("threshold values round-trip bit-exactly") {
  Manifest m;
  m.records.push_back(fixture::make_record("d", "eng", "hin", 0.0, 1.0, QualityScores{0.6, 0.8}));
  const auto back = parse_manifest(format_manifest(m));
  REQUIRE(back.records.size() == 1);
  const double s = back.records[0].scores->sigma, t = back.records[0].scores->tau;
  CHECK(std::memcmp(&s, &m.records[0].scores->sigma, sizeof s) == 0);
  CHECK(std::memcmp(&t, &m.records[0].scores->tau, sizeof t) == 0);
}

TEST_CASE("serialized key order") {
  Manifest m;
  m.records.push_back(fixture::make_record("d", "eng", "hin", 0.0, 1.0, QualityScores{0.6, 0.8}));
  const std::string line = format_manifest(m);
  const std::vector<std::string> keys = {"doc_id", "audio_path", "audio_seconds", "sample_rate_hz", "src_lang",
                                         "tgt_lang", "start_s", "end_s", "source_text", "target_text",
                                         "sigma", "tau", "provenance"};
  std::size_t pos = 0;
  for (const auto& k : keys) {
    const auto at = line.find("\"" + k + "\"");
    REQUIRE(at != std::string::npos);
    CHECK(at >= pos);
    pos = at;
  }
}

TEST_CASE("file round-trip and unwritable path") {
  const auto dir = fixture::temp_dir("manifest");
  std::mt19937_64 rng(3);
  const auto m = random_manifest(rng, 3);
  write_manifest(m, dir / "m.jsonl");
  CHECK(read_manifest(dir / "m.jsonl") == m);

  write_file_atomic(dir / "blocker", "x");
  CHECK_THROWS_AS(write_manifest(m, dir / "blocker" / "m.jsonl"), IoError);
  CHECK_THROWS_AS(read_manifest(dir / "absent.jsonl"), MissingInputError);
}

TEST_CASE("durations") {
  Manifest m;
  CHECK(manifest_duration(m) == 0.0);
  m.records.push_back(fixture::make_record("a", "eng", "hin", 0.0, 1.0, QualityScores{0.9, 0.9}));
  m.records.push_back(fixture::make_record("b", "eng", "hin", 0.0, 2.0, QualityScores{0.9, 0.9}));
  CHECK(manifest_duration(m) == 3.0);

  Manifest big;
  for (int i = 0; i < 120; ++i)
    big.records.push_back(fixture::make_record("d" + std::to_string(i), "eng", "ben", 5.0, 15.0, QualityScores{0.9, 0.9}));
  CHECK(manifest_duration_us(big) == 1'200'000'000);
  CHECK(manifest_duration(big) == 1200.0);
}

TEST_CASE("property: random manifests round-trip field for field") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_manifest(rng, 1 + trial % 7);
    const auto back = parse_manifest(format_manifest(m));
    REQUIRE(back.records.size() == m.records.size());
    for (std::size_t i = 0; i < m.records.size(); ++i) CHECK(back.records[i] == m.records[i]);
  }
}

TEST_CASE("property: duration is invariant under reordering") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = random_manifest(rng, 20);
    const auto before = manifest_duration_us(m);
    std::shuffle(m.records.begin(), m.records.end(), rng);
    CHECK(manifest_duration_us(m) == before);
  }
}

TEST_CASE("provenance and split names") {
  for (auto p : {Provenance::existing, Provenance::mined, Provenance::synthetic})
    CHECK(parse_provenance(to_string(p)) == p);
  CHECK(to_string(Split::test) == "test");
  CHECK(quantize_seconds(1.0000004) == 1.0);
  CHECK(to_micros(2.5) == 2'500'000);
}
