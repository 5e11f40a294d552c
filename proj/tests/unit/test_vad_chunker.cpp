#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "stcorpus/errors.hpp"
#include "stcorpus/vad_chunker.hpp"

using namespace stcorpus;

namespace {

FeatureMatrix probs(std::vector<float> p, float fs) {
  FeatureMatrix m;
  m.kind = FeatureKind::vad_probs;
  m.rows = static_cast<std::uint32_t>(p.size());
  m.cols = 1;
  m.frame_seconds = fs;
  m.data = std::move(p);
  return m;
}

FeatureMatrix stream(std::mt19937& rng, std::size_t frames) {
  // Alternating speech and silence runs with noise.
  std::uniform_int_distribution<int> run(1, 400);
  std::uniform_real_distribution<float> noise(0.0f, 0.3f);
  std::vector<float> p;
  bool speech = rng() % 2;
  while (p.size() < frames) {
    const int n = run(rng);
    for (int k = 0; k < n && p.size() < frames; ++k) p.push_back(speech ? 1.0f - noise(rng) : noise(rng));
    speech = !speech;
  }
  return probs(std::move(p), 0.02f);
}

double covered(const std::vector<SpeechSpan>& spans) {
  double s = 0.0;
  for (const auto& x : spans) s += x.duration();
  return s;
}

}  // namespace

TEST_CASE("pure silence gives no spans") {
  CHECK(detect_speech(probs(std::vector<float>(500, 0.0f), 0.02f), {}).empty());
}

TEST_CASE("pure speech gives one span over the audio") {
  const auto spans = detect_speech(probs(std::vector<float>(500, 1.0f), 0.02f), {});
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == SpeechSpan{0.0, 10.0});
}

TEST_CASE("25-frame hysteresis case") {
  std::vector<float> p(10, 0.9f);
  p.insert(p.end(), 5, 0.1f);
  p.insert(p.end(), 10, 0.9f);
  VadConfig cfg;
  cfg.min_silence_s = 0.3;
  cfg.min_speech_s = 0.25;
  cfg.pad_s = 0.0;
  const auto spans = detect_speech(probs(p, 0.1f), cfg);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == SpeechSpan{0.0, 1.0});
  CHECK(spans[1] == SpeechSpan{1.5, 2.5});
}

TEST_CASE("short silences do not close a span, short bursts are dropped") {
  std::vector<float> p(10, 0.9f);
  p.insert(p.end(), 2, 0.1f);
  p.insert(p.end(), 10, 0.9f);
  p.insert(p.end(), 10, 0.0f);
  p.insert(p.end(), 2, 0.9f);
  p.insert(p.end(), 10, 0.0f);
  VadConfig cfg;
  cfg.min_silence_s = 0.3;
  cfg.min_speech_s = 0.25;
  cfg.pad_s = 0.0;
  const auto spans = detect_speech(probs(p, 0.1f), cfg);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == SpeechSpan{0.0, 2.2});
}

TEST_CASE("values between the thresholds keep an open span open") {
  std::vector<float> p = {0.2f, 0.6f, 0.4f, 0.4f, 0.4f, 0.6f, 0.1f, 0.1f, 0.1f, 0.4f};
  VadConfig cfg;
  cfg.min_silence_s = 0.2;
  cfg.min_speech_s = 0.0;
  cfg.pad_s = 0.0;
  const auto spans = detect_speech(probs(p, 0.1f), cfg);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == SpeechSpan{0.1, 0.6});
}

TEST_CASE("padding is clipped and touching spans merge") {
  std::vector<float> p(5, 0.9f);
  p.insert(p.end(), 4, 0.0f);
  p.insert(p.end(), 5, 0.9f);
  VadConfig cfg;
  cfg.min_silence_s = 0.2;
  cfg.min_speech_s = 0.1;
  cfg.pad_s = 0.2;
  const auto spans = detect_speech(probs(p, 0.1f), cfg);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == SpeechSpan{0.0, 1.4});
}

TEST_CASE("over-long spans split at the quietest frame of the middle third") {
  std::vector<float> p(100, 0.9f);
  p[40] = 0.6f;
  p[10] = 0.5f;  // outside the middle third
  VadConfig cfg;
  cfg.max_chunk_s = 6.0;
  cfg.pad_s = 0.0;
  const auto spans = detect_speech(probs(p, 0.1f), cfg);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == SpeechSpan{0.0, 4.0});
  CHECK(spans[1] == SpeechSpan{4.0, 10.0});
}

TEST_CASE("errors") {
  auto m = probs({0.5f}, 0.02f);
  m.kind = FeatureKind::embeddings;
  CHECK_THROWS_AS(detect_speech(m, {}), PreconditionError);
  CHECK_THROWS_AS(detect_speech(probs({0.5f}, 0.0f), {}), PreconditionError);
  VadConfig bad;
  bad.off_threshold = 0.6;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.max_chunk_s = 0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.pad_s = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.off_threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("property: spans are sorted, disjoint, bounded and within max_chunk") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> chunk(0.5, 8.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = stream(rng, 2000);
    VadConfig cfg;
    cfg.max_chunk_s = chunk(rng);
    const auto spans = detect_speech(m, cfg);
    const double audio = m.rows * static_cast<double>(m.frame_seconds);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      CHECK(spans[i].start_s >= 0.0);
      CHECK(spans[i].start_s < spans[i].end_s);
      CHECK(spans[i].end_s <= audio + 1e-9);
      CHECK(spans[i].duration() <= cfg.max_chunk_s + 1e-9);
      if (i) CHECK(spans[i - 1].end_s <= spans[i].start_s);
    }
    CHECK(covered(spans) <= audio + 2 * cfg.pad_s * static_cast<double>(spans.size()) + 1e-9);
  }
}

TEST_CASE("property: raising on_threshold never adds speech") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = stream(rng, 1500);
    VadConfig lo;
    lo.on_threshold = 0.5;
    VadConfig hi = lo;
    hi.on_threshold = 0.5 + (rng() % 45) / 100.0;
    CHECK(covered(detect_speech(m, hi)) <= covered(detect_speech(m, lo)) + 1e-9);
  }
}

TEST_CASE("slice_logits index arithmetic") {
  std::vector<std::vector<double>> rows(100, {0.25, 0.75});
  const auto logits = fixture::log_matrix(rows, 0.02f);

  const auto all = slice_logits(logits, {0.0, 2.0});
  CHECK(all.start_frame == 0);
  CHECK(all.logits == logits);

  const auto mid = slice_logits(logits, {0.50, 1.00});
  CHECK(mid.start_frame == 25);
  CHECK(mid.logits.rows == 26);
  CHECK(mid.logits.frame_seconds == logits.frame_seconds);

  CHECK(slice_logits(logits, {0.0, 0.0}).logits.rows == 1);
  CHECK(slice_logits(logits, {0.02, 0.04}).logits.rows == 2);
  CHECK(slice_logits(logits, {1.98, 2.0}).logits.rows == 1);

  CHECK_THROWS_AS(slice_logits(logits, {1.0, 2.5}), PreconditionError);
  CHECK_THROWS_AS(slice_logits(logits, {-0.1, 1.0}), PreconditionError);
  CHECK_THROWS_AS(slice_logits(logits, {1.0, 0.5}), PreconditionError);
}

TEST_CASE("span_frames snaps float noise to frame boundaries") {
  CHECK(span_frames({0.3, 0.6}, 0.1, 100) == std::pair<std::uint32_t, std::uint32_t>{3, 6});
  CHECK(span_frames({0.29999999, 0.60000001}, 0.1, 100) == std::pair<std::uint32_t, std::uint32_t>{3, 6});
}
