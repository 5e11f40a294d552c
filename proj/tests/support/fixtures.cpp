#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>

#include <unistd.h>

#include <json.hpp>

#include "stcorpus/io_util.hpp"

namespace fs = std::filesystem;
using namespace stcorpus;

namespace fixture {

namespace {

constexpr float kFrame = 0.04f;
constexpr std::size_t kSilence = 10;
constexpr std::size_t kVocab = 28;  // blank, '|', a..z
constexpr std::size_t kBlank = 0;
constexpr std::size_t kDelim = 1;

std::size_t letter(char c) { return 2 + static_cast<std::size_t>(c - 'a'); }

std::vector<double> frame(std::size_t top, double p_top, std::size_t second = kVocab, double p_second = 0.0) {
  const std::size_t rest = kVocab - (second < kVocab ? 2 : 1);
  std::vector<double> row(kVocab, (1.0 - p_top - p_second) / static_cast<double>(rest));
  row[top] = p_top;
  if (second < kVocab) row[second] = p_second;
  return row;
}

std::string strip_terminal(std::string s) {
  for (std::string_view mark : {".", "।"}) {
    if (s.size() >= mark.size() && s.compare(s.size() - mark.size(), mark.size(), mark) == 0)
      s.erase(s.size() - mark.size());
  }
  return s;
}

}  // namespace

fs::path temp_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const auto dir = fs::temp_directory_path() /
                   ("stcorpus_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

FeatureMatrix log_matrix(const std::vector<std::vector<double>>& probs, float frame_seconds) {
  FeatureMatrix m;
  m.kind = FeatureKind::logits;
  m.rows = static_cast<std::uint32_t>(probs.size());
  m.cols = probs.empty() ? 0 : static_cast<std::uint32_t>(probs[0].size());
  m.frame_seconds = frame_seconds;
  for (const auto& row : probs)
    for (double p : row) m.data.push_back(static_cast<float>(std::log(p)));
  return m;
}

FeatureMatrix quantized_logits(std::mt19937_64& rng, std::size_t frames, std::size_t vocab) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  FeatureMatrix m;
  m.kind = FeatureKind::logits;
  m.rows = static_cast<std::uint32_t>(frames);
  m.cols = static_cast<std::uint32_t>(vocab);
  m.frame_seconds = 0.02f;
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<double> p(vocab, 1.0);
    if (rng() % 4 != 0)
      for (double& x : p) x = u(rng) * u(rng);
    double z = 0.0;
    for (double x : p) z += x;
    for (double x : p) m.data.push_back(static_cast<float>(std::round(std::log(x / z) * 1024.0) / 1024.0));
  }
  return m;
}

void write_char_vocab(const fs::path& input_dir) {
  nlohmann::json j;
  std::vector<std::string> tokens = {"<blank>", "|"};
  for (char c = 'a'; c <= 'z'; ++c) tokens.emplace_back(1, c);
  j["tokens"] = tokens;
  j["blank_index"] = kBlank;
  j["word_delimiter"] = "|";
  write_file_atomic(input_dir / "vocab.json", j.dump(2) + "\n");
}

void write_document(const fs::path& input_dir, const std::string& doc_id, const std::string& tgt_lang,
                    const std::vector<std::string>& sentences, const std::vector<std::string>& translations,
                    const std::vector<int>& substitutions, const std::vector<double>& sigmas) {
  std::vector<std::vector<double>> logit_probs;
  std::vector<float> vad;
  auto silence = [&] {
    for (std::size_t k = 0; k < kSilence; ++k) {
      logit_probs.push_back(frame(kBlank, 0.9));
      vad.push_back(0.05f);
    }
  };
  silence();
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const std::string text = strip_terminal(sentences[s]);
    int letters_seen = 0, substituted = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      std::vector<double> row;
      if (c == ' ') {
        row = frame(kDelim, 0.9);
      } else {
        const bool sub = substituted < substitutions[s] && letters_seen % 3 == 1;
        if (sub) ++substituted;
        row = sub ? frame(letter('q'), 0.6, letter(c), 0.3) : frame(letter(c), 0.9);
        ++letters_seen;
      }
      for (int k = 0; k < 2; ++k) {
        logit_probs.push_back(row);
        vad.push_back(0.95f);
      }
      logit_probs.push_back(frame(kBlank, 0.9));
      vad.push_back(0.95f);
    }
    if (substituted != substitutions[s]) throw std::logic_error("sentence too short for its substitutions");
    silence();
  }

  const fs::path feats = input_dir / "features";
  write_features(log_matrix(logit_probs, kFrame), feats / feature_file_name(doc_id, "logits"));

  FeatureMatrix v;
  v.kind = FeatureKind::vad_probs;
  v.rows = static_cast<std::uint32_t>(vad.size());
  v.cols = 1;
  v.frame_seconds = kFrame;
  v.data = vad;
  write_features(v, feats / feature_file_name(doc_id, "vad"));

  constexpr std::uint32_t dim = 16;
  FeatureMatrix src, tgt;
  src.kind = tgt.kind = FeatureKind::embeddings;
  src.cols = tgt.cols = dim;
  src.rows = static_cast<std::uint32_t>(sentences.size());
  tgt.rows = static_cast<std::uint32_t>(translations.size());
  src.data.assign(src.rows * dim, 0.0f);
  tgt.data.assign(tgt.rows * dim, 0.0f);
  for (std::size_t i = 0; i < sentences.size(); ++i) src.data[i * dim + i] = 1.0f;
  for (std::size_t j = 0; j < translations.size(); ++j) {
    const double sg = j < sigmas.size() ? sigmas[j] : 0.0;
    tgt.data[j * dim + j] = static_cast<float>(sg);
    tgt.data[j * dim + 8 + j] = static_cast<float>(std::sqrt(1.0 - sg * sg));
  }
  write_features(src, feats / feature_file_name(doc_id, "src.emb"));
  write_features(tgt, feats / feature_file_name(doc_id, "tgt.emb"));

  auto joined = [](const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
    return out;
  };
  nlohmann::ordered_json d;
  d["doc_id"] = doc_id;
  d["audio_path"] = "audio/" + doc_id + ".wav";
  d["audio_seconds"] = quantize_seconds(static_cast<double>(logit_probs.size()) * kFrame);
  d["sample_rate_hz"] = 16000;
  d["src_lang"] = "eng";
  d["tgt_lang"] = tgt_lang;
  d["transcript"] = joined(sentences);
  d["translation"] = joined(translations);
  std::ofstream out(input_dir / "docs.jsonl", std::ios::app | std::ios::binary);
  out << d.dump() << "\n";
}

E2ECorpus write_e2e_corpus(const fs::path& input_dir) {
  struct Doc {
    std::string id, lang;
    std::vector<std::string> src, tgt;
    std::vector<int> subs;
    std::vector<double> sigma;
  };
  const std::vector<Doc> docs = {
      {"doc_a",
       "hin",
       {"hello world.", "good morning friends.", "we walk to the river."},
       {"नमस्ते दुनिया।", "सुप्रभात दोस्तों।", "हम नदी तक चलते हैं।"},
       {0, 0, 3},
       {0.92, 0.55, 0.81}},
      {"doc_b",
       "ben",
       {"the sky is blue.", "birds sing at dawn."},
       {"আকাশ নীল।", "পাখিরা ভোরে গান গায়।"},
       {4, 1},
       {0.70, 0.95}},
      {"doc_c",
       "tam",
       {"open the door.", "close the window.", "turn on the light."},
       {"கதவைத் திற.", "ஜன்னலை மூடு.", "விளக்கை போடு."},
       {0, 0, 2},
       {0.66, 0.30, 0.88}},
  };
  write_char_vocab(input_dir);
  E2ECorpus c;
  for (const auto& d : docs) {
    write_document(input_dir, d.id, d.lang, d.src, d.tgt, d.subs, d.sigma);
    for (std::size_t i = 0; i < d.src.size(); ++i) {
      DesignedUtterance u;
      u.doc_id = d.id;
      u.source = strip_terminal(d.src[i]);
      u.target = strip_terminal(d.tgt[i]);
      u.sigma = d.sigma[i];
      u.tau = 1.0 - static_cast<double>(d.subs[i]) / static_cast<double>(u.source.size());
      u.kept = u.sigma >= 0.6 && u.tau >= 0.8;
      c.utterances.push_back(u);
      ++c.expected_mined;
      if (u.kept) ++c.expected_kept;
    }
  }
  return c;
}

UtteranceRecord make_record(const std::string& doc_id, const std::string& src, const std::string& tgt, double start_s,
                            double end_s, std::optional<QualityScores> scores, Provenance provenance) {
  UtteranceRecord r;
  r.doc = {doc_id, "audio/" + doc_id + ".wav", std::max(end_s, 1.0), kSampleRateHz};
  r.direction = Direction::make(LangCode::parse(src), LangCode::parse(tgt));
  r.start_s = start_s;
  r.end_s = end_s;
  r.source_text = "source " + doc_id;
  r.target_text = "target " + doc_id;
  r.scores = scores;
  r.provenance = provenance;
  return r;
}

Manifest sampling_manifest(std::uint64_t seed) {
  static const std::vector<std::string> langs = {"asm", "ben", "guj", "hin", "kan", "mal", "mar", "npi", "ory", "pan"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ms(1000, 15000);
  Manifest m;
  for (std::size_t k = 0; k < 300; ++k) {
    for (const auto& lang : langs) {
      const double dur = ms(rng) / 1000.0;
      m.records.push_back(make_record("doc_" + lang + "_" + std::to_string(k), "eng", lang, 0.0, dur,
                                      QualityScores{0.9, 0.9}));
    }
  }
  return m;
}

}  // namespace fixture
