#include "stcorpus/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "stcorpus/bitext_dp.hpp"
#include "stcorpus/ctc_aligner.hpp"
#include "stcorpus/dataset_builder.hpp"
#include "stcorpus/errors.hpp"
#include "stcorpus/feature_io.hpp"
#include "stcorpus/io_util.hpp"
#include "stcorpus/metrics.hpp"
#include "stcorpus/quality.hpp"
#include "stcorpus/utf8.hpp"
#include "stcorpus/vad_chunker.hpp"

namespace stcorpus {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::normalize: return "normalize";
    case Stage::chunk: return "chunk";
    case Stage::align: return "align";
    case Stage::score: return "score";
    case Stage::mine: return "mine";
    case Stage::filter: return "filter";
    case Stage::sample: return "sample";
    case Stage::stats: return "stats";
    case Stage::chrf: return "chrf";
  }
  return "?";
}

Stage parse_stage(std::string_view s) {
  for (Stage st : {Stage::normalize, Stage::chunk, Stage::align, Stage::score, Stage::mine, Stage::filter,
                   Stage::sample, Stage::stats, Stage::chrf})
    if (to_string(st) == s) return st;
  throw ConfigError("unknown stage '" + std::string(s) + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const MissingInputError*>(&e)) return exit_code::missing_input;
  if (dynamic_cast<const ConfigError*>(&e)) return exit_code::config;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const FormatError*>(&e) || dynamic_cast<const LengthError*>(&e) ||
      dynamic_cast<const DecodeError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
      dynamic_cast<const InfeasibleError*>(&e) || dynamic_cast<const PreconditionError*>(&e) ||
      dynamic_cast<const DegenerateInputError*>(&e) || dynamic_cast<const nlohmann::json::exception*>(&e))
    return exit_code::validation;
  return exit_code::failure;
}

int exit_code_for(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return exit_code_for(ex);
  } catch (...) {
    return exit_code::failure;
  }
}

namespace {

ojson load_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void save_json(const fs::path& path, const ojson& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::vector<std::string> strings(const ojson& j) {
  std::vector<std::string> out;
  for (const auto& s : j) out.push_back(s.get<std::string>());
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(std::move(line));
    pos = nl + 1;
  }
  return out;
}

// Code points that take part in alignment: everything except whitespace and punctuation.
std::size_t alignable_length(std::string_view text) {
  std::size_t n = 0;
  for (char32_t c : utf8::decode(text))
    if (!utf8::is_whitespace(c) && !utf8::is_punctuation(c)) ++n;
  return n;
}

std::string join(const std::vector<std::string>& v, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t k = begin; k < end; ++k) {
    if (k > begin) out += ' ';
    out += v[k];
  }
  return out;
}

FeatureMatrix read_kind(const fs::path& path, FeatureKind kind) {
  auto m = read_features(path);
  if (m.kind != kind)
    throw ValidationError("kind", path.filename().string() + " holds " + std::string(to_string(m.kind)) +
                                      ", expected " + std::string(to_string(kind)));
  return m;
}

struct AlignedSegment {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
};

std::vector<AlignedSegment> read_aligned(const fs::path& path) {
  const auto j = load_json(path);
  std::vector<AlignedSegment> out;
  for (const auto& s : j.at("segments"))
    out.push_back({s.at("start_frame").get<std::int64_t>(), s.at("end_frame").get<std::int64_t>(),
                   s.at("start_s").get<double>(), s.at("end_s").get<double>(), s.at("text").get<std::string>()});
  return out;
}

}  // namespace

std::vector<InputDoc> parse_docs(std::string_view jsonl) {
  std::vector<InputDoc> docs;
  std::set<std::string> ids;
  std::size_t line_no = 0, pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const std::string_view line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (utf8::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("docs.jsonl: ") + e.what(), line_no);
    }
    auto get = [&]<class T>(const char* key, T) -> T {
      if (!j.is_object() || !j.contains(key)) throw ValidationError(key, "missing", line_no);
      try {
        return j.at(key).get<T>();
      } catch (const nlohmann::json::exception&) {
        throw ValidationError(key, "wrong type", line_no);
      }
    };
    InputDoc d;
    d.ref.doc_id = get("doc_id", std::string{});
    d.ref.audio_path = get("audio_path", std::string{});
    d.ref.audio_seconds = get("audio_seconds", 0.0);
    d.ref.sample_rate_hz = get("sample_rate_hz", 0);
    try {
      d.direction = Direction::make(LangCode::parse(get("src_lang", std::string{})),
                                    LangCode::parse(get("tgt_lang", std::string{})));
    } catch (const ValidationError& e) {
      throw ValidationError(e.field(), e.message(), line_no);
    }
    d.transcript = get("transcript", std::string{});
    d.translation = get("translation", std::string{});
    const auto& id = d.ref.doc_id;
    if (id.empty() || id.front() == '.' || id.find_first_of("/\\") != std::string::npos)
      throw ValidationError("doc_id", "must be a plain file-name stem", line_no);
    if (!(d.ref.audio_seconds > 0.0)) throw ValidationError("audio_seconds", "must be positive", line_no);
    if (d.ref.sample_rate_hz != kSampleRateHz)
      throw ValidationError("sample_rate_hz", "expected 16000, got " + std::to_string(d.ref.sample_rate_hz), line_no);
    if (!ids.insert(id).second) throw ValidationError("doc_id", "duplicate '" + id + "'", line_no);
    docs.push_back(std::move(d));
  }
  std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.ref.doc_id < b.ref.doc_id; });
  return docs;
}

std::vector<InputDoc> read_docs(const fs::path& input_dir) {
  if (!fs::is_directory(input_dir)) throw MissingInputError(input_dir);
  const auto path = input_dir / "docs.jsonl";
  if (!fs::exists(path)) return {};
  return parse_docs(read_file(path));
}

std::string StageSummary::to_json() const {
  ojson j;
  j["stage"] = std::string(stcorpus::to_string(stage));
  j["documents"] = documents;
  j["succeeded"] = succeeded;
  j["failed"] = failed;
  j["skipped"] = skipped;
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  ojson failures = ojson::array();
  for (const auto& o : outcomes)
    if (o.status == "failed") failures.push_back({{"doc_id", o.doc_id}, {"error", o.error}});
  if (!failures.empty()) j["failures"] = failures;
  return j.dump();
}

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  noise_ = cfg_.noise_patterns.empty() ? NoiseConfig::defaults() : NoiseConfig::load(cfg_.noise_patterns);
}

void Pipeline::set_llm_client(std::shared_ptr<const LlmClient> client) { llm_ = std::move(client); }

const LlmClient& Pipeline::llm() {
  if (!llm_) {
    if (cfg_.llm_mode == LlmMode::service)
      llm_ = std::make_shared<LlmClient>(LlmMode::service, LlmEndpoint::from_env());
    else
      llm_ = std::make_shared<LlmClient>(LlmMode::fallback);
  }
  return *llm_;
}

fs::path Pipeline::feature_path(const InputDoc& doc, std::string_view kind) const {
  return cfg_.input_dir / "features" / feature_file_name(doc.ref.doc_id, kind);
}

fs::path Pipeline::work(std::string_view sub, const std::string& doc_id, std::string_view ext) const {
  return cfg_.work_dir / sub / (doc_id + std::string(ext));
}

StageSummary Pipeline::run_stage(Stage s) {
  StageSummary summary;
  switch (s) {
    case Stage::normalize:
    case Stage::chunk:
    case Stage::align:
    case Stage::score:
    case Stage::mine: summary = run_per_document(s); break;
    default: summary = run_global(s); break;
  }
  log_progress(summary);
  return summary;
}

std::vector<StageSummary> Pipeline::run_all() {
  failed_docs_.clear();
  std::vector<StageSummary> out;
  for (Stage s : kPipelineStages) {
    out.push_back(run_stage(s));
    if (out.back().exit_code != exit_code::ok) break;
  }
  return out;
}

StageSummary Pipeline::run_per_document(Stage s) {
  StageSummary summary;
  summary.stage = s;
  std::vector<InputDoc> docs;
  try {
    docs = read_docs(cfg_.input_dir);
    if (s == Stage::normalize) llm();
  } catch (const std::exception& e) {
    summary.exit_code = exit_code_for(e);
    summary.error = e.what();
    return summary;
  }
  summary.documents = docs.size();
  summary.outcomes.resize(docs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < docs.size(); i = next++) {
      auto& o = summary.outcomes[i];
      o.doc_id = docs[i].ref.doc_id;
      if (failed_docs_.count(o.doc_id)) {
        o.status = "skipped";
        continue;
      }
      const auto t0 = std::chrono::steady_clock::now();
      try {
        run_document(s, docs[i]);
        o.status = "ok";
      } catch (const std::exception& e) {
        o.status = "failed";
        o.error = e.what();
        o.exit_code = exit_code_for(e);
        try {
          remove_outputs(s, docs[i]);
        } catch (const std::exception&) {
        }
      }
      o.duration_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const std::size_t n_workers = std::min<std::size_t>(cfg_.worker_count(), std::max<std::size_t>(docs.size(), 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < n_workers; ++k) pool.emplace_back(worker);
  }

  for (const auto& o : summary.outcomes) {
    if (o.status == "ok") ++summary.succeeded;
    if (o.status == "skipped") ++summary.skipped;
    if (o.status == "failed") {
      ++summary.failed;
      failed_docs_.insert(o.doc_id);
      if (cfg_.strict && summary.exit_code == exit_code::ok) {
        summary.exit_code = o.exit_code;
        summary.error = o.doc_id + ": " + o.error;
      }
    }
  }
  if (s == Stage::mine) {
    try {
      assemble_mined(docs, summary.outcomes);
    } catch (const std::exception& e) {
      summary.exit_code = exit_code_for(e);
      summary.error = e.what();
    }
  }
  return summary;
}

StageSummary Pipeline::run_global(Stage s) {
  StageSummary summary;
  summary.stage = s;
  DocOutcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (s) {
      case Stage::filter: filter_stage(); break;
      case Stage::sample: sample_stage(); break;
      case Stage::stats: stats_stage(); break;
      case Stage::chrf: chrf_stage(); break;
      default: throw PreconditionError("not a corpus-level stage");
    }
    o.status = "ok";
    summary.succeeded = 1;
  } catch (const std::exception& e) {
    o.status = "failed";
    o.error = e.what();
    o.exit_code = exit_code_for(e);
    summary.failed = 1;
    summary.exit_code = o.exit_code;
    summary.error = o.error;
  }
  o.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  summary.outcomes.push_back(o);
  return summary;
}

void Pipeline::log_progress(const StageSummary& s) const {
  std::string lines;
  for (const auto& o : s.outcomes) {
    ojson j;
    j["stage"] = std::string(to_string(s.stage));
    j["doc_id"] = o.doc_id.empty() ? ojson(nullptr) : ojson(o.doc_id);
    j["status"] = o.status;
    j["duration_ms"] = o.duration_ms;
    if (!o.error.empty()) j["error"] = o.error;
    lines += j.dump() + "\n";
  }
  if (lines.empty()) return;
  fs::create_directories(cfg_.work_dir);
  std::ofstream out(cfg_.work_dir / "progress.jsonl", std::ios::app | std::ios::binary);
  out << lines;
}

void Pipeline::run_document(Stage s, const InputDoc& doc) {
  switch (s) {
    case Stage::normalize: normalize_doc(doc); break;
    case Stage::chunk: chunk_doc(doc); break;
    case Stage::align: align_doc(doc); break;
    case Stage::score: score_doc(doc); break;
    case Stage::mine: mine_doc(doc); break;
    default: throw PreconditionError("not a per-document stage");
  }
}

void Pipeline::remove_outputs(Stage s, const InputDoc& doc) const {
  const auto& id = doc.ref.doc_id;
  switch (s) {
    case Stage::normalize:
      fs::remove(work("normalized", id, ".json"));
      fs::remove(work("normalized", id, ".src.txt"));
      fs::remove(work("normalized", id, ".tgt.txt"));
      break;
    case Stage::chunk: fs::remove(work("chunks", id, ".json")); break;
    case Stage::align: fs::remove(work("aligned", id, ".json")); break;
    case Stage::score: fs::remove(work("scored", id, ".json")); break;
    case Stage::mine: fs::remove(work("mined", id, ".jsonl")); break;
    default: break;
  }
}

void Pipeline::normalize_doc(const InputDoc& doc) {
  const auto src = doc.direction.source, tgt = doc.direction.target;
  const std::string src_clean = clean_text(doc.transcript, src, noise_);
  const std::string tgt_clean = clean_text(doc.translation, tgt, noise_);
  if (src_clean.empty()) throw ValidationError("transcript", "empty after cleaning");
  if (tgt_clean.empty()) throw ValidationError("translation", "empty after cleaning");

  const std::vector<LlmRequest> requests = {{PromptTask::punctuate, src_clean, src, std::nullopt},
                                            {PromptTask::punctuate, tgt_clean, tgt, std::nullopt}};
  const auto responses = llm_->complete_all(requests);
  ojson warnings = ojson::array();
  auto pick = [&](std::size_t k) {
    if (responses[k].valid) return responses[k].parsed_text;
    warnings.push_back((k == 0 ? "transcript" : "translation") + std::string(": punctuation rejected: ") +
                       responses[k].violation.value_or("invalid response"));
    return requests[k].text;
  };
  const std::string src_punct = pick(0);
  const std::string tgt_punct = pick(1);

  const auto src_sents = segment_sentences(src_punct, src).sentences;
  const auto tgt_sents = segment_sentences(tgt_punct, tgt).sentences;
  if (src_sents.empty()) throw ValidationError("transcript", "no sentences");
  if (tgt_sents.empty()) throw ValidationError("translation", "no sentences");

  ojson j;
  j["doc_id"] = doc.ref.doc_id;
  j["src_lang"] = std::string(src.str());
  j["tgt_lang"] = std::string(tgt.str());
  j["source_sentences"] = src_sents;
  j["target_sentences"] = tgt_sents;
  j["warnings"] = warnings;
  write_file_atomic(work("normalized", doc.ref.doc_id, ".src.txt"), join_lines(src_sents));
  write_file_atomic(work("normalized", doc.ref.doc_id, ".tgt.txt"), join_lines(tgt_sents));
  save_json(work("normalized", doc.ref.doc_id, ".json"), j);
}

void Pipeline::chunk_doc(const InputDoc& doc) {
  const auto probs = read_kind(feature_path(doc, "vad"), FeatureKind::vad_probs);
  const auto spans = detect_speech(probs, cfg_.vad);
  ojson j;
  j["doc_id"] = doc.ref.doc_id;
  j["frame_seconds"] = static_cast<double>(probs.frame_seconds);
  j["chunks"] = ojson::array();
  for (const auto& s : spans) j["chunks"].push_back({{"start_s", s.start_s}, {"end_s", s.end_s}});
  save_json(work("chunks", doc.ref.doc_id, ".json"), j);
}

namespace {

TokenVocab vocab_for(const fs::path& input_dir, LangCode lang) {
  const auto per_lang = input_dir / "vocab" / (std::string(lang.str()) + ".json");
  return read_vocab(fs::exists(per_lang) ? per_lang : input_dir / "vocab.json");
}

}  // namespace

void Pipeline::align_doc(const InputDoc& doc) {
  const auto norm = load_json(work("normalized", doc.ref.doc_id, ".json"));
  const auto chunks_json = load_json(work("chunks", doc.ref.doc_id, ".json"));
  const auto logits = read_kind(feature_path(doc, "logits"), FeatureKind::logits);
  const auto vocab = vocab_for(cfg_.input_dir, doc.direction.source);
  const auto sentences = strings(norm.at("source_sentences"));
  if (sentences.empty()) throw ValidationError("source_sentences", "empty");
  if (logits.rows == 0) throw ValidationError("rows", "logits matrix has no frames");

  const double fs_ = logits.frame_seconds;
  const double total = quantize_seconds(logits.rows * fs_);
  std::vector<SpeechSpan> chunks;
  for (const auto& c : chunks_json.at("chunks")) {
    SpeechSpan s{c.at("start_s").get<double>(), std::min(c.at("end_s").get<double>(), total)};
    if (s.end_s > s.start_s) chunks.push_back(s);
  }
  if (chunks.empty()) chunks.push_back({0.0, total});

  // Sentences go to the chunk holding their midpoint, measured in decoded characters.
  std::vector<double> weight(chunks.size());
  double weight_total = 0.0;
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    const auto [first, last] = span_frames(chunks[k], fs_, logits.rows);
    weight[k] = static_cast<double>(alignable_length(greedy_decode(logits, vocab, first, last)));
    weight_total += weight[k];
  }
  if (weight_total == 0.0) {
    for (std::size_t k = 0; k < chunks.size(); ++k) weight[k] = chunks[k].duration();
    weight_total = std::accumulate(weight.begin(), weight.end(), 0.0);
  }
  std::vector<double> sent_len(sentences.size());
  double sent_total = 0.0;
  for (std::size_t i = 0; i < sentences.size(); ++i) sent_total += sent_len[i] = alignable_length(sentences[i]);
  std::vector<std::size_t> assign(sentences.size());
  {
    double before = 0.0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const double mid = sent_total > 0 ? (before + sent_len[i] / 2.0) / sent_total * weight_total : 0.0;
      before += sent_len[i];
      double acc = 0.0;
      std::size_t k = 0;
      for (; k + 1 < chunks.size(); ++k) {
        acc += weight[k];
        if (mid < acc) break;
      }
      assign[i] = k;
    }
  }

  std::vector<FrameSpan> segs;
  bool fallback = false;
  try {
    for (std::size_t i = 0; i < sentences.size();) {
      std::size_t j = i;
      while (j < sentences.size() && assign[j] == assign[i]) ++j;
      const std::vector<std::string> group(sentences.begin() + i, sentences.begin() + j);
      const auto slice = slice_logits(logits, chunks[assign[i]]);
      const auto r = offset_alignment(ctc_viterbi_align(slice.logits, vocab, build_target(vocab, group)),
                                      slice.start_frame);
      segs.insert(segs.end(), r.segment_spans.begin(), r.segment_spans.end());
      i = j;
    }
  } catch (const InfeasibleError&) {
    fallback = true;
  }
  if (fallback) {
    const auto target = build_target(vocab, sentences);
    const SpeechSpan whole{chunks.front().start_s, chunks.back().end_s};
    const auto slice = slice_logits(logits, whole);
    AlignmentResult r;
    if (slice.logits.rows >= min_ctc_frames(target.tokens))
      r = offset_alignment(ctc_viterbi_align(slice.logits, vocab, target), slice.start_frame);
    else
      r = ctc_viterbi_align(logits, vocab, target);
    segs = r.segment_spans;
  }

  AlignmentResult merged;
  merged.segment_spans = segs;
  merged.frame_seconds = fs_;
  const auto utts = segments_to_utterances(merged, doc.ref, sentences);
  ojson j;
  j["doc_id"] = doc.ref.doc_id;
  j["frame_seconds"] = fs_;
  j["whole_document_fallback"] = fallback;
  j["segments"] = ojson::array();
  for (std::size_t i = 0; i < utts.size(); ++i) {
    j["segments"].push_back({{"start_frame", segs[i].start_frame},
                             {"end_frame", segs[i].end_frame},
                             {"start_s", utts[i].first.start_s},
                             {"end_s", utts[i].first.end_s},
                             {"text", utts[i].second}});
  }
  save_json(work("aligned", doc.ref.doc_id, ".json"), j);
}

void Pipeline::score_doc(const InputDoc& doc) {
  const auto segs = read_aligned(work("aligned", doc.ref.doc_id, ".json"));
  const auto logits = read_kind(feature_path(doc, "logits"), FeatureKind::logits);
  const auto vocab = vocab_for(cfg_.input_dir, doc.direction.source);
  ojson j;
  j["doc_id"] = doc.ref.doc_id;
  j["segments"] = ojson::array();
  for (const auto& s : segs) {
    if (s.start_frame < 0 || s.end_frame < s.start_frame || s.end_frame >= static_cast<std::int64_t>(logits.rows))
      throw ValidationError("end_frame", "aligned segment outside the logits matrix");
    const auto hyp = greedy_decode(logits, vocab, s.start_frame, s.end_frame);
    j["segments"].push_back(
        {{"text", s.text}, {"hypothesis", hyp}, {"tau", alignment_score_tau(s.text, hyp, doc.direction.source)}});
  }
  save_json(work("scored", doc.ref.doc_id, ".json"), j);
}

void Pipeline::mine_doc(const InputDoc& doc) {
  const auto norm = load_json(work("normalized", doc.ref.doc_id, ".json"));
  const auto segs = read_aligned(work("aligned", doc.ref.doc_id, ".json"));
  const auto scored = load_json(work("scored", doc.ref.doc_id, ".json"));
  const auto src_emb = read_kind(feature_path(doc, "src.emb"), FeatureKind::embeddings);
  const auto tgt_emb = read_kind(feature_path(doc, "tgt.emb"), FeatureKind::embeddings);
  const auto src_sents = strings(norm.at("source_sentences"));
  const auto tgt_sents = strings(norm.at("target_sentences"));
  if (src_emb.rows != src_sents.size())
    throw ValidationError("rows", "src.emb has " + std::to_string(src_emb.rows) + " rows for " +
                                      std::to_string(src_sents.size()) + " source sentences");
  if (tgt_emb.rows != tgt_sents.size())
    throw ValidationError("rows", "tgt.emb has " + std::to_string(tgt_emb.rows) + " rows for " +
                                      std::to_string(tgt_sents.size()) + " target sentences");
  const auto& scored_segs = scored.at("segments");
  if (segs.size() != src_sents.size() || scored_segs.size() != src_sents.size())
    throw ValidationError("segments", "aligned or scored segment count differs from the source sentence count");

  Manifest m;
  auto add = [&](std::size_t a, std::size_t b, std::string target, double sigma, double tau) {
    UtteranceRecord r;
    r.doc = doc.ref;
    r.direction = doc.direction;
    r.start_s = segs[a].start_s;
    r.end_s = segs[b - 1].end_s;
    r.source_text = join(src_sents, a, b);
    r.target_text = std::move(target);
    r.scores = QualityScores{sigma, tau};
    r.provenance = Provenance::mined;
    m.records.push_back(std::move(r));
  };
  auto tau_of = [&](std::size_t a, std::size_t b) {
    if (b - a == 1) return scored_segs[a].at("tau").get<double>();
    std::vector<std::string> hyps;
    for (std::size_t k = a; k < b; ++k) hyps.push_back(scored_segs[k].at("hypothesis").get<std::string>());
    return alignment_score_tau(join(src_sents, a, b), join(hyps, 0, hyps.size()), doc.direction.source);
  };

  if (cfg_.mining_mode == MiningMode::greedy) {
    for (const auto& p : mine_pairs(src_emb, tgt_emb, 1))
      add(p.source_idx, p.source_idx + 1, tgt_sents[p.target_idx], p.sigma, tau_of(p.source_idx, p.source_idx + 1));
  } else {
    for (const auto& op : align_documents(src_emb, tgt_emb, cfg_.skip_penalty)) {
      if (op.kind == AlignOpKind::skip_src || op.kind == AlignOpKind::skip_tgt) continue;
      add(op.src_span.begin, op.src_span.end, join(tgt_sents, op.tgt_span.begin, op.tgt_span.end), op.score,
          tau_of(op.src_span.begin, op.src_span.end));
    }
  }
  write_manifest(m, work("mined", doc.ref.doc_id, ".jsonl"));
}

void Pipeline::assemble_mined(const std::vector<InputDoc>& docs, const std::vector<DocOutcome>& outcomes) {
  std::string out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto path = work("mined", docs[i].ref.doc_id, ".jsonl");
    if (outcomes[i].status == "ok") out += read_file(path);
  }
  write_file_atomic(cfg_.work_dir / "mined.jsonl", out);
}

void Pipeline::filter_stage() {
  Manifest all = read_manifest(cfg_.work_dir / "mined.jsonl");
  const auto existing = cfg_.input_dir / "existing.jsonl";
  if (fs::exists(existing)) {
    const Manifest e = read_manifest(existing);
    for (const auto& r : e.records) {
      if (r.provenance != Provenance::existing)
        throw ValidationError("provenance", "existing.jsonl may only hold existing records");
      all.records.push_back(r);
    }
  }
  all.source_lines.clear();
  const auto result = filter_manifest(all, cfg_.filter_policy());
  write_manifest(result.kept, cfg_.work_dir / "kept.jsonl");
  write_manifest(result.dropped, cfg_.work_dir / "dropped.jsonl");
}

void Pipeline::sample_stage() {
  const auto kept = read_manifest(cfg_.work_dir / "kept.jsonl");
  const auto r = sample_test_set(kept, cfg_.sample);
  write_manifest(r.test, cfg_.work_dir / "test.jsonl");
  write_manifest(r.train, cfg_.work_dir / "train.jsonl");
  write_file_atomic(cfg_.work_dir / "sample_report.json", format_sample_report(r));
}

void Pipeline::stats_stage() {
  const std::vector<Manifest> ms = {read_manifest(cfg_.work_dir / "test.jsonl", Split::test),
                                    read_manifest(cfg_.work_dir / "train.jsonl", Split::train)};
  const auto table = stats_report(ms);
  write_file_atomic(cfg_.work_dir / "stats.csv", stats_csv(table));
  write_file_atomic(cfg_.work_dir / "stats.txt", stats_text(table));

  const auto mined = cfg_.work_dir / "mined.jsonl";
  if (fs::exists(mined)) {
    std::vector<double> sigmas;
    for (const auto& r : read_manifest(mined).records)
      if (r.scores) sigmas.push_back(r.scores->sigma);
    write_file_atomic(cfg_.work_dir / "sigma_histogram.csv",
                      histogram_csv(score_histogram(sigmas, cfg_.histogram_bins)));
  }
}

void Pipeline::chrf_stage() {
  if (cfg_.chrf_hyp.empty() || cfg_.chrf_ref.empty()) throw ConfigError("chrf needs chrf.hyp and chrf.ref");
  const auto hyps = read_lines(cfg_.chrf_hyp);
  const auto refs = read_lines(cfg_.chrf_ref);
  const auto report = chrf_pp(hyps, refs, ChrfConfig{}, cfg_.worker_count());
  ojson j;
  j["signature"] = report.signature;
  j["score"] = report.corpus_score;
  j["segments"] = report.per_segment;
  save_json(cfg_.work_dir / "chrf.json", j);
}

}  // namespace stcorpus
