#include "stcorpus/corpus_model.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "stcorpus/errors.hpp"
#include "stcorpus/io_util.hpp"
#include "stcorpus/utf8.hpp"

namespace stcorpus {

using ojson = nlohmann::ordered_json;

double quantize_seconds(double seconds) { return std::round(seconds * 1e6) / 1e6; }
std::int64_t to_micros(double seconds) { return std::llround(seconds * 1e6); }

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::existing: return "existing";
    case Provenance::mined: return "mined";
    case Provenance::synthetic: return "synthetic";
  }
  return "mined";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "existing") return Provenance::existing;
  if (s == "mined") return Provenance::mined;
  if (s == "synthetic") return Provenance::synthetic;
  throw ValidationError("provenance", "unknown value '" + std::string(s) + "'");
}

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

void UtteranceRecord::validate() const {
  if (doc.doc_id.empty()) throw ValidationError("doc_id", "empty");
  if (!(doc.audio_seconds > 0.0)) throw ValidationError("audio_seconds", "must be positive");
  if (doc.sample_rate_hz != kSampleRateHz)
    throw ValidationError("sample_rate_hz", "expected 16000, got " + std::to_string(doc.sample_rate_hz));
  if (!(start_s >= 0.0)) throw ValidationError("start_s", "must be nonnegative");
  if (!(end_s > start_s)) throw ValidationError("end_s", "must be greater than start_s");
  if (end_s > doc.audio_seconds) throw ValidationError("end_s", "exceeds audio_seconds");
  if (utf8::trim(source_text).empty()) throw ValidationError("source_text", "empty after trimming");
  if (utf8::trim(target_text).empty()) throw ValidationError("target_text", "empty after trimming");
  if (!scores && provenance == Provenance::mined) throw ValidationError("sigma", "mined records need sigma and tau");
  if (scores) {
    if (!(scores->sigma >= -1.0 && scores->sigma <= 1.0)) throw ValidationError("sigma", "outside [-1, 1]");
    if (!(scores->tau >= 0.0 && scores->tau <= 1.0)) throw ValidationError("tau", "outside [0, 1]");
  }
}

std::int64_t manifest_duration_us(const Manifest& m) {
  return std::accumulate(m.records.begin(), m.records.end(), std::int64_t{0},
                         [](std::int64_t acc, const UtteranceRecord& r) {
                           return acc + (to_micros(r.end_s) - to_micros(r.start_s));
                         });
}

double manifest_duration(const Manifest& m) {
  return static_cast<double>(manifest_duration_us(m)) / 1e6;
}

namespace {

template <typename T>
T field(const ojson& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(key, "missing", line);
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(key, "wrong type", line);
  }
}

UtteranceRecord record_from_json(const ojson& j, std::size_t line) {
  if (!j.is_object()) throw ParseError("expected a JSON object", line);
  UtteranceRecord r;
  try {
    r.doc.doc_id = field<std::string>(j, "doc_id", line);
    r.doc.audio_path = field<std::string>(j, "audio_path", line);
    r.doc.audio_seconds = quantize_seconds(field<double>(j, "audio_seconds", line));
    r.doc.sample_rate_hz = field<int>(j, "sample_rate_hz", line);
    r.direction = Direction::make(LangCode::parse(field<std::string>(j, "src_lang", line)),
                                  LangCode::parse(field<std::string>(j, "tgt_lang", line)));
    r.start_s = quantize_seconds(field<double>(j, "start_s", line));
    r.end_s = quantize_seconds(field<double>(j, "end_s", line));
    r.source_text = field<std::string>(j, "source_text", line);
    r.target_text = field<std::string>(j, "target_text", line);
    const bool has_sigma = j.contains("sigma");
    const bool has_tau = j.contains("tau");
    if (has_sigma != has_tau) throw ValidationError(has_sigma ? "tau" : "sigma", "sigma and tau must appear together", line);
    if (has_sigma) r.scores = QualityScores{field<double>(j, "sigma", line), field<double>(j, "tau", line)};
    r.provenance = parse_provenance(field<std::string>(j, "provenance", line));
    r.validate();
  } catch (const ValidationError& e) {
    if (e.line() != 0) throw;
    throw ValidationError(e.field(), e.message(), line);
  }
  return r;
}

ojson record_to_json(const UtteranceRecord& r) {
  ojson j;
  j["doc_id"] = r.doc.doc_id;
  j["audio_path"] = r.doc.audio_path;
  j["audio_seconds"] = r.doc.audio_seconds;
  j["sample_rate_hz"] = r.doc.sample_rate_hz;
  j["src_lang"] = std::string(r.direction.source.str());
  j["tgt_lang"] = std::string(r.direction.target.str());
  j["start_s"] = r.start_s;
  j["end_s"] = r.end_s;
  j["source_text"] = r.source_text;
  j["target_text"] = r.target_text;
  if (r.scores) {
    j["sigma"] = r.scores->sigma;
    j["tau"] = r.scores->tau;
  }
  j["provenance"] = std::string(to_string(r.provenance));
  return j;
}

}  // namespace

Manifest parse_manifest(std::string_view text, Split split) {
  Manifest m{split, {}, {}};
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    m.records.push_back(record_from_json(j, line_no));
    m.source_lines.push_back(line_no);
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path, Split split) {
  return parse_manifest(read_file(path), split);
}

std::string format_manifest(const Manifest& m) {
  std::string out;
  for (const auto& r : m.records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  for (const auto& r : m.records) r.validate();
  write_file_atomic(path, format_manifest(m));
}

}  // namespace stcorpus
