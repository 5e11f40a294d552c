#include "stcorpus/feature_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include <json.hpp>

#include "stcorpus/errors.hpp"
#include "stcorpus/io_util.hpp"

namespace stcorpus {

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::logits: return "logits";
    case FeatureKind::embeddings: return "embeddings";
    case FeatureKind::vad_probs: return "vad_probs";
  }
  return "?";
}

void FeatureMatrix::validate() const {
  if (rows < 1) throw ValidationError("rows", "must be at least 1");
  if (cols < 1) throw ValidationError("cols", "must be at least 1");
  if (data.size() != static_cast<std::size_t>(rows) * cols)
    throw ValidationError("data", "size does not match rows*cols");
  if (!std::isfinite(frame_seconds) || frame_seconds < 0.0f)
    throw ValidationError("frame_seconds", "must be finite and nonnegative");

  switch (kind) {
    case FeatureKind::logits:
      for (std::size_t r = 0; r < rows; ++r) {
        auto v = row(r);
        double mx = -std::numeric_limits<double>::infinity();
        for (float x : v) {
          if (std::isnan(x) || x == std::numeric_limits<float>::infinity())
            throw ValidationError("data", "row " + std::to_string(r) + " has a NaN or +inf log-probability");
          mx = std::max(mx, static_cast<double>(x));
        }
        double lse = -std::numeric_limits<double>::infinity();
        if (std::isfinite(mx)) {
          double s = 0.0;
          for (float x : v) s += std::exp(static_cast<double>(x) - mx);
          lse = mx + std::log(s);
        }
        if (!(std::abs(lse) <= kLogSumExpTolerance))
          throw ValidationError("data", "row " + std::to_string(r) + " logsumexp " + std::to_string(lse) +
                                            " is not within 1e-3 of 0");
      }
      break;
    case FeatureKind::vad_probs:
      if (cols != 1) throw ValidationError("cols", "vad_probs must have exactly one column");
      for (std::size_t i = 0; i < data.size(); ++i)
        if (!(data[i] >= 0.0f && data[i] <= 1.0f))
          throw ValidationError("data", "probability at frame " + std::to_string(i) + " outside [0, 1]");
      break;
    case FeatureKind::embeddings:
      if (frame_seconds != 0.0f) throw ValidationError("frame_seconds", "must be 0 for embeddings");
      for (float x : data)
        if (!std::isfinite(x)) throw ValidationError("data", "non-finite embedding value");
      break;
    default:
      throw ValidationError("kind", "unknown feature kind");
  }
}

namespace {

constexpr char kMagic[4] = {'B', 'A', 'F', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_features(const FeatureMatrix& m) {
  m.validate();
  std::string out;
  out.reserve(kFeatureHeaderBytes + m.data.size() * 4);
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(m.kind));
  put_u32(out, m.rows);
  put_u32(out, m.cols);
  put_u32(out, std::bit_cast<std::uint32_t>(m.frame_seconds));
  for (float x : m.data) put_u32(out, std::bit_cast<std::uint32_t>(x));
  return out;
}

FeatureMatrix decode_features(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected \"BAF1\"");
  if (bytes.size() < kFeatureHeaderBytes) throw LengthError(kFeatureHeaderBytes, bytes.size());
  const auto kind_byte = static_cast<std::uint8_t>(bytes[4]);
  if (kind_byte > 2) throw FormatError("unknown feature kind " + std::to_string(kind_byte));
  FeatureMatrix m;
  m.kind = static_cast<FeatureKind>(kind_byte);
  m.rows = get_u32(bytes, 5);
  m.cols = get_u32(bytes, 9);
  m.frame_seconds = std::bit_cast<float>(get_u32(bytes, 13));
  const std::size_t expected = kFeatureHeaderBytes + static_cast<std::size_t>(m.rows) * m.cols * 4;
  if (bytes.size() != expected) throw LengthError(expected, bytes.size());
  m.data.resize(static_cast<std::size_t>(m.rows) * m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i)
    m.data[i] = std::bit_cast<float>(get_u32(bytes, kFeatureHeaderBytes + 4 * i));
  m.validate();
  return m;
}

void write_features(const FeatureMatrix& m, const std::filesystem::path& path) {
  write_file_atomic(path, encode_features(m));
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_features(bytes);
  } catch (const LengthError&) {
    throw;
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string feature_file_name(std::string_view doc_id, std::string_view kind) {
  return std::string(doc_id) + "." + std::string(kind) + ".baf";
}

TokenVocab::TokenVocab(std::vector<std::string> tokens, std::size_t blank_index,
                       std::optional<std::string> word_delimiter)
    : tokens_(std::move(tokens)), blank_(blank_index) {
  if (tokens_.empty()) throw ValidationError("tokens", "vocabulary is empty");
  if (blank_ >= tokens_.size())
    throw ValidationError("blank_index", "index " + std::to_string(blank_) + " out of range for " +
                                             std::to_string(tokens_.size()) + " tokens");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second)
      throw ValidationError("tokens", "duplicate token \"" + tokens_[i] + "\"");
  }
  if (word_delimiter) {
    auto d = find(*word_delimiter);
    if (!d) throw ValidationError("word_delimiter", "token \"" + *word_delimiter + "\" not in vocabulary");
    if (*d == blank_) throw ValidationError("word_delimiter", "cannot be the blank token");
    delimiter_ = d;
  }
}

std::optional<std::size_t> TokenVocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenVocab parse_vocab(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("vocab: ") + e.what());
  }
  if (!j.is_object() || !j.contains("tokens") || !j["tokens"].is_array())
    throw ValidationError("tokens", "missing or not an array");
  if (!j.contains("blank_index") || !j["blank_index"].is_number_integer() || j["blank_index"].get<long long>() < 0)
    throw ValidationError("blank_index", "missing or not a nonnegative integer");
  std::vector<std::string> tokens;
  for (const auto& t : j["tokens"]) {
    if (!t.is_string()) throw ValidationError("tokens", "entries must be strings");
    tokens.push_back(t.get<std::string>());
  }
  std::optional<std::string> delim;
  if (j.contains("word_delimiter")) {
    if (!j["word_delimiter"].is_string()) throw ValidationError("word_delimiter", "must be a string");
    delim = j["word_delimiter"].get<std::string>();
  }
  return TokenVocab(std::move(tokens), j["blank_index"].get<std::size_t>(), delim);
}

TokenVocab read_vocab(const std::filesystem::path& path) { return parse_vocab(read_file(path)); }

}  // namespace stcorpus
