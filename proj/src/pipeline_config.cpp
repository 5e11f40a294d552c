#include "stcorpus/pipeline_config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <thread>

#include "stcorpus/errors.hpp"
#include "stcorpus/io_util.hpp"
#include "stcorpus/utf8.hpp"

namespace stcorpus {

std::string_view to_string(MiningMode m) { return m == MiningMode::greedy ? "greedy" : "dp"; }

MiningMode parse_mining_mode(std::string_view s) {
  if (s == "greedy") return MiningMode::greedy;
  if (s == "dp") return MiningMode::dp;
  throw ConfigError("mining mode must be greedy or dp, got '" + std::string(s) + "'");
}

std::string_view to_string(LlmMode m) { return m == LlmMode::service ? "service" : "fallback"; }

LlmMode parse_llm_mode(std::string_view s) {
  if (s == "service") return LlmMode::service;
  if (s == "fallback") return LlmMode::fallback;
  throw ConfigError("llm mode must be service or fallback, got '" + std::string(s) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void PipelineConfig::validate() const {
  vad.validate();
  FilterPolicy{sigma_min, tau_min, {}}.validate();
  sample.validate();
  if (!(skip_penalty >= 0.0)) throw ConfigError("mining.skip_penalty must be nonnegative");
  if (histogram_bins == 0) throw ConfigError("histogram.bins must be positive");
  if (work_dir.empty()) throw ConfigError("work_dir must be set");
}

FilterPolicy PipelineConfig::filter_policy() const {
  FilterPolicy p{sigma_min, tau_min, {}};
  if (!overrides.empty()) p.per_language_overrides = parse_overrides(read_file(overrides), {sigma_min, tau_min});
  p.validate();
  return p;
}

unsigned PipelineConfig::worker_count() const { return jobs ? jobs : std::max(1u, std::thread::hardware_concurrency()); }

namespace {

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(std::string(key) + ": not a number: '" + std::string(v) + "'");
  return out;
}

template <class Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(std::string(key) + ": not a nonnegative integer: '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(std::string(key) + ": expected true or false");
}

using Setter = std::function<void(PipelineConfig&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

template <class M>
Field real(M member) {
  return {[member](PipelineConfig& c, auto k, auto v) { std::invoke(member, c) = to_double(k, v); },
          [member](const PipelineConfig& c) { return format_double(std::invoke(member, c)); }};
}

template <class M>
Field path(M member) {
  return {[member](PipelineConfig& c, auto, auto v) { std::invoke(member, c) = std::filesystem::path(v); },
          [member](const PipelineConfig& c) { return std::invoke(member, c).string(); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      {"input_dir", path(&PipelineConfig::input_dir)},
      {"work_dir", path(&PipelineConfig::work_dir)},
      {"noise_patterns", path(&PipelineConfig::noise_patterns)},
      {"vad.on_threshold", real([](auto& c) -> auto& { return c.vad.on_threshold; })},
      {"vad.off_threshold", real([](auto& c) -> auto& { return c.vad.off_threshold; })},
      {"vad.min_speech_s", real([](auto& c) -> auto& { return c.vad.min_speech_s; })},
      {"vad.min_silence_s", real([](auto& c) -> auto& { return c.vad.min_silence_s; })},
      {"vad.pad_s", real([](auto& c) -> auto& { return c.vad.pad_s; })},
      {"vad.max_chunk_s", real([](auto& c) -> auto& { return c.vad.max_chunk_s; })},
      {"filter.sigma_min", real(&PipelineConfig::sigma_min)},
      {"filter.tau_min", real(&PipelineConfig::tau_min)},
      {"filter.overrides", path(&PipelineConfig::overrides)},
      {"sample.target_seconds", real([](auto& c) -> auto& { return c.sample.target_seconds; })},
      {"sample.seed",
       {[](PipelineConfig& c, auto k, auto v) { c.sample.seed = to_int<std::uint64_t>(k, v); },
        [](const PipelineConfig& c) { return std::to_string(c.sample.seed); }}},
      {"mining.mode",
       {[](PipelineConfig& c, auto, auto v) { c.mining_mode = parse_mining_mode(v); },
        [](const PipelineConfig& c) { return std::string(to_string(c.mining_mode)); }}},
      {"mining.skip_penalty", real(&PipelineConfig::skip_penalty)},
      {"llm.mode",
       {[](PipelineConfig& c, auto, auto v) { c.llm_mode = parse_llm_mode(v); },
        [](const PipelineConfig& c) { return std::string(to_string(c.llm_mode)); }}},
      {"histogram.bins",
       {[](PipelineConfig& c, auto k, auto v) { c.histogram_bins = to_int<std::size_t>(k, v); },
        [](const PipelineConfig& c) { return std::to_string(c.histogram_bins); }}},
      {"jobs",
       {[](PipelineConfig& c, auto k, auto v) { c.jobs = to_int<unsigned>(k, v); },
        [](const PipelineConfig& c) { return std::to_string(c.jobs); }}},
      {"strict",
       {[](PipelineConfig& c, auto k, auto v) { c.strict = to_bool(k, v); },
        [](const PipelineConfig& c) { return std::string(c.strict ? "true" : "false"); }}},
      {"chrf.hyp", path(&PipelineConfig::chrf_hyp)},
      {"chrf.ref", path(&PipelineConfig::chrf_ref)},
  };
  return f;
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
  std::map<std::string_view, const Field*> by_key;
  for (const auto& [k, f] : fields()) by_key[k] = &f;

  PipelineConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string trimmed = utf8::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto eq = trimmed.find('=');
    const auto where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = utf8::trim(std::string_view(trimmed).substr(0, eq));
    const std::string value = utf8::trim(std::string_view(trimmed).substr(eq + 1));
    auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError(where + "unknown key '" + key + "'");
    try {
      it->second->set(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string format_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace stcorpus
