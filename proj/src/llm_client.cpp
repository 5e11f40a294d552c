#include "stcorpus/llm_client.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "builtin_prompts.hpp"
#include "stcorpus/errors.hpp"
#include "stcorpus/io_util.hpp"
#include "stcorpus/text_normalize.hpp"
#include "stcorpus/utf8.hpp"

namespace stcorpus {

std::string_view to_string(PromptTask t) {
  switch (t) {
    case PromptTask::punctuate: return "punctuate";
    case PromptTask::translate_normal: return "translate_normal";
    case PromptTask::translate_colloquial: return "translate_colloquial";
  }
  return "?";
}

const std::map<LangCode, LangMeta>& default_lang_meta() {
  static const std::map<LangCode, LangMeta> meta = [] {
    const std::map<std::string_view, std::string_view> terminators = {
        {"asm", "।"}, {"ben", "।"}, {"guj", "."}, {"hin", "।"}, {"kan", "."}, {"mal", "."},
        {"mar", "."}, {"npi", "।"}, {"ory", "।"}, {"pan", "।"}, {"snd", "۔"}, {"tam", "."},
        {"tel", "."}, {"urd", "۔"}, {"eng", "."}, {"mni", "।"},
    };
    std::map<LangCode, LangMeta> m;
    for (auto [code, term] : terminators) {
      auto lang = LangCode::parse(code);
      m[lang] = LangMeta{std::string(lang.name()), std::string(term)};
    }
    return m;
  }();
  return meta;
}

std::string_view builtin_template(PromptTask task) {
  switch (task) {
    case PromptTask::punctuate: return generated::kPunctuatePrompt;
    case PromptTask::translate_normal: return generated::kTranslateNormalPrompt;
    case PromptTask::translate_colloquial: return generated::kTranslateColloquialPrompt;
  }
  return {};
}

PromptSpec PromptSpec::builtin(PromptTask task) {
  return PromptSpec{task, default_lang_meta(), std::string(builtin_template(task))};
}

PromptSpec PromptSpec::from_file(PromptTask task, const std::filesystem::path& template_path) {
  return PromptSpec{task, default_lang_meta(), read_file(template_path)};
}

namespace {

bool is_translation(PromptTask t) { return t != PromptTask::punctuate; }

const LangMeta& meta_for(const PromptSpec& spec, LangCode lang) {
  auto it = spec.lang_meta.find(lang);
  if (it == spec.lang_meta.end())
    throw ConfigError("no prompt metadata for language " + std::string(lang.str()));
  return it->second;
}

std::string meta_line(std::string_view role, LangCode lang, const LangMeta& meta) {
  return "- " + std::string(role) + ": " + meta.name + " (" + std::string(lang.str()) +
         "), expected sentence terminator: \"" + meta.expected_terminator + "\"";
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

}  // namespace

std::string build_prompt(const PromptSpec& spec, std::string_view text, LangCode src, std::optional<LangCode> tgt) {
  if (utf8::trim(text).empty()) throw PreconditionError("prompt text is empty");
  if (is_translation(spec.task) != tgt.has_value())
    throw PreconditionError(is_translation(spec.task) ? "translation prompt needs a target language"
                                                      : "punctuation prompt takes no target language");
  if (count_occurrences(spec.body_template, "{TEXT}") != 1)
    throw ConfigError("prompt template must contain {TEXT} exactly once");

  const LangMeta& src_meta = meta_for(spec, src);
  std::string lang_meta = meta_line(tgt ? "source" : "language", src, src_meta);
  std::string tgt_name;
  if (tgt) {
    const LangMeta& tgt_meta = meta_for(spec, *tgt);
    lang_meta += "\n" + meta_line("target", *tgt, tgt_meta);
    tgt_name = tgt_meta.name;
  }

  const std::map<std::string_view, std::string_view> values = {
      {"{TEXT}", text}, {"{SRC_LANG}", src_meta.name}, {"{TGT_LANG}", tgt_name}, {"{LANG_META}", lang_meta}};
  // Single left-to-right pass so substituted text is never re-expanded.
  std::string out;
  const std::string& tpl = spec.body_template;
  for (std::size_t i = 0; i < tpl.size();) {
    bool replaced = false;
    if (tpl[i] == '{') {
      for (const auto& [key, value] : values) {
        if (std::string_view(tpl).substr(i, key.size()) == key) {
          out += value;
          i += key.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(tpl[i++]);
  }
  return out;
}

std::vector<std::u32string> punctuation_free_tokens(std::string_view text) {
  return utf8::split_whitespace(std::u32string_view(utf8::strip_punctuation(utf8::decode(text))));
}

LlmResponse validate_punctuation(std::string_view input, std::string_view output) {
  LlmResponse r;
  r.raw = std::string(output);
  const auto in = punctuation_free_tokens(input);
  const auto out = punctuation_free_tokens(output);
  std::size_t i = 0;
  while (i < in.size() && i < out.size() && in[i] == out[i]) ++i;
  if (i == in.size() && i == out.size()) {
    if (out.empty()) {
      r.violation = "output has no words";
      return r;
    }
    r.valid = true;
    r.parsed_text = utf8::trim(output);
    return r;
  }
  std::string msg = "token " + std::to_string(i) + ": ";
  if (i == in.size())
    msg += "unexpected extra word '" + utf8::encode(out[i]) + "'";
  else if (i == out.size())
    msg += "missing word '" + utf8::encode(in[i]) + "'";
  else
    msg += "expected '" + utf8::encode(in[i]) + "', got '" + utf8::encode(out[i]) + "'";
  r.violation = std::move(msg);
  return r;
}

LlmEndpoint LlmEndpoint::from_env() {
  LlmEndpoint e;
  const char* url = std::getenv("BA_LLM_URL");
  if (!url || !*url) throw ConfigError("BA_LLM_URL is not set");
  e.url = url;
  if (const char* model = std::getenv("BA_LLM_MODEL")) e.model = model;
  if (const char* key = std::getenv("BA_LLM_KEY")) e.api_key = key;
  return e;
}

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ConfigError("bad LLM endpoint URL '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

std::string strip_code_fence(std::string s) {
  s = utf8::trim(s);
  if (s.starts_with("```")) {
    auto nl = s.find('\n');
    auto end = s.rfind("```");
    if (nl != std::string::npos && end != std::string::npos && end > nl) s = s.substr(nl + 1, end - nl - 1);
  }
  return s;
}

}  // namespace

LlmResponse call_llm(std::string_view prompt, const LlmEndpoint& endpoint) {
  const ParsedUrl url = parse_url(endpoint.url);
  httplib::Client client(url.origin);
  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - timeout_s);
  client.set_connection_timeout(timeout_s.count(), timeout_us.count());
  client.set_read_timeout(timeout_s.count(), timeout_us.count());
  client.set_write_timeout(timeout_s.count(), timeout_us.count());

  httplib::Headers headers;
  if (!endpoint.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint.api_key);

  nlohmann::json body = {
      {"model", endpoint.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", endpoint.temperature},
  };
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0;; ++attempt) {
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (res && res->status == 200) {
      nlohmann::json reply;
      try {
        reply = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("reply is not JSON", res->body);
      }
      std::string content;
      try {
        content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception&) {
        throw ProtocolError("reply has no choices[0].message.content", res->body);
      }
      nlohmann::json inner;
      try {
        inner = nlohmann::json::parse(strip_code_fence(content));
      } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("model output is not JSON", content);
      }
      if (!inner.is_object() || !inner.contains(endpoint.payload_field) || !inner[endpoint.payload_field].is_string())
        throw ProtocolError("model output has no string field '" + endpoint.payload_field + "'", content);
      LlmResponse r;
      r.raw = content;
      r.parsed_text = utf8::trim(inner[endpoint.payload_field].get<std::string>());
      r.valid = !r.parsed_text.empty();
      if (!r.valid) r.violation = "empty output";
      return r;
    }

    const bool retryable = !res || res->status == 429 || res->status >= 500;
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (!retryable) throw TransportError(endpoint.url + ": " + last_error);
    if (attempt >= endpoint.max_retries)
      throw TransportError(endpoint.url + ": " + last_error + " after " + std::to_string(attempt + 1) + " attempts");
    std::this_thread::sleep_for(endpoint.initial_backoff * (1 << attempt));
  }
}

LlmClient::LlmClient(LlmMode mode, LlmEndpoint endpoint, std::size_t max_in_flight)
    : mode_(mode), endpoint_(std::move(endpoint)), max_in_flight_(std::max<std::size_t>(1, max_in_flight)) {
  for (auto task : {PromptTask::punctuate, PromptTask::translate_normal, PromptTask::translate_colloquial})
    prompts_.emplace(task, PromptSpec::builtin(task));
}

void LlmClient::set_prompt(PromptSpec spec) { prompts_[spec.task] = std::move(spec); }

const PromptSpec& LlmClient::prompt_for(PromptTask task) const { return prompts_.at(task); }

LlmResponse LlmClient::fallback(const LlmRequest& request) const {
  const std::string text = utf8::trim(request.text);
  if (text.empty()) throw PreconditionError("prompt text is empty");
  if (is_translation(request.task)) return LlmResponse{text, text, true, std::nullopt};

  const auto& meta = meta_for(prompt_for(request.task), request.src);
  const std::u32string cps = utf8::decode(text);
  const std::u32string& marks = TerminalMarks::defaults().marks(request.src);
  std::string out = text;
  if (marks.find(cps.back()) == std::u32string::npos) out += meta.expected_terminator;
  return validate_punctuation(text, out);
}

LlmResponse LlmClient::complete(const LlmRequest& request) const {
  if (mode_ == LlmMode::fallback) return fallback(request);
  const std::string prompt = build_prompt(prompt_for(request.task), request.text, request.src, request.tgt);
  LlmEndpoint ep = endpoint_;
  if (request.task == PromptTask::punctuate) ep.temperature = 0.0;
  LlmResponse reply = call_llm(prompt, ep);
  if (request.task != PromptTask::punctuate) return reply;
  LlmResponse checked = validate_punctuation(request.text, reply.parsed_text);
  checked.raw = std::move(reply.raw);
  return checked;
}

std::vector<LlmResponse> LlmClient::complete_all(std::span<const LlmRequest> requests) const {
  std::vector<LlmResponse> out(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < requests.size();) {
      try {
        out[i] = complete(requests[i]);
      } catch (const std::exception& e) {
        out[i] = LlmResponse{"", "", false, std::string(e.what())};
      }
    }
  };
  const std::size_t n = std::min(max_in_flight_, requests.size());
  std::vector<std::jthread> pool;
  for (std::size_t k = 0; k + 1 < n; ++k) pool.emplace_back(worker);
  worker();
  return out;
}

}  // namespace stcorpus
