#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stcorpus/lang.hpp"

namespace stcorpus {

enum class PromptTask { punctuate, translate_normal, translate_colloquial };
std::string_view to_string(PromptTask t);

struct LangMeta {
  std::string name;
  std::string expected_terminator;
};

/// Built-in metadata for every registered language.
const std::map<LangCode, LangMeta>& default_lang_meta();

/// A prompt template plus the language metadata it is rendered against.
/// Placeholders: {TEXT} (exactly once), {SRC_LANG}, {TGT_LANG}, {LANG_META}.
struct PromptSpec {
  PromptTask task = PromptTask::punctuate;
  std::map<LangCode, LangMeta> lang_meta;
  std::string body_template;

  static PromptSpec builtin(PromptTask task);
  static PromptSpec from_file(PromptTask task, const std::filesystem::path& template_path);
};

std::string_view builtin_template(PromptTask task);

/// Renders the template. Throws PreconditionError on empty text or when `tgt` presence does not
/// match the task, ConfigError when a language has no metadata entry.
std::string build_prompt(const PromptSpec& spec, std::string_view text, LangCode src,
                         std::optional<LangCode> tgt = std::nullopt);

struct LlmResponse {
  std::string raw;
  std::string parsed_text;
  bool valid = false;
  std::optional<std::string> violation;
};

/// Token sequence after dropping punctuation and collapsing whitespace.
std::vector<std::u32string> punctuation_free_tokens(std::string_view text);

/// Valid iff `output` differs from `input` only in punctuation and whitespace.
LlmResponse validate_punctuation(std::string_view input, std::string_view output);

/// OpenAI-compatible chat-completions endpoint.
struct LlmEndpoint {
  std::string url;  // e.g. http://localhost:8000/v1/chat/completions
  std::string model;
  std::string api_key;
  std::string payload_field = "output";  // key inside the JSON object the model returns
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};  // doubles on every retry

  /// BA_LLM_URL, BA_LLM_MODEL, BA_LLM_KEY. Throws ConfigError if BA_LLM_URL is unset.
  static LlmEndpoint from_env();
};

/// One chat request. Retries transport failures, 429 and 5xx with exponential backoff.
/// Throws TransportError after the last retry and ProtocolError when the reply is not the
/// expected JSON shape. The returned response is JSON-shape valid; content checks are the caller's.
LlmResponse call_llm(std::string_view prompt, const LlmEndpoint& endpoint);

enum class LlmMode { service, fallback };

struct LlmRequest {
  PromptTask task = PromptTask::punctuate;
  std::string text;
  LangCode src;
  std::optional<LangCode> tgt;
};

/// Prompt rendering, transport and output checking for the two prompt families.
///
/// Fallback mode is an offline deterministic stand-in: punctuation appends the language's
/// expected terminator if the text does not already end with a terminal mark, translation
/// returns the text unchanged.
class LlmClient {
 public:
  LlmClient(LlmMode mode, LlmEndpoint endpoint = {}, std::size_t max_in_flight = 4);

  void set_prompt(PromptSpec spec);
  LlmMode mode() const { return mode_; }

  /// Punctuation responses are validated for structure preservation; translation responses
  /// only for JSON shape. Errors from the transport propagate.
  LlmResponse complete(const LlmRequest& request) const;

  /// Runs up to max_in_flight requests concurrently; result i answers request i.
  /// A request that throws yields valid=false with the error text as violation.
  std::vector<LlmResponse> complete_all(std::span<const LlmRequest> requests) const;

 private:
  LlmResponse fallback(const LlmRequest& request) const;
  const PromptSpec& prompt_for(PromptTask task) const;

  LlmMode mode_;
  LlmEndpoint endpoint_;
  std::size_t max_in_flight_;
  std::map<PromptTask, PromptSpec> prompts_;
};

}  // namespace stcorpus
