#pragma once

#include <array>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stcorpus/corpus_model.hpp"
#include "stcorpus/llm_client.hpp"
#include "stcorpus/pipeline_config.hpp"
#include "stcorpus/text_normalize.hpp"

namespace stcorpus {

enum class Stage { normalize, chunk, align, score, mine, filter, sample, stats, chrf };
std::string_view to_string(Stage s);
/// Throws ConfigError.
Stage parse_stage(std::string_view s);

/// Stages run by run_all, in dependency order.
inline constexpr std::array<Stage, 8> kPipelineStages = {Stage::normalize, Stage::chunk,  Stage::align,
                                                         Stage::score,     Stage::mine,   Stage::filter,
                                                         Stage::sample,    Stage::stats};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int missing_input = 2;
inline constexpr int validation = 3;
inline constexpr int config = 4;
}  // namespace exit_code

/// 2 for missing inputs, 3 for malformed data, 4 for configuration errors, 1 otherwise.
int exit_code_for(const std::exception& e);
int exit_code_for(std::exception_ptr e);

/// One line of <input_dir>/docs.jsonl.
struct InputDoc {
  DocumentRef ref;
  Direction direction;
  std::string transcript;   // speech-side text, in direction.source
  std::string translation;  // in direction.target
};

/// Reads <input_dir>/docs.jsonl, sorted by doc_id. A missing file means no documents.
/// Throws ParseError or ValidationError (with line numbers).
std::vector<InputDoc> read_docs(const std::filesystem::path& input_dir);
std::vector<InputDoc> parse_docs(std::string_view jsonl);

struct DocOutcome {
  std::string doc_id;
  std::string status;  // ok, failed, skipped
  std::string error;
  int exit_code = exit_code::ok;
  std::int64_t duration_ms = 0;
};

struct StageSummary {
  Stage stage = Stage::normalize;
  std::size_t documents = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  int exit_code = exit_code::ok;
  std::string error;
  std::vector<DocOutcome> outcomes;

  /// One JSON object on a single line.
  std::string to_json() const;
};

/// Stage runner over an input directory and a work directory.
///
/// Input layout:
///   docs.jsonl                      documents with transcript and translation
///   features/<doc>.logits.baf       CTC log-posteriors
///   features/<doc>.vad.baf          speech probabilities
///   features/<doc>.src.emb.baf      one embedding per source sentence
///   features/<doc>.tgt.emb.baf      one embedding per target sentence
///   vocab.json or vocab/<lang>.json CTC vocabulary for the speech language
///   existing.jsonl                  optional manifest of existing corpora
///
/// Per-document stages (normalize, chunk, align, score, mine) run on a pool of
/// PipelineConfig::worker_count() threads; outputs are per document and therefore independent of
/// scheduling. Every stage appends one progress line per document to <work_dir>/progress.jsonl.
/// A failed document is logged and, within run_all, skipped by later stages. With strict set, the
/// first failure (in doc_id order) sets the stage exit code.
class Pipeline {
 public:
  /// Throws ConfigError, MissingInputError.
  explicit Pipeline(PipelineConfig cfg);

  /// Replaces the client built from llm.mode (service mode reads the endpoint from the environment).
  void set_llm_client(std::shared_ptr<const LlmClient> client);

  StageSummary run_stage(Stage s);
  /// Stops after the first stage with a nonzero exit code.
  std::vector<StageSummary> run_all();

  const PipelineConfig& config() const { return cfg_; }

 private:
  StageSummary run_per_document(Stage s);
  StageSummary run_global(Stage s);
  void run_document(Stage s, const InputDoc& doc);
  void remove_outputs(Stage s, const InputDoc& doc) const;

  void normalize_doc(const InputDoc& doc);
  void chunk_doc(const InputDoc& doc);
  void align_doc(const InputDoc& doc);
  void score_doc(const InputDoc& doc);
  void mine_doc(const InputDoc& doc);
  void assemble_mined(const std::vector<InputDoc>& docs, const std::vector<DocOutcome>& outcomes);

  void filter_stage();
  void sample_stage();
  void stats_stage();
  void chrf_stage();

  void log_progress(const StageSummary& s) const;
  const LlmClient& llm();

  std::filesystem::path feature_path(const InputDoc& doc, std::string_view kind) const;
  std::filesystem::path work(std::string_view sub, const std::string& doc_id, std::string_view ext) const;

  PipelineConfig cfg_;
  NoiseConfig noise_;
  std::shared_ptr<const LlmClient> llm_;
  std::set<std::string> failed_docs_;
};

}  // namespace stcorpus
