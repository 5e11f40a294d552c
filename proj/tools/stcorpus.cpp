#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stcorpus/errors.hpp"
#include "stcorpus/io_util.hpp"
#include "stcorpus/llm_client.hpp"
#include "stcorpus/pipeline.hpp"

using namespace stcorpus;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> input, work, noise, overrides, hyp, ref, llm_mode, mining_mode;
  std::optional<double> vad_on, vad_off, min_speech, min_silence, pad, max_chunk;
  std::optional<double> skip_penalty, sigma_min, tau_min, target_seconds;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> bins;
  std::optional<unsigned> jobs;
  bool strict = false;
  std::string format = "txt";
  bool per_segment = false;
};

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig c = o.config_path.empty() ? PipelineConfig{} : load_config(o.config_path);
  if (o.input) c.input_dir = *o.input;
  if (o.work) c.work_dir = *o.work;
  if (o.noise) c.noise_patterns = *o.noise;
  if (o.overrides) c.overrides = *o.overrides;
  if (o.hyp) c.chrf_hyp = *o.hyp;
  if (o.ref) c.chrf_ref = *o.ref;
  if (o.llm_mode) c.llm_mode = parse_llm_mode(*o.llm_mode);
  if (o.mining_mode) c.mining_mode = parse_mining_mode(*o.mining_mode);
  if (o.vad_on) c.vad.on_threshold = *o.vad_on;
  if (o.vad_off) c.vad.off_threshold = *o.vad_off;
  if (o.min_speech) c.vad.min_speech_s = *o.min_speech;
  if (o.min_silence) c.vad.min_silence_s = *o.min_silence;
  if (o.pad) c.vad.pad_s = *o.pad;
  if (o.max_chunk) c.vad.max_chunk_s = *o.max_chunk;
  if (o.skip_penalty) c.skip_penalty = *o.skip_penalty;
  if (o.sigma_min) c.sigma_min = *o.sigma_min;
  if (o.tau_min) c.tau_min = *o.tau_min;
  if (o.target_seconds) c.sample.target_seconds = *o.target_seconds;
  if (o.seed) c.sample.seed = *o.seed;
  if (o.bins) c.histogram_bins = *o.bins;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.strict) c.strict = true;
  c.validate();
  return c;
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--input", o.input, "input directory");
  sub->add_option("--work", o.work, "work directory");
  sub->add_option("--noise-patterns", o.noise, "noise pattern file");
  sub->add_option("--jobs", o.jobs, "worker threads (0 = all cores)");
  sub->add_flag("--strict", o.strict, "fail the stage on the first document error");
  sub->add_option("--llm-mode", o.llm_mode, "service or fallback");
}

void add_vad(CLI::App* sub, Overrides& o) {
  sub->add_option("--vad-on", o.vad_on, "speech onset threshold");
  sub->add_option("--vad-off", o.vad_off, "speech offset threshold");
  sub->add_option("--min-speech-s", o.min_speech, "shortest kept span");
  sub->add_option("--min-silence-s", o.min_silence, "silence needed to close a span");
  sub->add_option("--pad-s", o.pad, "padding added to both span ends");
  sub->add_option("--max-chunk-s", o.max_chunk, "longest chunk before splitting");
}

void add_mine(CLI::App* sub, Overrides& o) {
  sub->add_option("--mining-mode", o.mining_mode, "greedy or dp");
  sub->add_option("--skip-penalty", o.skip_penalty, "dp skip cost");
}

void add_filter(CLI::App* sub, Overrides& o) {
  sub->add_option("--sigma-min", o.sigma_min, "minimum mining score");
  sub->add_option("--tau-min", o.tau_min, "minimum alignment score");
  sub->add_option("--overrides", o.overrides, "per-language thresholds (JSON)");
}

void add_sample(CLI::App* sub, Overrides& o) {
  sub->add_option("--seed", o.seed, "sampling seed");
  sub->add_option("--target-seconds", o.target_seconds, "test audio per group");
}

void add_stats(CLI::App* sub, Overrides& o) {
  sub->add_option("--format", o.format, "csv or txt")->check(CLI::IsMember({"csv", "txt"}));
  sub->add_option("--bins", o.bins, "sigma histogram bins");
}

int print_stage(const StageSummary& s) {
  std::cout << s.to_json() << "\n";
  if (s.exit_code != exit_code::ok) std::cerr << "stcorpus: " << to_string(s.stage) << ": " << s.error << "\n";
  return s.exit_code;
}

int after_stage(const PipelineConfig& cfg, Stage stage, const Overrides& o) {
  if (stage == Stage::stats)
    std::cout << read_file(cfg.work_dir / (o.format == "csv" ? "stats.csv" : "stats.txt"));
  if (stage == Stage::chrf) {
    const auto j = nlohmann::json::parse(read_file(cfg.work_dir / "chrf.json"));
    char buf[64];
    if (o.per_segment) {
      std::size_t i = 0;
      for (const auto& v : j.at("segments")) {
        std::snprintf(buf, sizeof buf, "%zu\t%.4f\n", ++i, v.get<double>());
        std::cout << buf;
      }
    }
    std::snprintf(buf, sizeof buf, "%.2f", j.at("score").get<double>());
    std::cout << "chrF2++ = " << buf << " (" << j.at("signature").get<std::string>() << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech-translation corpus mining toolkit"};
  app.require_subcommand(1);
  Overrides o;

  std::vector<std::pair<CLI::App*, Stage>> stage_cmds;
  auto stage_cmd = [&](Stage s, const std::string& help) {
    auto* sub = app.add_subcommand(std::string(to_string(s)), help);
    add_common(sub, o);
    stage_cmds.emplace_back(sub, s);
    return sub;
  };
  stage_cmd(Stage::normalize, "clean, punctuate and segment transcripts and translations");
  add_vad(stage_cmd(Stage::chunk, "detect speech chunks from VAD probabilities"), o);
  stage_cmd(Stage::align, "CTC forced alignment of source sentences");
  stage_cmd(Stage::score, "alignment score against greedy ASR output");
  add_mine(stage_cmd(Stage::mine, "pair source and target sentences"), o);
  add_filter(stage_cmd(Stage::filter, "threshold filtering on sigma and tau"), o);
  add_sample(stage_cmd(Stage::sample, "split kept records into test and train"), o);
  add_stats(stage_cmd(Stage::stats, "corpus statistics and sigma histogram"), o);
  auto* chrf = stage_cmd(Stage::chrf, "chrF++ of a hypothesis file against a reference file");
  chrf->add_option("--hyp", o.hyp, "hypotheses, one per line")->required();
  chrf->add_option("--ref", o.ref, "references, one per line")->required();
  chrf->add_flag("--per-segment", o.per_segment, "print one score per segment");

  auto* run = app.add_subcommand("run", "all stages from normalize to stats");
  add_common(run, o);
  add_vad(run, o);
  add_mine(run, o);
  add_filter(run, o);
  add_sample(run, o);
  add_stats(run, o);

  auto* config_cmd = app.add_subcommand("config", "print the effective configuration");
  add_common(config_cmd, o);
  add_vad(config_cmd, o);
  add_mine(config_cmd, o);
  add_filter(config_cmd, o);
  add_sample(config_cmd, o);

  std::string task = "punctuate", text, src = "eng";
  std::optional<std::string> tgt;
  auto* prompt = app.add_subcommand("prompt", "render an LLM prompt");
  prompt->add_option("--task", task, "punctuate, translate_normal or translate_colloquial")
      ->check(CLI::IsMember({"punctuate", "translate_normal", "translate_colloquial"}));
  prompt->add_option("--text", text, "input text")->required();
  prompt->add_option("--src", src, "source language");
  prompt->add_option("--tgt", tgt, "target language (translation tasks)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::config;
  }

  try {
    if (prompt->parsed()) {
      const PromptTask t = task == "punctuate"          ? PromptTask::punctuate
                           : task == "translate_normal" ? PromptTask::translate_normal
                                                        : PromptTask::translate_colloquial;
      std::optional<LangCode> tgt_lang;
      if (tgt) tgt_lang = LangCode::parse(*tgt);
      std::cout << build_prompt(PromptSpec::builtin(t), text, LangCode::parse(src), tgt_lang);
      return 0;
    }
    const PipelineConfig cfg = resolve(o);
    if (config_cmd->parsed()) {
      std::cout << format_config(cfg);
      return 0;
    }
    Pipeline pipeline(cfg);
    if (run->parsed()) {
      int code = 0;
      for (const auto& s : pipeline.run_all()) code = print_stage(s);
      if (code == 0) after_stage(cfg, Stage::stats, o);
      return code;
    }
    for (const auto& [sub, stage] : stage_cmds) {
      if (!sub->parsed()) continue;
      const auto summary = pipeline.run_stage(stage);
      const int code = print_stage(summary);
      if (code == 0) after_stage(cfg, stage, o);
      return code;
    }
  } catch (const std::exception& e) {
    std::cerr << "stcorpus: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return exit_code::failure;
}
