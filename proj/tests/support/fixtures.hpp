#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stcorpus/corpus_model.hpp"
#include "stcorpus/feature_io.hpp"

namespace fixture {

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

/// Row-wise log of a probability matrix.
stcorpus::FeatureMatrix log_matrix(const std::vector<std::vector<double>>& probs, float frame_seconds);

/// Random T x V log-softmax matrix with every cell a multiple of 1/1024, so path sums are exact.
/// Roughly one row in four is uniform, which creates tied paths.
stcorpus::FeatureMatrix quantized_logits(std::mt19937_64& rng, std::size_t frames, std::size_t vocab);

struct DesignedUtterance {
  std::string doc_id;
  std::string source;  // sentence as it appears after normalization
  std::string target;
  double sigma = 0.0;
  double tau = 0.0;
  bool kept = false;
};

struct E2ECorpus {
  std::vector<DesignedUtterance> utterances;
  std::size_t expected_mined = 0;
  std::size_t expected_kept = 0;
};

/// Three documents (eng->hin, eng->ben, eng->tam) with a character CTC vocabulary. Every source
/// sentence is its own speech chunk between silences; the greedy ASR output differs from the
/// reference by a designed number of 'q' substitutions and each sentence's embedding has a
/// designed cosine with its translation.
E2ECorpus write_e2e_corpus(const std::filesystem::path& input_dir);

/// One document of `sentences` with the same construction, for pipeline failure tests.
/// Embeddings for the tgt side have cos = sigma with the matching source sentence.
void write_document(const std::filesystem::path& input_dir, const std::string& doc_id, const std::string& tgt_lang,
                    const std::vector<std::string>& sentences, const std::vector<std::string>& translations,
                    const std::vector<int>& substitutions, const std::vector<double>& sigmas);

void write_char_vocab(const std::filesystem::path& input_dir);

/// 10 en->xx groups of 300 utterances with durations in [1, 15] s.
stcorpus::Manifest sampling_manifest(std::uint64_t seed);

stcorpus::UtteranceRecord make_record(const std::string& doc_id, const std::string& src, const std::string& tgt,
                                      double start_s, double end_s, std::optional<stcorpus::QualityScores> scores,
                                      stcorpus::Provenance provenance = stcorpus::Provenance::mined);

}  // namespace fixture
