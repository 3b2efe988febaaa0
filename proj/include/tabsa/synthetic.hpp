#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tabsa/corpus.hpp"
#include "tabsa/embedding.hpp"

namespace tabsa {

// Deterministic synthetic TABSA corpus: each planted opinion puts an aspect
// cue word and a polarity cue word next to the opinionated target; everything
// else is neutral filler. The matching embedding table places each aspect's
// cue words around a distinct direction so the planted structure is
// recoverable from vectors alone.
struct SyntheticConfig {
  std::uint64_t seed = 7;
  std::size_t count = 500;
  double two_target_ratio = 0.3;
  std::size_t dim = 16;

  std::vector<std::string> aspects;
  std::map<std::string, std::vector<std::string>> aspect_lexicons;
  std::vector<std::string> positive_cues;
  std::vector<std::string> negative_cues;
  std::vector<std::string> distractors;

  std::size_t min_distractors = 6;
  std::size_t max_distractors = 14;
  double second_opinion_prob = 0.35;

  // embedding geometry
  double cue_strength = 0.8;
  double cue_noise = 0.15;
  double valence_strength = 0.8;
  double distractor_scale = 0.3;

  static SyntheticConfig defaults();
};

// Flat key=value config file ('#' comments; lexicon values are space
// separated word lists, e.g. `aspect_lexicon.price = price cost expensive`).
SyntheticConfig parse_synthetic_config(const std::string& path);

// Pure function of the config.
std::vector<Sentence> generate_synthetic(const SyntheticConfig& config);

// Embedding table covering the synthetic vocabulary, derived from the same
// config (table seed = config.seed, dim = config.dim).
EmbeddingTable build_synthetic_table(const SyntheticConfig& config);

}  // namespace tabsa
