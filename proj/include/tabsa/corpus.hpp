#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tabsa/embedding.hpp"
#include "tabsa/linalg.hpp"

namespace tabsa {

enum class Polarity { Positive, Negative, None };

const char* to_string(Polarity p);
std::optional<Polarity> parse_polarity(const std::string& s);

// One (target, aspect, polarity) annotation.
struct OpinionTuple {
  std::string target_id;
  std::string aspect;
  Polarity polarity = Polarity::None;
};

// A sentence with masked targets. target_positions maps a target id
// (LOCATION1/LOCATION2) to its token index.
struct Sentence {
  std::string id;
  std::vector<std::string> tokens;
  std::map<std::string, std::size_t> target_positions;
  std::vector<OpinionTuple> opinions;
  std::string split;  // "train" / "dev" / "test", or empty when unassigned
};

// Throws InputError when a type invariant is broken. Loaders call this on
// every sentence they accept.
void validate_sentence(const Sentence& s);

// Gold polarity for a (target, aspect) pair; None when no opinion is stored.
Polarity gold_polarity(const Sentence& s, const std::string& target_id,
                       const std::string& aspect);

// Per-sentence embedding matrix plus the aspect under consideration.
struct SentenceContext {
  Matrix x;  // m x n, column j = embedding of token j
  std::size_t target_column = 0;
  std::optional<std::size_t> other_target_column;
  std::string target_id;
  std::string other_target_id;
  AspectEmbedding aspect;
};

// Lowercases, splits on whitespace, strips edge punctuation; the exact tokens
// LOCATION1/LOCATION2 stay uppercase and atomic.
std::vector<std::string> tokenize(const std::string& text);

struct CorpusLoadReport {
  std::size_t loaded = 0;
  std::size_t single_target = 0;
  std::size_t two_target = 0;
  // (sentence id, reason) for records that were rejected
  std::vector<std::pair<std::string, std::string>> record_errors;
};

// SentiHood JSON: an array of {id, text, opinions:[{target_entity, aspect,
// sentiment}]}. `path` may be a single file or a directory holding
// sentihood-train.json / sentihood-dev.json / sentihood-test.json, in which
// case each sentence carries its file's split.
std::vector<Sentence> load_sentihood(const std::string& path,
                                     CorpusLoadReport* report = nullptr);

// Drops opinions outside `aspects`, then sentences left with no opinion.
std::vector<Sentence> filter_top_aspects(std::vector<Sentence> sentences,
                                         const std::set<std::string>& aspects);

// Assigns train/dev/test splits. Published splits (non-empty Sentence::split)
// are kept; the rest are assigned by a seeded 80/10/10 draw.
void assign_splits(std::vector<Sentence>& sentences, std::uint64_t seed);

SentenceContext build_context(const Sentence& sentence, const std::string& target_id,
                              AspectEmbedding aspect, const EmbeddingTable& table);

const std::set<std::string>& default_aspect_set();

}  // namespace tabsa
