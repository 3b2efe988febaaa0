#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "tabsa/linalg.hpp"

namespace tabsa {

// Aspect label vector: the mean of its in-vocabulary constituent words.
struct AspectEmbedding {
  std::string label;
  Vec vector;
  std::vector<std::string> source_words;  // constituents that entered the mean
  bool all_oov = false;                   // every constituent was out of vocabulary
};

struct EmbeddingLoadReport {
  std::size_t stored = 0;
  std::vector<std::size_t> skipped_lines;  // 1-based line numbers with bad component counts
};

// Word vectors plus deterministic random vectors for masked target tokens.
// Immutable after loading; the target cache is the only mutation and is
// guarded so parallel phases can share one table.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim, std::uint64_t seed = 1)
      : dim_(dim), seed_(seed), zero_(dim, 0.0) {}

  EmbeddingTable(const EmbeddingTable& other) : dim_(0), seed_(0) { *this = other; }

  EmbeddingTable& operator=(const EmbeddingTable& other) {
    if (this != &other) {
      std::lock_guard<std::mutex> lock(other.target_mutex_);
      dim_ = other.dim_;
      seed_ = other.seed_;
      target_init_range_ = other.target_init_range_;
      entries_ = other.entries_;
      target_entries_ = other.target_entries_;
      zero_ = other.zero_;
    }
    return *this;
  }

  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return entries_.size(); }

  void insert(const std::string& word, Vec v);
  bool contains(const std::string& word) const { return entries_.count(word) > 0; }

  // OOV words map to the zero sentinel, never a crash; OOV contributes
  // nothing to reconstruction.
  std::span<const double> lookup(const std::string& word) const;

  // Random target vector, uniform [-range, range] per component, derived
  // from (seed, target_id) and cached. Pure function of (seed, target_id).
  std::span<const double> target_embedding(const std::string& target_id) const;

  double target_init_range() const { return target_init_range_; }
  void set_target_init_range(double r) { target_init_range_ = r; }

  // Same vocabulary under a different seed: target vectors regenerate, word
  // vectors stay. Used by the multi-seed evaluation sweep.
  EmbeddingTable reseeded(std::uint64_t seed) const {
    EmbeddingTable t(dim_, seed);
    t.target_init_range_ = target_init_range_;
    t.entries_ = entries_;
    return t;
  }

  const std::map<std::string, Vec>& entries() const { return entries_; }
  const std::map<std::string, Vec>& target_entries() const { return target_entries_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  double target_init_range_ = 0.1;
  std::map<std::string, Vec> entries_;
  mutable std::map<std::string, Vec> target_entries_;
  mutable std::mutex target_mutex_;
  Vec zero_;
};

// The value behind EmbeddingTable::target_embedding, exposed for tests.
Vec init_target_embedding_value(std::uint64_t seed, const std::string& target_id,
                                std::size_t dim, double range);

// GloVe text format: one entry per line, `<token> <f1> ... <fm>`, single-space
// separated. Dimension is declared, not inferred; lines with any other
// component count are skipped and recorded in the report.
EmbeddingTable parse_embedding_file(const std::string& path, std::size_t dim,
                                    std::uint64_t seed = 1,
                                    EmbeddingLoadReport* report = nullptr);

// Writes entries in the same text format with round-trip precision.
void write_embedding_file(const EmbeddingTable& table, const std::string& path);

// Splits on hyphen and whitespace, lowercases, averages the in-vocabulary
// constituents ("TRANSIT-LOCATION" -> transit, location).
AspectEmbedding aspect_embedding(const EmbeddingTable& table, const std::string& label);

std::vector<std::string> split_aspect_label(const std::string& label);

}  // namespace tabsa
