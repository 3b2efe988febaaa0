#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabsa/corpus.hpp"
#include "tabsa/harness.hpp"
#include "tabsa/refiner.hpp"
#include "tabsa/synthetic.hpp"

namespace tabsa {

// Resolved run configuration. Precedence: CLI flags over config file over
// built-in defaults; the resolved value is written beside every run's output.
struct RunConfig {
  // data source: exactly one of these
  std::string sentihood_path;            // file or directory
  std::optional<SyntheticConfig> synthetic;

  std::string glove_path;  // required with sentihood data
  std::size_t dim = 300;

  RefinerConfig refiner;
  TrainConfig train;
  std::vector<std::string> aspects;  // empty = top-4 default / synthetic aspects

  std::uint64_t seed = 1;
  std::size_t n_seeds = 1;   // eval sweep width
  std::size_t workers = 0;   // 0 = all cores
  std::string out_dir = "out";
  std::string refined_path;  // optional pre-computed refined records for eval
  bool json_output = false;
  bool emit_csv = false;     // aspect_vectors.csv for external plotting

  std::string to_json() const;
  static RunConfig from_json_file(const std::string& path);
};

struct Corpus {
  std::vector<Sentence> sentences;
  EmbeddingTable table;
  std::vector<std::string> aspects;
};

// Loads + filters + splits the configured data source.
Corpus load_corpus(const RunConfig& cfg);

// Parallel map of refine_sentence over the corpus; deterministic regardless
// of worker count.
RefinementStore refine_corpus(const std::vector<Sentence>& sentences,
                              const EmbeddingTable& table,
                              const std::vector<std::string>& aspects,
                              const RefinerConfig& refiner, std::size_t workers);

struct RefineSummary {
  std::size_t records = 0;
  double convergence_rate = 0.0;
  double mean_iterations = 0.0;
  double mean_nonzero = 0.0;
};

RefineSummary summarize(const RefinementStore& store);

// JSON-lines records: one line per (sentence, target, aspect).
void write_refined_jsonl(const RefinementStore& store, const std::string& path);
RefinementStore read_refined_jsonl(const std::string& path);

struct AspectVectorRow {
  std::string aspect;
  std::string sentence_id;
  std::string target_id;
  std::string kind;  // "unrefined" or "refined"
  Vec vector;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  EvalReport raw;
  EvalReport refined;
  std::optional<double> separation_raw;      // unrefined aspect-path vectors
  std::optional<double> separation_refined;  // refined aspect vectors
  RefineSummary refinement;
  std::vector<AspectVectorRow> csv_rows;  // filled when RunConfig::emit_csv
};

// One full raw-vs-refined comparison at a given seed: reseeded target
// vectors, refinement, shared featurization, identically-seeded training,
// evaluation on the test split.
SeedOutcome run_eval_seed(const Corpus& corpus, const RunConfig& cfg,
                          std::uint64_t seed);

struct EvalOutcome {
  std::vector<SeedOutcome> seeds;
  std::string report_json;  // byte-deterministic
  std::string report_text;  // Table-1-shaped comparison
};

// Aspect-separation populations over gold-active pairs: refined vs the
// aspect-path state before any optimization step.
std::optional<double> separation_over_store(const std::vector<Sentence>& sentences,
                                            const RefinementStore& store, bool refined);

struct InspectOutcome {
  std::string text;
  std::string json;
};

// Command bodies behind the CLI. They write their outputs under cfg.out_dir
// and also return them.
struct RefineOutcome {
  RefineSummary summary;
  std::string refined_path;
  std::string summary_json;
};

RefineOutcome cmd_refine(const RunConfig& cfg);
EvalOutcome cmd_eval(const RunConfig& cfg);
InspectOutcome cmd_inspect(const RunConfig& cfg, const std::string& sentence_id,
                           const std::string& target_id, const std::string& aspect);

}  // namespace tabsa
