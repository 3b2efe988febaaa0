#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabsa/corpus.hpp"
#include "tabsa/embedding.hpp"
#include "tabsa/metrics.hpp"
#include "tabsa/refiner.hpp"

namespace tabsa {

enum class Provenance { Raw, Refined };

const char* to_string(Provenance p);

// [sentence mean | target vector | aspect vector | target (*) sentence mean],
// length 4m. Raw mode uses the original t and a, refined mode the outputs of
// the refiner. Both pipelines share everything else, so metric deltas are
// attributable to the vectors alone.
struct FeatureVector {
  Vec components;
  Provenance provenance = Provenance::Raw;
};

struct ExampleKey {
  std::string sentence_id;
  std::string target_id;
  std::string aspect;

  auto operator<=>(const ExampleKey&) const = default;
};

struct PairExample {
  ExampleKey key;
  FeatureVector features;
  Polarity gold = Polarity::None;
};

Vec sentence_mean_embedding(const Sentence& sentence, const EmbeddingTable& table);

FeatureVector featurize(const Sentence& sentence, const std::string& target_id,
                        const AspectEmbedding& aspect, const EmbeddingTable& table,
                        Provenance mode, const RefinementResult* refined);

// All (target, aspect) pairs of every sentence, with implicit None gold for
// pairs without an opinion. `refinements` is required in refined mode.
using RefinementStore = std::map<ExampleKey, RefinementResult>;

std::vector<PairExample> build_examples(std::span<const Sentence> sentences,
                                        const EmbeddingTable& table,
                                        const std::vector<std::string>& aspects,
                                        Provenance mode,
                                        const RefinementStore* refinements);

struct TrainConfig {
  std::size_t epochs = 2000;
  double learning_rate = 2.0;
  std::uint64_t seed = 1;
};

// Multinomial logistic regression over the three polarity classes, fit by
// full-batch gradient descent (sequential over epochs for determinism).
struct ClassifierModel {
  std::size_t feature_dim = 0;
  std::array<Vec, 3> weights;  // one weight vector per class
  std::array<double, 3> bias = {0.0, 0.0, 0.0};
  TrainConfig config;
  Provenance mode = Provenance::Raw;
  std::vector<double> loss_history;  // mean cross-entropy per epoch
};

ClassifierModel train(std::span<const PairExample> examples, const TrainConfig& cfg);

// Probability 3-vector ordered (Positive, Negative, None).
std::array<double, 3> predict_probs(const ClassifierModel& model,
                                    std::span<const double> features);

constexpr std::size_t class_index(Polarity p) {
  return p == Polarity::Positive ? 0 : (p == Polarity::Negative ? 1 : 2);
}

// A per-pair prediction: probabilities when a model produced it, or a bare
// label when injected by a test hook.
struct PairPrediction {
  std::optional<std::array<double, 3>> probs;
  Polarity label = Polarity::None;
};

struct PredictionRow {
  ExampleKey key;
  Polarity gold = Polarity::None;
  PairPrediction pred;
};

// Metric computation from per-pair predictions; degenerate metrics come back
// unset instead of throwing.
EvalReport evaluate_predictions(std::span<const PredictionRow> rows,
                                const std::vector<std::string>& labels);

// Runs the model over the examples and scores it. The model and examples must
// carry the same provenance.
EvalReport evaluate(const ClassifierModel& model, std::span<const PairExample> examples,
                    const std::vector<std::string>& labels);

// (mean inter-aspect centroid distance) / (mean intra-aspect distance to own
// centroid). Higher = better separated. Returns +infinity when the intra
// spread is zero but centroids differ; throws UndefinedMetricError when all
// vectors are identical.
double separation_statistic(const std::map<std::string, std::vector<Vec>>& aspect_vectors);

}  // namespace tabsa
