#include "tabsa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tabsa/errors.hpp"

namespace tabsa {

const char* to_string(Provenance p) { return p == Provenance::Raw ? "raw" : "refined"; }

Vec sentence_mean_embedding(const Sentence& sentence, const EmbeddingTable& table) {
  Vec mean(table.dim(), 0.0);
  for (std::size_t j = 0; j < sentence.tokens.size(); ++j) {
    const std::string& tok = sentence.tokens[j];
    std::span<const double> v = sentence.target_positions.count(tok)
                                    ? table.target_embedding(tok)
                                    : table.lookup(tok);
    axpy(1.0, v, mean);
  }
  if (!sentence.tokens.empty()) {
    double inv = 1.0 / static_cast<double>(sentence.tokens.size());
    for (double& x : mean) x *= inv;
  }
  return mean;
}

FeatureVector featurize(const Sentence& sentence, const std::string& target_id,
                        const AspectEmbedding& aspect, const EmbeddingTable& table,
                        Provenance mode, const RefinementResult* refined) {
  if (mode == Provenance::Refined && refined == nullptr) {
    throw InputError("featurize: refined mode needs a refinement record for sentence " +
                     sentence.id + ", target " + target_id + ", aspect " + aspect.label);
  }
  const std::size_t m = table.dim();
  Vec mean = sentence_mean_embedding(sentence, table);

  std::span<const double> t;
  std::span<const double> a;
  if (mode == Provenance::Refined) {
    t = refined->refined_target;
    a = refined->refined_aspect;
  } else {
    t = table.target_embedding(target_id);
    a = aspect.vector;
  }

  FeatureVector out;
  out.provenance = mode;
  out.components.reserve(4 * m);
  out.components.insert(out.components.end(), mean.begin(), mean.end());
  out.components.insert(out.components.end(), t.begin(), t.end());
  out.components.insert(out.components.end(), a.begin(), a.end());
  for (std::size_t i = 0; i < m; ++i) out.components.push_back(t[i] * mean[i]);
  return out;
}

std::vector<PairExample> build_examples(std::span<const Sentence> sentences,
                                        const EmbeddingTable& table,
                                        const std::vector<std::string>& aspects,
                                        Provenance mode,
                                        const RefinementStore* refinements) {
  std::vector<PairExample> out;
  for (const Sentence& s : sentences) {
    for (const auto& [target_id, pos] : s.target_positions) {
      for (const std::string& aspect : aspects) {
        ExampleKey key{s.id, target_id, aspect};
        const RefinementResult* record = nullptr;
        if (mode == Provenance::Refined) {
          if (!refinements) throw InputError("build_examples: no refinement store");
          auto it = refinements->find(key);
          if (it == refinements->end()) {
            throw InputError("build_examples: missing refinement record for " + s.id +
                             "/" + target_id + "/" + aspect);
          }
          record = &it->second;
        }
        PairExample ex;
        ex.key = key;
        ex.features = featurize(s, target_id, aspect_embedding(table, aspect), table,
                                mode, record);
        ex.gold = gold_polarity(s, target_id, aspect);
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

namespace {

std::array<double, 3> softmax3(const std::array<double, 3>& z) {
  double zmax = std::max({z[0], z[1], z[2]});
  std::array<double, 3> e;
  double sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    e[c] = std::exp(z[c] - zmax);
    sum += e[c];
  }
  for (std::size_t c = 0; c < 3; ++c) e[c] /= sum;
  return e;
}

}  // namespace

std::array<double, 3> predict_probs(const ClassifierModel& model,
                                    std::span<const double> features) {
  if (features.size() != model.feature_dim) {
    throw InputError("predict: feature length " + std::to_string(features.size()) +
                     " does not match model dim " + std::to_string(model.feature_dim));
  }
  std::array<double, 3> z;
  for (std::size_t c = 0; c < 3; ++c) z[c] = dot(model.weights[c], features) + model.bias[c];
  return softmax3(z);
}

ClassifierModel train(std::span<const PairExample> examples, const TrainConfig& cfg) {
  if (examples.empty()) throw InputError("train: no examples");

  std::array<std::size_t, 3> class_counts = {0, 0, 0};
  for (const PairExample& ex : examples) ++class_counts[class_index(ex.gold)];
  for (std::size_t c = 0; c < 3; ++c) {
    if (class_counts[c] == 0) {
      throw InputError(std::string("train: class '") +
                       to_string(c == 0 ? Polarity::Positive
                                        : c == 1 ? Polarity::Negative : Polarity::None) +
                       "' has no examples");
    }
  }

  const std::size_t dim = examples[0].features.components.size();
  const Provenance mode = examples[0].features.provenance;
  for (const PairExample& ex : examples) {
    if (ex.features.components.size() != dim) {
      throw InputError("train: inconsistent feature lengths");
    }
    if (ex.features.provenance != mode) {
      throw InputError("train: mixed raw/refined examples");
    }
  }

  ClassifierModel model;
  model.feature_dim = dim;
  model.config = cfg;
  model.mode = mode;
  for (Vec& w : model.weights) w.assign(dim, 0.0);

  const double inv_n = 1.0 / static_cast<double>(examples.size());
  std::array<Vec, 3> grad_w;
  std::array<double, 3> grad_b;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (Vec& g : grad_w) g.assign(dim, 0.0);
    grad_b = {0.0, 0.0, 0.0};
    double loss = 0.0;

    for (const PairExample& ex : examples) {
      std::array<double, 3> p = predict_probs(model, ex.features.components);
      std::size_t gold_c = class_index(ex.gold);
      loss -= std::log(std::max(p[gold_c], 1e-300));
      for (std::size_t c = 0; c < 3; ++c) {
        double delta = p[c] - (c == gold_c ? 1.0 : 0.0);
        axpy(delta, ex.features.components, grad_w[c]);
        grad_b[c] += delta;
      }
    }

    model.loss_history.push_back(loss * inv_n);
    for (std::size_t c = 0; c < 3; ++c) {
      axpy(-cfg.learning_rate * inv_n, grad_w[c], model.weights[c]);
      model.bias[c] -= cfg.learning_rate * inv_n * grad_b[c];
    }
  }
  return model;
}

EvalReport evaluate_predictions(std::span<const PredictionRow> rows,
                                const std::vector<std::string>& labels) {
  EvalReport report;
  for (const PredictionRow& row : rows) {
    ++report.gold_counts[to_string(row.gold)];
  }

  // aspect detection: per-target exact set match, per-label F1, ranking AUC
  std::map<std::string, std::set<std::string>> gold_sets, pred_sets;
  std::vector<DetectionDecision> decisions;
  std::vector<ScoredLabel> detect_scores;
  bool have_probs = !rows.empty();
  for (const PredictionRow& row : rows) {
    std::string target_key = row.key.sentence_id + "\x1f" + row.key.target_id;
    gold_sets[target_key];
    pred_sets[target_key];
    bool gold_active = row.gold != Polarity::None;
    bool pred_active = row.pred.label != Polarity::None;
    if (gold_active) gold_sets[target_key].insert(row.key.aspect);
    if (pred_active) pred_sets[target_key].insert(row.key.aspect);
    decisions.push_back({row.key.aspect, gold_active, pred_active});
    if (row.pred.probs) {
      detect_scores.push_back({1.0 - (*row.pred.probs)[class_index(Polarity::None)],
                               gold_active});
    } else {
      have_probs = false;
    }
  }

  if (!rows.empty()) {
    report.aspect_strict_acc = strict_accuracy(gold_sets, pred_sets);
    report.aspect_macro_f1 = macro_f1(decisions, labels);
  }
  if (have_probs) {
    try {
      report.aspect_auc = auc(detect_scores);
    } catch (const UndefinedMetricError&) {
      // single-class split: leave unset
    }
  }

  // sentiment over gold non-None pairs, None class ignored
  std::size_t n_sent = 0, n_correct = 0;
  std::vector<ScoredLabel> sent_scores;
  bool sent_probs = true;
  for (const PredictionRow& row : rows) {
    if (row.gold == Polarity::None) continue;
    Polarity decided;
    if (row.pred.probs) {
      const auto& p = *row.pred.probs;
      decided = p[class_index(Polarity::Positive)] >= p[class_index(Polarity::Negative)]
                    ? Polarity::Positive
                    : Polarity::Negative;
      double denom = p[class_index(Polarity::Positive)] +
                     p[class_index(Polarity::Negative)];
      sent_scores.push_back(
          {denom > 0.0 ? p[class_index(Polarity::Positive)] / denom : 0.5,
           row.gold == Polarity::Positive});
    } else if (row.pred.label != Polarity::None) {
      decided = row.pred.label;
      sent_probs = false;
    } else {
      sent_probs = false;
      continue;  // injected None: no sentiment decision for this pair
    }
    ++n_sent;
    if (decided == row.gold) ++n_correct;
  }
  if (n_sent > 0) {
    report.sentiment_acc = static_cast<double>(n_correct) / static_cast<double>(n_sent);
  }
  if (sent_probs && !sent_scores.empty()) {
    try {
      report.sentiment_auc = auc(sent_scores);
    } catch (const UndefinedMetricError&) {
    }
  }
  return report;
}

EvalReport evaluate(const ClassifierModel& model, std::span<const PairExample> examples,
                    const std::vector<std::string>& labels) {
  std::vector<PredictionRow> rows;
  rows.reserve(examples.size());
  for (const PairExample& ex : examples) {
    if (ex.features.provenance != model.mode) {
      throw InputError("evaluate: example provenance does not match model mode");
    }
    PredictionRow row;
    row.key = ex.key;
    row.gold = ex.gold;
    std::array<double, 3> p = predict_probs(model, ex.features.components);
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c) {
      if (p[c] > p[best]) best = c;
    }
    row.pred.probs = p;
    row.pred.label = best == 0 ? Polarity::Positive
                               : best == 1 ? Polarity::Negative : Polarity::None;
    rows.push_back(std::move(row));
  }
  EvalReport report = evaluate_predictions(rows, labels);
  report.mode = to_string(model.mode);
  return report;
}

double separation_statistic(const std::map<std::string, std::vector<Vec>>& aspect_vectors) {
  if (aspect_vectors.size() < 2) {
    throw InputError("separation_statistic: need at least two aspects");
  }
  std::size_t dim = 0;
  for (const auto& [aspect, vecs] : aspect_vectors) {
    if (vecs.size() < 2) {
      throw InputError("separation_statistic: aspect '" + aspect +
                       "' has fewer than two vectors");
    }
    if (dim == 0) dim = vecs[0].size();
  }

  std::map<std::string, Vec> centroids;
  for (const auto& [aspect, vecs] : aspect_vectors) {
    Vec c(dim, 0.0);
    for (const Vec& v : vecs) axpy(1.0, v, c);
    double inv = 1.0 / static_cast<double>(vecs.size());
    for (double& x : c) x *= inv;
    centroids[aspect] = std::move(c);
  }

  double intra = 0.0;
  std::size_t n_vectors = 0;
  for (const auto& [aspect, vecs] : aspect_vectors) {
    const Vec& c = centroids[aspect];
    for (const Vec& v : vecs) {
      intra += std::sqrt(squared_distance(v, c));
      ++n_vectors;
    }
  }
  intra /= static_cast<double>(n_vectors);

  double inter = 0.0;
  std::size_t n_pairs = 0;
  for (auto it = centroids.begin(); it != centroids.end(); ++it) {
    for (auto jt = std::next(it); jt != centroids.end(); ++jt) {
      inter += std::sqrt(squared_distance(it->second, jt->second));
      ++n_pairs;
    }
  }
  inter /= static_cast<double>(n_pairs);

  if (intra == 0.0) {
    if (inter == 0.0) {
      throw UndefinedMetricError("separation undefined: all vectors identical");
    }
    return std::numeric_limits<double>::infinity();
  }
  return inter / intra;
}

}  // namespace tabsa
