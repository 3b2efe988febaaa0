#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace tabsa {

// Results of one evaluation pass. AUCs and sentiment metrics are optional:
// degenerate inputs (single class, zero support) yield no value.
struct EvalReport {
  std::optional<double> aspect_strict_acc;
  std::optional<double> aspect_macro_f1;
  std::optional<double> aspect_auc;
  std::optional<double> sentiment_acc;
  std::optional<double> sentiment_auc;
  std::map<std::string, std::size_t> gold_counts;  // support per polarity class
  std::string mode;                                // "raw" or "refined"
};

// Fraction of targets whose predicted aspect set equals the gold set exactly.
double strict_accuracy(const std::map<std::string, std::set<std::string>>& gold,
                       const std::map<std::string, std::set<std::string>>& pred);

// One binary detection decision for a (target, aspect) pair.
struct DetectionDecision {
  std::string label;
  bool gold = false;
  bool pred = false;
};

// Unweighted mean over labels of per-label F1; a label scores 0 when its
// precision + recall is 0.
double macro_f1(std::span<const DetectionDecision> decisions,
                const std::vector<std::string>& labels);

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

// Probability that a random positive outscores a random negative, ties
// counted half (rank-statistic form). Throws UndefinedMetricError when only
// one class is present.
double auc(std::span<const ScoredLabel> scores);

}  // namespace tabsa
