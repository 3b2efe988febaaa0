#include "tabsa/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "tabsa/errors.hpp"

namespace tabsa {

double strict_accuracy(const std::map<std::string, std::set<std::string>>& gold,
                       const std::map<std::string, std::set<std::string>>& pred) {
  if (gold.size() != pred.size()) {
    throw InputError("strict_accuracy: gold and prediction maps differ in size");
  }
  if (gold.empty()) throw InputError("strict_accuracy: no targets");
  std::size_t correct = 0;
  for (const auto& [target, gold_set] : gold) {
    auto it = pred.find(target);
    if (it == pred.end()) {
      throw InputError("strict_accuracy: missing prediction for target " + target);
    }
    if (it->second == gold_set) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double macro_f1(std::span<const DetectionDecision> decisions,
                const std::vector<std::string>& labels) {
  if (labels.empty()) throw InputError("macro_f1: empty label set");
  double sum = 0.0;
  for (const std::string& label : labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const DetectionDecision& d : decisions) {
      if (d.label != label) continue;
      if (d.gold && d.pred) ++tp;
      else if (!d.gold && d.pred) ++fp;
      else if (d.gold && !d.pred) ++fn;
    }
    // F1 = 2TP / (2TP + FP + FN); defined as 0 when precision + recall is 0
    double denom = static_cast<double>(2 * tp + fp + fn);
    sum += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  }
  return sum / static_cast<double>(labels.size());
}

double auc(std::span<const ScoredLabel> scores) {
  std::size_t n_pos = 0, n_neg = 0;
  for (const ScoredLabel& s : scores) {
    if (s.positive) ++n_pos;
    else ++n_neg;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("AUC undefined: need both a positive and a negative");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a].score < scores[b].score;
  });

  // average ranks across tie groups, then the Mann-Whitney statistic
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
    double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (scores[order[k]].positive) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  double p = static_cast<double>(n_pos);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

}  // namespace tabsa
