#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabsa/corpus.hpp"
#include "tabsa/linalg.hpp"

namespace tabsa {

struct RefinerConfig {
  std::size_t c = 4;            // sparsity stop threshold: stop once k <= c
  double alpha = 1.0;           // context weight in the aspect update
  double beta = 0.5;            // repulsion from the irrelevant target
  double lambda = 0.01;         // sparsity penalty weight
  double learning_rate = 0.05;  // plain gradient descent on (W, b)
  std::size_t max_iters = 200;
  std::uint64_t seed = 1;
  double init_range = 0.1;            // W, b init: uniform [-init_range, init_range]
  double divergence_floor = -1e6;     // aspect objective abort threshold
};

// The learnable projection and its coefficient vectors for one sentence.
struct CoefficientState {
  Vec w;         // R^m
  Vec b;         // R^n
  Vec u;         // sigmoid(X^T w + b), every entry in (0, 1)
  Vec u_sparse;  // u with entries below mean(u) zeroed
  std::size_t nonzero_count = 0;
};

// u_i if u_i >= mean(u), else 0. Ties at the mean are retained.
Vec step_threshold(std::span<const double> u);

// Forward pass: u = sigmoid(X^T w + b), then the step threshold.
CoefficientState coefficient_forward(const Matrix& x, Vec w, Vec b);

// t_ref = X * u_sparse: each word vector weighted by its coefficient, summed.
Vec reconstruct_target(const Matrix& x, std::span<const double> u_sparse);

// ||t_ref - t||^2 + lambda * sum(u_sparse)
double target_loss(std::span<const double> t_ref, std::span<const double> t,
                   std::span<const double> u_sparse, double lambda);

// a_ref = a + alpha * (X * u_sparse)
Vec refine_aspect_vector(std::span<const double> a, const Matrix& x,
                         std::span<const double> u_sparse, double alpha);

// ||a_ref - t_ref||^2 - beta * ||a_ref - t_irr||^2 + lambda * sum(u_sparse);
// the beta term drops out on single-target sentences.
double aspect_loss(std::span<const double> a_ref, std::span<const double> t_ref,
                   const std::optional<Vec>& t_irrelevant,
                   std::span<const double> u_sparse, double beta, double lambda);

// Objectives expressed as functions of (w, b) under a fixed retention mask.
// The production loop recomputes the mask each iteration but differentiates
// with it held fixed: zeroed coordinates get zero gradient. The gradient
// suites difference value() numerically against gradient().
struct TargetObjective {
  const Matrix& x;
  std::span<const double> t;
  double lambda;

  double value(std::span<const double> w, std::span<const double> b,
               std::span<const char> mask) const;
  void gradient(std::span<const double> w, std::span<const double> b,
                std::span<const char> mask, Vec& gw, Vec& gb) const;
};

struct AspectObjective {
  const Matrix& x;
  std::span<const double> a;
  std::span<const double> t_ref;
  const std::optional<Vec>& t_irrelevant;
  double alpha;
  double beta;
  double lambda;

  double value(std::span<const double> w, std::span<const double> b,
               std::span<const char> mask) const;
  void gradient(std::span<const double> w, std::span<const double> b,
                std::span<const char> mask, Vec& gw, Vec& gb) const;
};

std::vector<char> retention_mask(std::span<const double> u);

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  double loss = 0.0;
  std::size_t nonzero_count = 0;
  bool stepped = false;
  // loss after the step, under the mask the step was taken with
  double post_step_masked_loss = 0.0;
};

struct PhaseResult {
  Vec refined;
  CoefficientState state;
  std::size_t iterations = 0;
  bool converged = false;  // k <= c at the final forward pass
  double final_loss = 0.0;
};

// Iterative target reconstruction: forward, loss, one gradient step on (w, b),
// until k <= c or the iteration budget runs out.
PhaseResult refine_target(const SentenceContext& ctx, std::span<const double> t,
                          const RefinerConfig& cfg, std::uint64_t stream_seed,
                          std::vector<IterationRecord>* trace = nullptr);

// Same loop with the aspect objective and the aspect's own seeded (w, b).
// t_ref is the refined target from refine_target; the irrelevant target is
// the other target's original embedding. initial_aspect_out, when non-null,
// receives the aspect vector at the first forward pass (before any step).
PhaseResult refine_aspect(const SentenceContext& ctx, std::span<const double> t_ref,
                          const std::optional<Vec>& t_irrelevant,
                          const RefinerConfig& cfg, std::uint64_t stream_seed,
                          Vec* initial_aspect_out = nullptr,
                          std::vector<IterationRecord>* trace = nullptr);

struct RefinementResult {
  Vec refined_target;
  Vec refined_aspect;
  Vec initial_aspect;  // aspect path state before any optimization step
  Vec final_u_sparse;  // aspect path's final sparse coefficients
  std::size_t nonzero_count = 0;
  std::size_t iterations = 0;  // max over the two phases
  bool converged = false;      // both phases reached k <= c
  double final_target_loss = 0.0;
  double final_aspect_loss = 0.0;
  std::size_t target_iterations = 0;
  std::size_t aspect_iterations = 0;
  bool target_converged = false;
  bool aspect_converged = false;
};

using PairKey = std::pair<std::string, std::string>;  // (target_id, aspect)

// Per-iteration records and final coefficient states, for `inspect`.
struct PairTrace {
  std::vector<IterationRecord> target_path;
  std::vector<IterationRecord> aspect_path;
  CoefficientState target_state;
  CoefficientState aspect_state;
};

// Target reconstruction followed by aspect fine-tuning for one
// (sentence, target, aspect) work item. The irrelevant target is the other
// target's original embedding when the sentence has two.
RefinementResult refine_pair(const Sentence& sentence, const EmbeddingTable& table,
                             const std::string& target_id, const std::string& aspect,
                             const RefinerConfig& cfg, PairTrace* trace = nullptr);

// Runs the full pipeline for every (target, aspect) pair of one sentence.
// Deterministic given (cfg.seed, sentence.id, target, aspect); each work item
// derives its own random streams.
std::map<PairKey, RefinementResult> refine_sentence(
    const Sentence& sentence, const EmbeddingTable& table,
    const std::vector<std::string>& aspect_set, const RefinerConfig& cfg);

}  // namespace tabsa
