#include "tabsa/refiner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tabsa/errors.hpp"
#include "tabsa/rng.hpp"

namespace tabsa {

Vec step_threshold(std::span<const double> u) {
  double m = mean(u);
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] >= m ? u[i] : 0.0;
  return out;
}

std::vector<char> retention_mask(std::span<const double> u) {
  double m = mean(u);
  std::vector<char> mask(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) mask[i] = u[i] >= m ? 1 : 0;
  return mask;
}

CoefficientState coefficient_forward(const Matrix& x, Vec w, Vec b) {
  if (w.size() != x.rows()) {
    throw InputError("coefficient_forward: W has length " + std::to_string(w.size()) +
                     ", X has " + std::to_string(x.rows()) + " rows");
  }
  if (b.size() != x.cols()) {
    throw InputError("coefficient_forward: b has length " + std::to_string(b.size()) +
                     ", X has " + std::to_string(x.cols()) + " columns");
  }
  CoefficientState st;
  st.u = tmatvec(x, w);
  for (std::size_t i = 0; i < st.u.size(); ++i) st.u[i] = sigmoid(st.u[i] + b[i]);
  st.u_sparse = step_threshold(st.u);
  st.nonzero_count = 0;
  for (double v : st.u_sparse) {
    if (v != 0.0) ++st.nonzero_count;
  }
  st.w = std::move(w);
  st.b = std::move(b);
  return st;
}

Vec reconstruct_target(const Matrix& x, std::span<const double> u_sparse) {
  return matvec(x, u_sparse);
}

double target_loss(std::span<const double> t_ref, std::span<const double> t,
                   std::span<const double> u_sparse, double lambda) {
  double penalty = 0.0;
  for (double v : u_sparse) penalty += v;
  return squared_distance(t_ref, t) + lambda * penalty;
}

Vec refine_aspect_vector(std::span<const double> a, const Matrix& x,
                         std::span<const double> u_sparse, double alpha) {
  if (a.size() != x.rows()) {
    throw InputError("refine_aspect_vector: aspect has length " +
                     std::to_string(a.size()) + ", X has " + std::to_string(x.rows()) +
                     " rows");
  }
  Vec ctx = reconstruct_target(x, u_sparse);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + alpha * ctx[i];
  return out;
}

double aspect_loss(std::span<const double> a_ref, std::span<const double> t_ref,
                   const std::optional<Vec>& t_irrelevant,
                   std::span<const double> u_sparse, double beta, double lambda) {
  double penalty = 0.0;
  for (double v : u_sparse) penalty += v;
  double loss = squared_distance(a_ref, t_ref) + lambda * penalty;
  if (t_irrelevant) loss -= beta * squared_distance(a_ref, *t_irrelevant);
  return loss;
}

namespace {

// u = sigmoid(X^T w + b) with the mask applied: shared by both objectives.
Vec masked_coefficients(const Matrix& x, std::span<const double> w,
                        std::span<const double> b, std::span<const char> mask,
                        Vec* u_raw = nullptr) {
  Vec u = tmatvec(x, w);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = sigmoid(u[i] + b[i]);
  if (u_raw) *u_raw = u;
  Vec masked(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) masked[i] = mask[i] ? u[i] : 0.0;
  return masked;
}

// Backprop d(loss)/d(u_sparse_i) -> (gw, gb) through the sigmoid, with zeroed
// coordinates receiving zero gradient.
void backprop_coefficients(const Matrix& x, const Vec& u, std::span<const char> mask,
                           const Vec& dloss_du, Vec& gw, Vec& gb) {
  gw.assign(x.rows(), 0.0);
  gb.assign(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.cols(); ++i) {
    if (!mask[i]) continue;
    double dz = dloss_du[i] * u[i] * (1.0 - u[i]);
    gb[i] = dz;
    axpy(dz, x.col(i), gw);
  }
}

}  // namespace

double TargetObjective::value(std::span<const double> w, std::span<const double> b,
                              std::span<const char> mask) const {
  Vec u_sparse = masked_coefficients(x, w, b, mask);
  Vec t_ref = matvec(x, u_sparse);
  return target_loss(t_ref, t, u_sparse, lambda);
}

void TargetObjective::gradient(std::span<const double> w, std::span<const double> b,
                               std::span<const char> mask, Vec& gw, Vec& gb) const {
  Vec u;
  Vec u_sparse = masked_coefficients(x, w, b, mask, &u);
  Vec t_ref = matvec(x, u_sparse);

  // dL/du_i = 2 (t_ref - t) . x_i + lambda on retained coordinates
  Vec residual(t_ref.size());
  for (std::size_t j = 0; j < t_ref.size(); ++j) residual[j] = t_ref[j] - t[j];
  Vec dloss_du(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.cols(); ++i) {
    if (!mask[i]) continue;
    dloss_du[i] = 2.0 * dot(residual, x.col(i)) + lambda;
  }
  backprop_coefficients(x, u, mask, dloss_du, gw, gb);
}

double AspectObjective::value(std::span<const double> w, std::span<const double> b,
                              std::span<const char> mask) const {
  Vec u_sparse = masked_coefficients(x, w, b, mask);
  Vec a_ref = refine_aspect_vector(a, x, u_sparse, alpha);
  return aspect_loss(a_ref, t_ref, t_irrelevant, u_sparse, beta, lambda);
}

void AspectObjective::gradient(std::span<const double> w, std::span<const double> b,
                               std::span<const char> mask, Vec& gw, Vec& gb) const {
  Vec u;
  Vec u_sparse = masked_coefficients(x, w, b, mask, &u);
  Vec a_ref = refine_aspect_vector(a, x, u_sparse, alpha);

  // dL/da_ref = 2 (a_ref - t_ref) - 2 beta (a_ref - t_irr)
  Vec dloss_da(a_ref.size());
  for (std::size_t j = 0; j < a_ref.size(); ++j) {
    dloss_da[j] = 2.0 * (a_ref[j] - t_ref[j]);
    if (t_irrelevant) dloss_da[j] -= 2.0 * beta * (a_ref[j] - (*t_irrelevant)[j]);
  }
  Vec dloss_du(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.cols(); ++i) {
    if (!mask[i]) continue;
    dloss_du[i] = alpha * dot(dloss_da, x.col(i)) + lambda;
  }
  backprop_coefficients(x, u, mask, dloss_du, gw, gb);
}

namespace {

Vec seeded_uniform(SplitMix64& rng, std::size_t n, double range) {
  Vec v(n);
  for (double& x : v) x = rng.uniform(-range, range);
  return v;
}

struct LoopCallbacks {
  // value of the objective at (w, b) under the given mask
  std::function<double(const Vec&, const Vec&, std::span<const char>)> value;
  std::function<void(const Vec&, const Vec&, std::span<const char>, Vec&, Vec&)> gradient;
  // refined vector + loss for a forward state
  std::function<std::pair<Vec, double>(const CoefficientState&)> evaluate;
};

PhaseResult run_refinement_loop(const Matrix& x, const RefinerConfig& cfg,
                                std::uint64_t stream_seed, const LoopCallbacks& cb,
                                const char* phase_name, bool check_floor,
                                Vec* initial_out,
                                std::vector<IterationRecord>* trace) {
  SplitMix64 rng(stream_seed);
  Vec w = seeded_uniform(rng, x.rows(), cfg.init_range);
  Vec b = seeded_uniform(rng, x.cols(), cfg.init_range);

  PhaseResult result;
  Vec gw, gb;
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    CoefficientState st = coefficient_forward(x, std::move(w), std::move(b));
    auto [refined, loss] = cb.evaluate(st);
    if (it == 1 && initial_out) *initial_out = refined;

    if (!std::isfinite(loss)) {
      throw NumericalDivergenceError(std::string(phase_name) + " loss is not finite",
                                     it);
    }
    if (check_floor && loss < cfg.divergence_floor) {
      throw UnboundedObjectiveError(std::string(phase_name) +
                                        " objective fell past the divergence floor",
                                    it);
    }

    result.iterations = it;
    result.final_loss = loss;
    if (st.nonzero_count <= cfg.c) {
      result.converged = true;
      result.refined = std::move(refined);
      result.state = std::move(st);
      if (trace) trace->push_back({it, loss, result.state.nonzero_count, false, loss});
      return result;
    }
    if (it == cfg.max_iters) {
      result.refined = std::move(refined);
      result.state = std::move(st);
      if (trace) trace->push_back({it, loss, result.state.nonzero_count, false, loss});
      return result;
    }

    std::vector<char> mask = retention_mask(st.u);
    cb.gradient(st.w, st.b, mask, gw, gb);
    w = std::move(st.w);
    b = std::move(st.b);
    axpy(-cfg.learning_rate, gw, w);
    axpy(-cfg.learning_rate, gb, b);

    if (trace) {
      double post = cb.value(w, b, mask);
      trace->push_back({it, loss, st.nonzero_count, true, post});
    }
  }
  return result;  // unreachable: the loop always returns by max_iters
}

}  // namespace

PhaseResult refine_target(const SentenceContext& ctx, std::span<const double> t,
                          const RefinerConfig& cfg, std::uint64_t stream_seed,
                          std::vector<IterationRecord>* trace) {
  TargetObjective objective{ctx.x, t, cfg.lambda};
  LoopCallbacks cb;
  cb.value = [&](const Vec& w, const Vec& b, std::span<const char> mask) {
    return objective.value(w, b, mask);
  };
  cb.gradient = [&](const Vec& w, const Vec& b, std::span<const char> mask, Vec& gw,
                    Vec& gb) { objective.gradient(w, b, mask, gw, gb); };
  cb.evaluate = [&](const CoefficientState& st) {
    Vec t_ref = reconstruct_target(ctx.x, st.u_sparse);
    double loss = target_loss(t_ref, t, st.u_sparse, cfg.lambda);
    return std::make_pair(std::move(t_ref), loss);
  };
  return run_refinement_loop(ctx.x, cfg, stream_seed, cb, "target refinement",
                             /*check_floor=*/false, nullptr, trace);
}

PhaseResult refine_aspect(const SentenceContext& ctx, std::span<const double> t_ref,
                          const std::optional<Vec>& t_irrelevant,
                          const RefinerConfig& cfg, std::uint64_t stream_seed,
                          Vec* initial_aspect_out,
                          std::vector<IterationRecord>* trace) {
  AspectObjective objective{ctx.x,    ctx.aspect.vector, t_ref, t_irrelevant,
                            cfg.alpha, cfg.beta,          cfg.lambda};
  LoopCallbacks cb;
  cb.value = [&](const Vec& w, const Vec& b, std::span<const char> mask) {
    return objective.value(w, b, mask);
  };
  cb.gradient = [&](const Vec& w, const Vec& b, std::span<const char> mask, Vec& gw,
                    Vec& gb) { objective.gradient(w, b, mask, gw, gb); };
  cb.evaluate = [&](const CoefficientState& st) {
    Vec a_ref = refine_aspect_vector(ctx.aspect.vector, ctx.x, st.u_sparse, cfg.alpha);
    double loss = aspect_loss(a_ref, t_ref, t_irrelevant, st.u_sparse, cfg.beta,
                              cfg.lambda);
    return std::make_pair(std::move(a_ref), loss);
  };
  return run_refinement_loop(ctx.x, cfg, stream_seed, cb, "aspect refinement",
                             /*check_floor=*/true, initial_aspect_out, trace);
}

RefinementResult refine_pair(const Sentence& sentence, const EmbeddingTable& table,
                             const std::string& target_id, const std::string& aspect,
                             const RefinerConfig& cfg, PairTrace* trace) {
  try {
    SentenceContext ctx =
        build_context(sentence, target_id, aspect_embedding(table, aspect), table);

    std::span<const double> t = table.target_embedding(target_id);
    std::optional<Vec> t_irr;
    if (ctx.other_target_column) {
      std::span<const double> other = table.target_embedding(ctx.other_target_id);
      t_irr = Vec(other.begin(), other.end());
    }

    std::uint64_t target_stream =
        derive_seed(cfg.seed, {sentence.id, target_id, aspect, "target"});
    std::uint64_t aspect_stream =
        derive_seed(cfg.seed, {sentence.id, target_id, aspect, "aspect"});

    PhaseResult tp = refine_target(ctx, t, cfg, target_stream,
                                   trace ? &trace->target_path : nullptr);
    RefinementResult r;
    PhaseResult ap = refine_aspect(ctx, tp.refined, t_irr, cfg, aspect_stream,
                                   &r.initial_aspect,
                                   trace ? &trace->aspect_path : nullptr);

    r.refined_target = std::move(tp.refined);
    r.refined_aspect = std::move(ap.refined);
    r.nonzero_count = ap.state.nonzero_count;
    r.iterations = std::max(tp.iterations, ap.iterations);
    r.converged = tp.converged && ap.converged;
    r.final_target_loss = tp.final_loss;
    r.final_aspect_loss = ap.final_loss;
    r.target_iterations = tp.iterations;
    r.aspect_iterations = ap.iterations;
    r.target_converged = tp.converged;
    r.aspect_converged = ap.converged;
    if (trace) {
      trace->target_state = std::move(tp.state);
      trace->aspect_state = ap.state;  // u_sparse still needed below
    }
    r.final_u_sparse = std::move(ap.state.u_sparse);
    return r;
  } catch (const NumericalDivergenceError& e) {
    throw NumericalDivergenceError("sentence " + sentence.id + ", target " + target_id +
                                       ", aspect " + aspect + ": " + e.what(),
                                   e.iteration());
  }
}

std::map<PairKey, RefinementResult> refine_sentence(
    const Sentence& sentence, const EmbeddingTable& table,
    const std::vector<std::string>& aspect_set, const RefinerConfig& cfg) {
  std::map<PairKey, RefinementResult> results;
  for (const auto& [target_id, pos] : sentence.target_positions) {
    for (const std::string& aspect : aspect_set) {
      results.emplace(PairKey{target_id, aspect},
                      refine_pair(sentence, table, target_id, aspect, cfg));
    }
  }
  return results;
}

}  // namespace tabsa
