#include "tabsa/selfcheck.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <sstream>

#include "tabsa/corpus.hpp"
#include "tabsa/metrics.hpp"
#include "tabsa/refiner.hpp"
#include "tabsa/rng.hpp"

namespace tabsa {

namespace {

Vec random_vec(SplitMix64& rng, std::size_t n, double lo, double hi) {
  Vec v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

Matrix random_matrix(SplitMix64& rng, std::size_t m, std::size_t n, double scale) {
  Matrix x(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) x.at(i, j) = rng.uniform(-scale, scale);
  }
  return x;
}

// Central finite differences of a scalar function of (w, b), step 1e-5.
template <typename ValueFn>
void finite_difference_gradient(const ValueFn& value, const Vec& w, const Vec& b,
                                Vec& gw, Vec& gb, double h = 1e-5) {
  Vec wp = w, bp = b;
  gw.assign(w.size(), 0.0);
  gb.assign(b.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    double orig = wp[i];
    wp[i] = orig + h;
    double up = value(wp, bp);
    wp[i] = orig - h;
    double down = value(wp, bp);
    wp[i] = orig;
    gw[i] = (up - down) / (2.0 * h);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    double orig = bp[i];
    bp[i] = orig + h;
    double up = value(wp, bp);
    bp[i] = orig - h;
    double down = value(wp, bp);
    bp[i] = orig;
    gb[i] = (up - down) / (2.0 * h);
  }
}

double relative_error(const Vec& a, const Vec& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double denom = std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
  return std::sqrt(diff) / denom;
}

}  // namespace

CheckResult run_step_function_suite(std::size_t n_vectors, std::uint64_t seed) {
  CheckResult result{"step-function", true, ""};
  SplitMix64 rng(derive_seed(seed, {"step-suite"}));
  std::size_t checked = 0;
  for (std::size_t t = 0; t < n_vectors; ++t) {
    std::size_t n = 1 + rng.index(24);
    Vec u = random_vec(rng, n, -1.0, 2.0);
    Vec out = step_threshold(u);
    double m = mean(u);
    for (std::size_t i = 0; i < n; ++i) {
      bool should_zero = u[i] < m;
      if (should_zero && out[i] != 0.0) {
        result.pass = false;
        result.details = "kept a below-mean entry at vector " + std::to_string(t);
        return result;
      }
      if (!should_zero &&
          std::memcmp(&out[i], &u[i], sizeof(double)) != 0) {
        result.pass = false;
        result.details = "retained entry not bit-equal at vector " + std::to_string(t);
        return result;
      }
      ++checked;
    }
  }
  result.details = std::to_string(n_vectors) + " vectors, " + std::to_string(checked) +
                   " entries";
  return result;
}

CheckResult run_gradient_suite(std::size_t n_instances, std::uint64_t seed) {
  CheckResult result{"gradient-check", true, ""};
  const std::size_t ms[] = {5, 50};
  const std::size_t ns[] = {3, 20};
  double worst = 0.0;

  for (std::size_t t = 0; t < n_instances; ++t) {
    SplitMix64 rng(derive_seed(seed, {"grad", std::to_string(t)}));
    std::size_t m = ms[t % 2];
    std::size_t n = ns[(t / 2) % 2];
    Matrix x = random_matrix(rng, m, n, 0.5);
    Vec t_vec = random_vec(rng, m, -0.1, 0.1);
    Vec a_vec = random_vec(rng, m, -0.5, 0.5);
    Vec t_ref = random_vec(rng, m, -0.5, 0.5);
    std::optional<Vec> t_irr;
    if (rng.next_double() < 0.5) t_irr = random_vec(rng, m, -0.1, 0.1);
    Vec w = random_vec(rng, m, -0.1, 0.1);
    Vec b = random_vec(rng, n, -0.1, 0.1);

    CoefficientState st = coefficient_forward(x, w, b);
    std::vector<char> mask = retention_mask(st.u);

    const double lambda = 0.01;
    TargetObjective target_obj{x, t_vec, lambda};
    AspectObjective aspect_obj{x, a_vec, t_ref, t_irr, 1.0, 0.5, lambda};

    Vec gw, gb, fw, fb;
    target_obj.gradient(w, b, mask, gw, gb);
    finite_difference_gradient(
        [&](const Vec& ww, const Vec& bb) { return target_obj.value(ww, bb, mask); }, w,
        b, fw, fb);
    double err = std::max(relative_error(gw, fw), relative_error(gb, fb));

    aspect_obj.gradient(w, b, mask, gw, gb);
    finite_difference_gradient(
        [&](const Vec& ww, const Vec& bb) { return aspect_obj.value(ww, bb, mask); }, w,
        b, fw, fb);
    err = std::max({err, relative_error(gw, fw), relative_error(gb, fb)});

    // descent property on the same instances: one step at lr <= 1e-2 under the
    // fixed mask never increases the masked loss beyond 1e-12
    {
      const double lr = 1e-2;
      double before = aspect_obj.value(w, b, mask);
      Vec ws = w, bs = b;
      for (std::size_t i = 0; i < ws.size(); ++i) ws[i] -= lr * gw[i];
      for (std::size_t i = 0; i < bs.size(); ++i) bs[i] -= lr * gb[i];
      double after = aspect_obj.value(ws, bs, mask);
      if (after > before + 1e-12) {
        result.pass = false;
        result.details = "aspect step increased the masked loss at instance " +
                         std::to_string(t);
        return result;
      }
      target_obj.gradient(w, b, mask, gw, gb);
      before = target_obj.value(w, b, mask);
      ws = w;
      bs = b;
      for (std::size_t i = 0; i < ws.size(); ++i) ws[i] -= lr * gw[i];
      for (std::size_t i = 0; i < bs.size(); ++i) bs[i] -= lr * gb[i];
      after = target_obj.value(ws, bs, mask);
      if (after > before + 1e-12) {
        result.pass = false;
        result.details = "target step increased the masked loss at instance " +
                         std::to_string(t);
        return result;
      }
    }

    worst = std::max(worst, err);
    if (err >= 1e-4) {
      result.pass = false;
      std::ostringstream os;
      os << "instance " << t << " (m=" << m << ", n=" << n << ") relative error " << err;
      result.details = os.str();
      return result;
    }
  }
  std::ostringstream os;
  os << n_instances << " instances, worst relative error " << worst;
  result.details = os.str();
  return result;
}

CheckResult run_descent_suite(std::size_t n_refinements, std::uint64_t seed) {
  CheckResult result{"descent-termination", true, ""};
  RefinerConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.max_iters = 200;
  cfg.c = 4;

  std::size_t converged_count = 0;
  double worst_increase = 0.0;
  // each instance runs the target phase and the aspect phase: two refinements
  for (std::size_t t = 0; t * 2 < n_refinements; ++t) {
    SplitMix64 rng(derive_seed(seed, {"descent", std::to_string(t)}));
    std::size_t m = 8 + rng.index(9);
    std::size_t n = 5 + rng.index(16);

    SentenceContext ctx;
    ctx.x = random_matrix(rng, m, n, 0.5);
    ctx.target_column = rng.index(n);
    ctx.aspect.label = "probe";
    ctx.aspect.vector = random_vec(rng, m, -0.5, 0.5);

    Vec t_vec = random_vec(rng, m, -0.1, 0.1);
    std::optional<Vec> t_irr;
    if (rng.next_double() < 0.5) t_irr = random_vec(rng, m, -0.1, 0.1);

    cfg.seed = derive_seed(seed, {"descent-cfg", std::to_string(t)});

    std::vector<IterationRecord> trace;
    PhaseResult tp = refine_target(ctx, t_vec, cfg, cfg.seed, &trace);
    std::vector<IterationRecord> aspect_trace;
    PhaseResult ap = refine_aspect(ctx, tp.refined, t_irr, cfg,
                                   derive_seed(cfg.seed, {"aspect"}), nullptr,
                                   &aspect_trace);

    for (const PhaseResult* pr : {&tp, &ap}) {
      if (pr->iterations > cfg.max_iters) {
        result.pass = false;
        result.details = "instance " + std::to_string(t) + " exceeded max_iters";
        return result;
      }
      if (pr->converged && pr->state.nonzero_count > cfg.c) {
        result.pass = false;
        result.details = "instance " + std::to_string(t) + " converged with k > c";
        return result;
      }
      if (pr->converged) ++converged_count;
    }
    for (const std::vector<IterationRecord>* tr : {&trace, &aspect_trace}) {
      for (const IterationRecord& rec : *tr) {
        if (!rec.stepped) continue;
        double increase = rec.post_step_masked_loss - rec.loss;
        worst_increase = std::max(worst_increase, increase);
        if (increase > 1e-12) {
          std::ostringstream os;
          os << "instance " << t << " iteration " << rec.iteration
             << ": masked loss increased by " << increase;
          result.pass = false;
          result.details = os.str();
          return result;
        }
      }
    }
  }
  std::ostringstream os;
  os << n_refinements << " refinements terminated, " << converged_count
     << " converged, worst masked-loss increase " << worst_increase;
  result.details = os.str();
  return result;
}

CheckResult run_metrics_oracle_suite(std::size_t n_instances, std::uint64_t seed) {
  CheckResult result{"metrics-oracle", true, ""};
  double worst = 0.0;

  for (std::size_t t = 0; t < n_instances; ++t) {
    SplitMix64 rng(derive_seed(seed, {"metrics", std::to_string(t)}));

    // AUC against O(P*N) pair counting, ties worth one half
    std::size_t n = 4 + rng.index(20);
    std::vector<ScoredLabel> scores;
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid so ties actually occur
      double s = static_cast<double>(rng.index(8)) / 4.0;
      bool pos = rng.next_double() < 0.5;
      has_pos |= pos;
      has_neg |= !pos;
      scores.push_back({s, pos});
    }
    if (!has_pos) scores[0].positive = true;
    if (!has_neg) scores[1 % scores.size()].positive = false;

    double pairs = 0.0, total = 0.0;
    for (const ScoredLabel& p : scores) {
      if (!p.positive) continue;
      for (const ScoredLabel& q : scores) {
        if (q.positive) continue;
        ++total;
        if (p.score > q.score) pairs += 1.0;
        else if (p.score == q.score) pairs += 0.5;
      }
    }
    double expected = pairs / total;
    double got = auc(scores);
    worst = std::max(worst, std::abs(got - expected));

    // macro-F1 against explicit TP/FP/FN confusion counting
    std::vector<std::string> labels = {"a", "b", "c"};
    std::vector<DetectionDecision> decisions;
    std::size_t n_dec = 6 + rng.index(24);
    for (std::size_t i = 0; i < n_dec; ++i) {
      decisions.push_back({labels[rng.index(labels.size())], rng.next_double() < 0.5,
                           rng.next_double() < 0.5});
    }
    double f1_sum = 0.0;
    for (const std::string& label : labels) {
      double tp = 0, fp = 0, fn = 0;
      for (const DetectionDecision& d : decisions) {
        if (d.label != label) continue;
        tp += d.gold && d.pred;
        fp += !d.gold && d.pred;
        fn += d.gold && !d.pred;
      }
      double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      f1_sum += precision + recall > 0.0
                    ? 2.0 * precision * recall / (precision + recall)
                    : 0.0;
    }
    double f1_expected = f1_sum / static_cast<double>(labels.size());
    double f1_got = macro_f1(decisions, labels);
    worst = std::max(worst, std::abs(f1_got - f1_expected));

    if (worst > 1e-12) {
      std::ostringstream os;
      os << "instance " << t << " disagrees with oracle by " << worst;
      result.pass = false;
      result.details = os.str();
      return result;
    }
  }
  std::ostringstream os;
  os << n_instances << " instances, worst deviation " << worst;
  result.details = os.str();
  return result;
}

std::vector<CheckResult> run_all_selfchecks() {
  return {run_step_function_suite(), run_gradient_suite(), run_descent_suite(),
          run_metrics_oracle_suite()};
}

}  // namespace tabsa
