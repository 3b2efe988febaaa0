#include "tabsa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tabsa/errors.hpp"
#include "tabsa/parallel.hpp"
#include "tabsa/rng.hpp"

namespace tabsa {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json synthetic_to_json(const SyntheticConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["count"] = c.count;
  j["two_target_ratio"] = c.two_target_ratio;
  j["dim"] = c.dim;
  j["aspects"] = c.aspects;
  ordered_json lex;
  for (const auto& [aspect, words] : c.aspect_lexicons) lex[aspect] = words;
  j["aspect_lexicons"] = lex;
  j["positive_cues"] = c.positive_cues;
  j["negative_cues"] = c.negative_cues;
  j["distractors"] = c.distractors;
  j["min_distractors"] = c.min_distractors;
  j["max_distractors"] = c.max_distractors;
  j["second_opinion_prob"] = c.second_opinion_prob;
  j["cue_strength"] = c.cue_strength;
  j["cue_noise"] = c.cue_noise;
  j["valence_strength"] = c.valence_strength;
  j["distractor_scale"] = c.distractor_scale;
  return j;
}

SyntheticConfig synthetic_from_json(const ordered_json& j) {
  SyntheticConfig c = SyntheticConfig::defaults();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("count")) c.count = j["count"].get<std::size_t>();
  if (j.contains("two_target_ratio")) c.two_target_ratio = j["two_target_ratio"].get<double>();
  if (j.contains("dim")) c.dim = j["dim"].get<std::size_t>();
  if (j.contains("aspects")) c.aspects = j["aspects"].get<std::vector<std::string>>();
  if (j.contains("aspect_lexicons")) {
    c.aspect_lexicons.clear();
    for (const auto& [aspect, words] : j["aspect_lexicons"].items()) {
      c.aspect_lexicons[aspect] = words.get<std::vector<std::string>>();
    }
  }
  if (j.contains("positive_cues")) c.positive_cues = j["positive_cues"].get<std::vector<std::string>>();
  if (j.contains("negative_cues")) c.negative_cues = j["negative_cues"].get<std::vector<std::string>>();
  if (j.contains("distractors")) c.distractors = j["distractors"].get<std::vector<std::string>>();
  if (j.contains("min_distractors")) c.min_distractors = j["min_distractors"].get<std::size_t>();
  if (j.contains("max_distractors")) c.max_distractors = j["max_distractors"].get<std::size_t>();
  if (j.contains("second_opinion_prob")) c.second_opinion_prob = j["second_opinion_prob"].get<double>();
  if (j.contains("cue_strength")) c.cue_strength = j["cue_strength"].get<double>();
  if (j.contains("cue_noise")) c.cue_noise = j["cue_noise"].get<double>();
  if (j.contains("valence_strength")) c.valence_strength = j["valence_strength"].get<double>();
  if (j.contains("distractor_scale")) c.distractor_scale = j["distractor_scale"].get<double>();
  return c;
}

ordered_json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

ordered_json separation_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return "+inf";
  return *v;
}

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["mode"] = r.mode;
  j["aspect_strict_acc"] = opt_json(r.aspect_strict_acc);
  j["aspect_macro_f1"] = opt_json(r.aspect_macro_f1);
  j["aspect_auc"] = opt_json(r.aspect_auc);
  j["sentiment_acc"] = opt_json(r.sentiment_acc);
  j["sentiment_auc"] = opt_json(r.sentiment_auc);
  ordered_json counts;
  for (const auto& [label, n] : r.gold_counts) counts[label] = n;
  j["gold_counts"] = counts;
  j["detection_rule"] = "argmax over classes; detected iff argmax != None";
  return j;
}

std::optional<double> opt_delta(const std::optional<double>& a,
                                const std::optional<double>& b) {
  if (!a || !b) return std::nullopt;
  return *b - *a;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

}  // namespace

std::string RunConfig::to_json() const {
  ordered_json j;
  ordered_json data;
  if (synthetic) {
    data["kind"] = "synthetic";
    data["synthetic"] = synthetic_to_json(*synthetic);
  } else {
    data["kind"] = "sentihood";
    data["path"] = sentihood_path;
    data["glove"] = glove_path;
    data["dim"] = dim;
  }
  j["data"] = data;
  ordered_json ref;
  ref["c"] = refiner.c;
  ref["alpha"] = refiner.alpha;
  ref["beta"] = refiner.beta;
  ref["lambda"] = refiner.lambda;
  ref["learning_rate"] = refiner.learning_rate;
  ref["max_iters"] = refiner.max_iters;
  ref["init_range"] = refiner.init_range;
  ref["divergence_floor"] = refiner.divergence_floor;
  j["refiner"] = ref;
  ordered_json tr;
  tr["epochs"] = train.epochs;
  tr["learning_rate"] = train.learning_rate;
  j["train"] = tr;
  j["aspects"] = aspects;
  j["seed"] = seed;
  j["n_seeds"] = n_seeds;
  j["workers"] = workers;
  j["out_dir"] = out_dir;
  j["refined_path"] = refined_path;
  j["emit_csv"] = emit_csv;
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed config JSON in " + path + ": " + e.what());
  }

  RunConfig cfg;
  if (j.contains("data")) {
    const auto& data = j["data"];
    std::string kind = data.value("kind", "");
    if (kind == "synthetic") {
      cfg.synthetic = synthetic_from_json(data.value("synthetic", ordered_json::object()));
    } else if (kind == "sentihood") {
      cfg.sentihood_path = data.value("path", "");
      cfg.glove_path = data.value("glove", "");
      cfg.dim = data.value("dim", std::size_t{300});
    } else if (!kind.empty()) {
      throw InputError("unknown data kind '" + kind + "' in " + path);
    }
  }
  if (j.contains("refiner")) {
    const auto& r = j["refiner"];
    cfg.refiner.c = r.value("c", cfg.refiner.c);
    cfg.refiner.alpha = r.value("alpha", cfg.refiner.alpha);
    cfg.refiner.beta = r.value("beta", cfg.refiner.beta);
    cfg.refiner.lambda = r.value("lambda", cfg.refiner.lambda);
    cfg.refiner.learning_rate = r.value("learning_rate", cfg.refiner.learning_rate);
    cfg.refiner.max_iters = r.value("max_iters", cfg.refiner.max_iters);
    cfg.refiner.init_range = r.value("init_range", cfg.refiner.init_range);
    cfg.refiner.divergence_floor = r.value("divergence_floor", cfg.refiner.divergence_floor);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
  }
  if (j.contains("aspects")) cfg.aspects = j["aspects"].get<std::vector<std::string>>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n_seeds")) cfg.n_seeds = j["n_seeds"].get<std::size_t>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<std::size_t>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("refined_path")) cfg.refined_path = j["refined_path"].get<std::string>();
  if (j.contains("emit_csv")) cfg.emit_csv = j["emit_csv"].get<bool>();
  return cfg;
}

Corpus load_corpus(const RunConfig& cfg) {
  if (cfg.synthetic && !cfg.sentihood_path.empty()) {
    throw InputError("choose either --data or --synthetic, not both");
  }

  Corpus corpus{{}, EmbeddingTable(1), {}};
  if (cfg.synthetic) {
    corpus.sentences = generate_synthetic(*cfg.synthetic);
    corpus.table = build_synthetic_table(*cfg.synthetic);
    corpus.aspects = cfg.synthetic->aspects;
  } else if (!cfg.sentihood_path.empty()) {
    if (cfg.glove_path.empty()) {
      throw InputError("SentiHood data needs --glove PATH");
    }
    corpus.table = parse_embedding_file(cfg.glove_path, cfg.dim, cfg.seed);
    corpus.sentences = load_sentihood(cfg.sentihood_path);
    std::set<std::string> aspects(cfg.aspects.begin(), cfg.aspects.end());
    if (aspects.empty()) aspects = default_aspect_set();
    corpus.sentences = filter_top_aspects(std::move(corpus.sentences), aspects);
    corpus.aspects.assign(aspects.begin(), aspects.end());
  } else {
    throw InputError("no data source: pass --data PATH or --synthetic CFG");
  }

  if (!cfg.aspects.empty()) corpus.aspects = cfg.aspects;
  assign_splits(corpus.sentences, derive_seed(cfg.seed, {"split"}));
  return corpus;
}

RefinementStore refine_corpus(const std::vector<Sentence>& sentences,
                              const EmbeddingTable& table,
                              const std::vector<std::string>& aspects,
                              const RefinerConfig& refiner, std::size_t workers) {
  std::vector<std::map<PairKey, RefinementResult>> per_sentence(sentences.size());
  parallel_for(sentences.size(), workers, [&](std::size_t i) {
    per_sentence[i] = refine_sentence(sentences[i], table, aspects, refiner);
  });

  RefinementStore store;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (auto& [key, result] : per_sentence[i]) {
      store.emplace(ExampleKey{sentences[i].id, key.first, key.second},
                    std::move(result));
    }
  }
  return store;
}

RefineSummary summarize(const RefinementStore& store) {
  RefineSummary s;
  s.records = store.size();
  if (store.empty()) return s;
  double conv = 0.0, iters = 0.0, k = 0.0;
  for (const auto& [key, r] : store) {
    conv += r.converged ? 1.0 : 0.0;
    iters += static_cast<double>(r.iterations);
    k += static_cast<double>(r.nonzero_count);
  }
  double n = static_cast<double>(store.size());
  s.convergence_rate = conv / n;
  s.mean_iterations = iters / n;
  s.mean_nonzero = k / n;
  return s;
}

void write_refined_jsonl(const RefinementStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write refined records to " + path);
  for (const auto& [key, r] : store) {
    ordered_json j;
    j["sentence_id"] = key.sentence_id;
    j["target_id"] = key.target_id;
    j["aspect"] = key.aspect;
    j["t_refined"] = r.refined_target;
    j["a_refined"] = r.refined_aspect;
    j["a_initial"] = r.initial_aspect;
    j["k"] = r.nonzero_count;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["final_losses"] = {{"target", r.final_target_loss}, {"aspect", r.final_aspect_loss}};
    j["phase_iterations"] = {{"target", r.target_iterations}, {"aspect", r.aspect_iterations}};
    j["phase_converged"] = {{"target", r.target_converged}, {"aspect", r.aspect_converged}};
    out << j.dump() << '\n';
  }
}

RefinementStore read_refined_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open refined records: " + path);
  RefinementStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": bad record: " + e.what());
    }
    ExampleKey key{j.at("sentence_id").get<std::string>(),
                   j.at("target_id").get<std::string>(),
                   j.at("aspect").get<std::string>()};
    RefinementResult r;
    r.refined_target = j.at("t_refined").get<Vec>();
    r.refined_aspect = j.at("a_refined").get<Vec>();
    r.initial_aspect = j.value("a_initial", Vec{});
    r.nonzero_count = j.at("k").get<std::size_t>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.converged = j.at("converged").get<bool>();
    if (j.contains("final_losses")) {
      r.final_target_loss = j["final_losses"].value("target", 0.0);
      r.final_aspect_loss = j["final_losses"].value("aspect", 0.0);
    }
    if (j.contains("phase_iterations")) {
      r.target_iterations = j["phase_iterations"].value("target", std::size_t{0});
      r.aspect_iterations = j["phase_iterations"].value("aspect", std::size_t{0});
    }
    if (j.contains("phase_converged")) {
      r.target_converged = j["phase_converged"].value("target", false);
      r.aspect_converged = j["phase_converged"].value("aspect", false);
    }
    store.emplace(std::move(key), std::move(r));
  }
  return store;
}

std::optional<double> separation_over_store(const std::vector<Sentence>& sentences,
                                            const RefinementStore& store, bool refined) {
  std::map<std::string, std::vector<Vec>> populations;
  for (const Sentence& s : sentences) {
    for (const OpinionTuple& op : s.opinions) {
      auto it = store.find(ExampleKey{s.id, op.target_id, op.aspect});
      if (it == store.end()) continue;
      const Vec& v = refined ? it->second.refined_aspect : it->second.initial_aspect;
      if (v.empty()) continue;
      populations[op.aspect].push_back(v);
    }
  }
  if (populations.size() < 2) return std::nullopt;
  for (const auto& [aspect, vecs] : populations) {
    if (vecs.size() < 2) return std::nullopt;
  }
  try {
    return separation_statistic(populations);
  } catch (const UndefinedMetricError&) {
    return std::nullopt;
  }
}

namespace {

std::vector<const Sentence*> split_of(const std::vector<Sentence>& sentences,
                                      const std::string& split) {
  std::vector<const Sentence*> out;
  for (const Sentence& s : sentences) {
    if (s.split == split) out.push_back(&s);
  }
  return out;
}

std::vector<Sentence> deref(const std::vector<const Sentence*>& ptrs) {
  std::vector<Sentence> out;
  out.reserve(ptrs.size());
  for (const Sentence* p : ptrs) out.push_back(*p);
  return out;
}

}  // namespace

SeedOutcome run_eval_seed(const Corpus& corpus, const RunConfig& cfg,
                          std::uint64_t seed) {
  SeedOutcome outcome;
  outcome.seed = seed;

  // fresh random target vectors per seed; word vectors and splits stay fixed
  EmbeddingTable table = corpus.table.reseeded(seed);
  RefinerConfig refiner = cfg.refiner;
  refiner.seed = seed;

  RefinementStore store;
  if (!cfg.refined_path.empty()) {
    store = read_refined_jsonl(cfg.refined_path);
  } else {
    store = refine_corpus(corpus.sentences, table, corpus.aspects, refiner, cfg.workers);
  }
  outcome.refinement = summarize(store);

  std::vector<Sentence> train_split = deref(split_of(corpus.sentences, "train"));
  std::vector<Sentence> test_split = deref(split_of(corpus.sentences, "test"));
  if (train_split.empty() || test_split.empty()) {
    throw InputError("empty train or test split; corpus too small");
  }

  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = seed;

  for (Provenance mode : {Provenance::Raw, Provenance::Refined}) {
    std::vector<PairExample> train_ex =
        build_examples(train_split, table, corpus.aspects, mode, &store);
    std::vector<PairExample> test_ex =
        build_examples(test_split, table, corpus.aspects, mode, &store);
    ClassifierModel model = train(train_ex, train_cfg);
    EvalReport report = evaluate(model, test_ex, corpus.aspects);
    if (mode == Provenance::Raw) {
      outcome.raw = report;
    } else {
      outcome.refined = report;
    }
  }

  outcome.separation_raw = separation_over_store(corpus.sentences, store, false);
  outcome.separation_refined = separation_over_store(corpus.sentences, store, true);

  if (cfg.emit_csv && seed == cfg.seed) {
    for (const Sentence& s : corpus.sentences) {
      for (const OpinionTuple& op : s.opinions) {
        auto it = store.find(ExampleKey{s.id, op.target_id, op.aspect});
        if (it == store.end()) continue;
        outcome.csv_rows.push_back(
            {op.aspect, s.id, op.target_id, "unrefined", it->second.initial_aspect});
        outcome.csv_rows.push_back(
            {op.aspect, s.id, op.target_id, "refined", it->second.refined_aspect});
      }
    }
  }
  return outcome;
}

namespace {

struct MetricColumn {
  const char* name;
  std::optional<double> EvalReport::* field;
};

constexpr MetricColumn kColumns[] = {
    {"aspect_strict_acc", &EvalReport::aspect_strict_acc},
    {"aspect_macro_f1", &EvalReport::aspect_macro_f1},
    {"aspect_auc", &EvalReport::aspect_auc},
    {"sentiment_acc", &EvalReport::sentiment_acc},
    {"sentiment_auc", &EvalReport::sentiment_auc},
};

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> stddev_of(const std::vector<std::optional<double>>& values) {
  std::optional<double> m = mean_of(values);
  if (!m) return std::nullopt;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += (*v - *m) * (*v - *m);
      ++n;
    }
  }
  return std::sqrt(sum / static_cast<double>(n));
}

std::string format_pct(const std::optional<double>& v, bool sign = false) {
  if (!v) return "     --";
  char buf[32];
  std::snprintf(buf, sizeof(buf), sign ? "%+7.2f" : "%7.2f", *v * 100.0);
  return buf;
}

std::string render_table(const EvalReport& raw, const EvalReport& refined) {
  std::ostringstream os;
  os << "                 Aspect Detection             Sentiment Classification\n";
  os << "Vectors        Acc. (%)  F1 (%)  AUC (%)      Acc. (%)  AUC (%)\n";
  auto row = [&](const char* name, const EvalReport& r) {
    os << name;
    for (std::size_t i = std::strlen(name); i < 13; ++i) os << ' ';
    os << format_pct(r.aspect_strict_acc) << ' ' << format_pct(r.aspect_macro_f1) << ' '
       << format_pct(r.aspect_auc) << "     " << format_pct(r.sentiment_acc) << ' '
       << format_pct(r.sentiment_auc) << '\n';
  };
  row("raw", raw);
  row("refined", refined);
  os << "delta        ";
  os << format_pct(opt_delta(raw.aspect_strict_acc, refined.aspect_strict_acc), true)
     << ' ' << format_pct(opt_delta(raw.aspect_macro_f1, refined.aspect_macro_f1), true)
     << ' ' << format_pct(opt_delta(raw.aspect_auc, refined.aspect_auc), true) << "     "
     << format_pct(opt_delta(raw.sentiment_acc, refined.sentiment_acc), true) << ' '
     << format_pct(opt_delta(raw.sentiment_auc, refined.sentiment_auc), true) << '\n';
  return os.str();
}

EvalReport mean_report(const std::vector<SeedOutcome>& seeds, bool refined) {
  EvalReport mean;
  mean.mode = refined ? "refined" : "raw";
  for (const MetricColumn& col : kColumns) {
    std::vector<std::optional<double>> values;
    for (const SeedOutcome& s : seeds) {
      values.push_back((refined ? s.refined : s.raw).*col.field);
    }
    mean.*col.field = mean_of(values);
  }
  return mean;
}

}  // namespace

EvalOutcome cmd_eval(const RunConfig& cfg) {
  if (!cfg.refined_path.empty() && cfg.n_seeds > 1) {
    throw InputError("a pre-computed refined file only supports a single seed");
  }
  Corpus corpus = load_corpus(cfg);

  EvalOutcome outcome;
  for (std::size_t i = 0; i < cfg.n_seeds; ++i) {
    outcome.seeds.push_back(run_eval_seed(corpus, cfg, cfg.seed + i));
  }

  ordered_json j;
  j["aspects"] = corpus.aspects;
  ordered_json dataset;
  dataset["sentences"] = corpus.sentences.size();
  dataset["train"] = split_of(corpus.sentences, "train").size();
  dataset["dev"] = split_of(corpus.sentences, "dev").size();
  dataset["test"] = split_of(corpus.sentences, "test").size();
  j["dataset"] = dataset;

  ordered_json seeds = ordered_json::array();
  for (const SeedOutcome& s : outcome.seeds) {
    ordered_json js;
    js["seed"] = s.seed;
    js["raw"] = report_json(s.raw);
    js["refined"] = report_json(s.refined);
    ordered_json delta;
    for (const MetricColumn& col : kColumns) {
      delta[col.name] = opt_json(opt_delta(s.raw.*col.field, s.refined.*col.field));
    }
    js["delta"] = delta;
    js["separation"] = {{"raw", separation_json(s.separation_raw)},
                        {"refined", separation_json(s.separation_refined)}};
    js["refinement"] = {{"records", s.refinement.records},
                        {"convergence_rate", s.refinement.convergence_rate},
                        {"mean_iterations", s.refinement.mean_iterations},
                        {"mean_nonzero", s.refinement.mean_nonzero}};
    seeds.push_back(js);
  }
  j["seeds"] = seeds;

  ordered_json agg;
  for (bool refined : {false, true}) {
    ordered_json block;
    for (const MetricColumn& col : kColumns) {
      std::vector<std::optional<double>> values;
      for (const SeedOutcome& s : outcome.seeds) {
        values.push_back((refined ? s.refined : s.raw).*col.field);
      }
      block[col.name] = {{"mean", opt_json(mean_of(values))},
                         {"stddev", opt_json(stddev_of(values))}};
    }
    agg[refined ? "refined" : "raw"] = block;
  }
  {
    ordered_json block;
    for (const MetricColumn& col : kColumns) {
      std::vector<std::optional<double>> values;
      for (const SeedOutcome& s : outcome.seeds) {
        values.push_back(opt_delta(s.raw.*col.field, s.refined.*col.field));
      }
      block[col.name] = {{"mean", opt_json(mean_of(values))},
                         {"stddev", opt_json(stddev_of(values))}};
    }
    agg["delta"] = block;
  }
  j["aggregate"] = agg;
  outcome.report_json = j.dump(2) + "\n";

  EvalReport raw_mean = mean_report(outcome.seeds, false);
  EvalReport refined_mean = mean_report(outcome.seeds, true);
  std::ostringstream text;
  text << "Evaluation over " << outcome.seeds.size()
       << (outcome.seeds.size() == 1 ? " seed" : " seeds") << " (test split)\n\n";
  text << render_table(raw_mean, refined_mean);
  text << "\nAspect separation (inter/intra):";
  {
    std::vector<std::optional<double>> raw_sep, ref_sep;
    for (const SeedOutcome& s : outcome.seeds) {
      raw_sep.push_back(s.separation_raw);
      ref_sep.push_back(s.separation_refined);
    }
    auto fmt = [](const std::optional<double>& v) {
      if (!v) return std::string("--");
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", *v);
      return std::string(buf);
    };
    text << " unrefined " << fmt(mean_of(raw_sep)) << ", refined "
         << fmt(mean_of(ref_sep)) << "\n";
  }
  outcome.report_text = text.str();

  fs::create_directories(cfg.out_dir);
  write_text_file(cfg.out_dir + "/eval_report.json", outcome.report_json);
  write_text_file(cfg.out_dir + "/report.txt", outcome.report_text);
  write_text_file(cfg.out_dir + "/resolved_config.json", cfg.to_json());

  if (cfg.emit_csv) {
    std::ostringstream csv;
    csv << "aspect,sentence_id,target_id,kind";
    std::size_t dim = outcome.seeds.empty() || outcome.seeds[0].csv_rows.empty()
                          ? 0
                          : outcome.seeds[0].csv_rows[0].vector.size();
    for (std::size_t i = 0; i < dim; ++i) csv << ",c" << i;
    csv << '\n';
    char buf[32];
    for (const AspectVectorRow& row : outcome.seeds[0].csv_rows) {
      csv << row.aspect << ',' << row.sentence_id << ',' << row.target_id << ','
          << row.kind;
      for (double x : row.vector) {
        std::snprintf(buf, sizeof(buf), ",%.17g", x);
        csv << buf;
      }
      csv << '\n';
    }
    write_text_file(cfg.out_dir + "/aspect_vectors.csv", csv.str());
  }
  return outcome;
}

RefineOutcome cmd_refine(const RunConfig& cfg) {
  Corpus corpus = load_corpus(cfg);
  EmbeddingTable table = corpus.table.reseeded(cfg.seed);
  RefinerConfig refiner = cfg.refiner;
  refiner.seed = cfg.seed;

  RefinementStore store =
      refine_corpus(corpus.sentences, table, corpus.aspects, refiner, cfg.workers);

  RefineOutcome outcome;
  outcome.summary = summarize(store);

  ordered_json j;
  j["records"] = outcome.summary.records;
  j["convergence_rate"] = outcome.summary.convergence_rate;
  j["mean_iterations"] = outcome.summary.mean_iterations;
  j["mean_nonzero"] = outcome.summary.mean_nonzero;
  outcome.summary_json = j.dump(2) + "\n";

  fs::create_directories(cfg.out_dir);
  outcome.refined_path = cfg.out_dir + "/refined.jsonl";
  write_refined_jsonl(store, outcome.refined_path);
  write_text_file(cfg.out_dir + "/refine_summary.json", outcome.summary_json);
  write_text_file(cfg.out_dir + "/resolved_config.json", cfg.to_json());
  return outcome;
}

InspectOutcome cmd_inspect(const RunConfig& cfg, const std::string& sentence_id,
                           const std::string& target_id, const std::string& aspect) {
  Corpus corpus = load_corpus(cfg);
  const Sentence* sentence = nullptr;
  for (const Sentence& s : corpus.sentences) {
    if (s.id == sentence_id) {
      sentence = &s;
      break;
    }
  }
  if (!sentence) throw InputError("unknown sentence id: " + sentence_id);
  if (!sentence->target_positions.count(target_id)) {
    throw InputError("sentence " + sentence_id + " has no target " + target_id);
  }

  EmbeddingTable table = corpus.table.reseeded(cfg.seed);
  RefinerConfig refiner = cfg.refiner;
  refiner.seed = cfg.seed;

  PairTrace trace;
  RefinementResult result = refine_pair(*sentence, table, target_id, aspect, refiner,
                                        &trace);

  ordered_json j;
  j["sentence_id"] = sentence_id;
  j["target_id"] = target_id;
  j["aspect"] = aspect;
  j["tokens"] = sentence->tokens;
  auto path_json = [&](const std::vector<IterationRecord>& recs,
                       const CoefficientState& st) {
    ordered_json p;
    p["u"] = st.u;
    p["u_sparse"] = st.u_sparse;
    p["nonzero_count"] = st.nonzero_count;
    ordered_json curve = ordered_json::array();
    for (const IterationRecord& r : recs) curve.push_back(r.loss);
    p["loss_curve"] = curve;
    return p;
  };
  j["target_path"] = path_json(trace.target_path, trace.target_state);
  j["aspect_path"] = path_json(trace.aspect_path, trace.aspect_state);
  j["k"] = result.nonzero_count;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["refined_target_norm"] = norm(result.refined_target);
  j["refined_aspect_norm"] = norm(result.refined_aspect);
  j["final_losses"] = {{"target", result.final_target_loss},
                       {"aspect", result.final_aspect_loss}};

  InspectOutcome outcome;
  outcome.json = j.dump(2) + "\n";

  std::ostringstream os;
  os << "sentence " << sentence_id << ", target " << target_id << ", aspect " << aspect
     << "\n\n";
  os << "tokens with final coefficients (target path | aspect path):\n";
  for (std::size_t i = 0; i < sentence->tokens.size(); ++i) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %2zu  %-16s u=%.4f u'=%.4f | u=%.4f u'=%.4f\n", i,
                  sentence->tokens[i].c_str(), trace.target_state.u[i],
                  trace.target_state.u_sparse[i], trace.aspect_state.u[i],
                  trace.aspect_state.u_sparse[i]);
    os << buf;
  }
  auto curve = [&](const char* name, const std::vector<IterationRecord>& recs) {
    os << name << " loss:";
    std::size_t step = recs.size() > 8 ? recs.size() / 8 : 1;
    for (std::size_t i = 0; i < recs.size(); i += step) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), " %zu:%.5f", recs[i].iteration, recs[i].loss);
      os << buf;
    }
    if (!recs.empty() && (recs.size() - 1) % step != 0) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), " %zu:%.5f", recs.back().iteration,
                    recs.back().loss);
      os << buf;
    }
    os << '\n';
  };
  curve("target", trace.target_path);
  curve("aspect", trace.aspect_path);
  os << "k=" << result.nonzero_count << " iterations=" << result.iterations
     << " converged=" << (result.converged ? "yes" : "no") << '\n';
  char buf[96];
  std::snprintf(buf, sizeof(buf), "|t~|=%.5f |a~|=%.5f\n", norm(result.refined_target),
                norm(result.refined_aspect));
  os << buf;
  outcome.text = os.str();
  return outcome;
}

}  // namespace tabsa
