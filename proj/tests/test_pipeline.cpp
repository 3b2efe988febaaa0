#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tabsa/errors.hpp"
#include "tabsa/pipeline.hpp"

using namespace tabsa;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig small_synthetic_config(const std::string& out_dir, std::size_t count = 40) {
  RunConfig cfg;
  cfg.synthetic = SyntheticConfig::defaults();
  cfg.synthetic->count = count;
  cfg.train.epochs = 300;  // fast for unit scope
  cfg.out_dir = out_dir;
  cfg.seed = 5;
  cfg.workers = 2;
  return cfg;
}

std::string temp_dir(const std::string& name) {
  std::string dir = (fs::temp_directory_path() / name).string();
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("cmd_refine writes one record per (sentence, target, aspect)") {
  RunConfig cfg = small_synthetic_config(temp_dir("tabsa_refine_out"), 20);
  RefineOutcome out = cmd_refine(cfg);

  std::vector<Sentence> sentences = generate_synthetic(*cfg.synthetic);
  std::size_t expected = 0;
  for (const Sentence& s : sentences) {
    expected += s.target_positions.size() * cfg.synthetic->aspects.size();
  }
  CHECK(out.summary.records == expected);
  CHECK(fs::exists(cfg.out_dir + "/refined.jsonl"));
  CHECK(fs::exists(cfg.out_dir + "/refine_summary.json"));
  CHECK(fs::exists(cfg.out_dir + "/resolved_config.json"));

  RefinementStore store = read_refined_jsonl(cfg.out_dir + "/refined.jsonl");
  CHECK(store.size() == expected);
}

TEST_CASE("refined JSONL round-trips the record fields") {
  RunConfig cfg = small_synthetic_config(temp_dir("tabsa_jsonl_out"), 8);
  Corpus corpus = load_corpus(cfg);
  EmbeddingTable table = corpus.table.reseeded(cfg.seed);
  RefinerConfig refiner = cfg.refiner;
  refiner.seed = cfg.seed;
  RefinementStore store =
      refine_corpus(corpus.sentences, table, corpus.aspects, refiner, 1);

  std::string path = cfg.out_dir + "/records.jsonl";
  fs::create_directories(cfg.out_dir);
  write_refined_jsonl(store, path);
  RefinementStore back = read_refined_jsonl(path);
  REQUIRE(back.size() == store.size());
  for (const auto& [key, r] : store) {
    const RefinementResult& b = back.at(key);
    CHECK(b.refined_target == r.refined_target);
    CHECK(b.refined_aspect == r.refined_aspect);
    CHECK(b.initial_aspect == r.initial_aspect);
    CHECK(b.nonzero_count == r.nonzero_count);
    CHECK(b.iterations == r.iterations);
    CHECK(b.converged == r.converged);
  }
}

TEST_CASE("cmd_refine with --max-iters 1 reports one iteration everywhere") {
  RunConfig cfg = small_synthetic_config(temp_dir("tabsa_maxiter_out"), 10);
  cfg.refiner.max_iters = 1;
  cmd_refine(cfg);
  RefinementStore store = read_refined_jsonl(cfg.out_dir + "/refined.jsonl");
  for (const auto& [key, r] : store) CHECK(r.iterations == 1);
}

TEST_CASE("a missing embedding file fails without partial output") {
  RunConfig cfg;
  cfg.sentihood_path = "/nonexistent/data.json";
  cfg.glove_path = "/nonexistent/glove.txt";
  cfg.out_dir = temp_dir("tabsa_missing_out");
  CHECK_THROWS_AS(cmd_refine(cfg), InputError);
  CHECK_FALSE(fs::exists(cfg.out_dir + "/refined.jsonl"));
}

TEST_CASE("load_corpus requires exactly one data source") {
  RunConfig none;
  CHECK_THROWS_AS(load_corpus(none), InputError);

  RunConfig both;
  both.synthetic = SyntheticConfig::defaults();
  both.sentihood_path = "x.json";
  CHECK_THROWS_AS(load_corpus(both), InputError);

  RunConfig sentihood_no_glove;
  sentihood_no_glove.sentihood_path = "x.json";
  CHECK_THROWS_AS(load_corpus(sentihood_no_glove), InputError);
}

TEST_CASE("cmd_eval is byte-deterministic across runs and worker counts") {
  RunConfig cfg = small_synthetic_config(temp_dir("tabsa_det_a"), 40);
  cfg.workers = 1;
  cmd_eval(cfg);
  std::string report_a = slurp(cfg.out_dir + "/eval_report.json");

  RunConfig cfg_b = cfg;
  cfg_b.out_dir = temp_dir("tabsa_det_b");
  cfg_b.workers = 4;
  cmd_eval(cfg_b);
  std::string report_b = slurp(cfg_b.out_dir + "/eval_report.json");

  CHECK(report_a == report_b);
}

TEST_CASE("cmd_eval consumes a pre-computed refined file identically") {
  RunConfig cfg = small_synthetic_config(temp_dir("tabsa_prerefined"), 40);
  cmd_eval(cfg);
  std::string inline_report = slurp(cfg.out_dir + "/eval_report.json");

  RunConfig refine_cfg = cfg;
  refine_cfg.out_dir = temp_dir("tabsa_prerefined_records");
  cmd_refine(refine_cfg);

  RunConfig reuse = cfg;
  reuse.out_dir = temp_dir("tabsa_prerefined_eval");
  reuse.refined_path = refine_cfg.out_dir + "/refined.jsonl";
  cmd_eval(reuse);
  CHECK(slurp(reuse.out_dir + "/eval_report.json") == inline_report);

  reuse.n_seeds = 3;
  CHECK_THROWS_AS(cmd_eval(reuse), InputError);
}

TEST_CASE("run config JSON round-trips through file and parser") {
  RunConfig cfg = small_synthetic_config(temp_dir("tabsa_cfg_out"), 25);
  cfg.refiner.alpha = 1.5;
  cfg.refiner.lambda = 0.02;
  cfg.n_seeds = 3;
  std::string path = cfg.out_dir + "/cfg.json";
  fs::create_directories(cfg.out_dir);
  std::ofstream(path) << cfg.to_json();

  RunConfig back = RunConfig::from_json_file(path);
  CHECK(back.synthetic.has_value());
  CHECK(back.synthetic->count == 25);
  CHECK(back.refiner.alpha == 1.5);
  CHECK(back.refiner.lambda == 0.02);
  CHECK(back.n_seeds == 3);
  CHECK(back.seed == cfg.seed);
}

TEST_CASE("cmd_inspect traces coefficients, losses, and convergence") {
  RunConfig cfg = small_synthetic_config(temp_dir("tabsa_inspect_out"), 15);
  Corpus corpus = load_corpus(cfg);
  const Sentence& s = corpus.sentences.front();
  std::string target = s.target_positions.begin()->first;

  InspectOutcome out = cmd_inspect(cfg, s.id, target, corpus.aspects[0]);
  CHECK(out.text.find("tokens with final coefficients") != std::string::npos);
  CHECK(out.text.find("k=") != std::string::npos);
  for (const std::string& tok : s.tokens) {
    CHECK(out.text.find(tok) != std::string::npos);
  }
  CHECK(out.json.find("\"loss_curve\"") != std::string::npos);

  CHECK_THROWS_AS(cmd_inspect(cfg, "no-such-id", target, corpus.aspects[0]),
                  InputError);
}

TEST_CASE("inspect on an n <= c sentence shows immediate convergence") {
  std::string dir = temp_dir("tabsa_tiny_out");
  RunConfig cfg;
  cfg.synthetic = SyntheticConfig::defaults();
  cfg.synthetic->count = 5;
  cfg.synthetic->min_distractors = 0;
  cfg.synthetic->max_distractors = 0;
  cfg.synthetic->second_opinion_prob = 0.0;
  cfg.synthetic->two_target_ratio = 0.0;
  cfg.out_dir = dir;

  Corpus corpus = load_corpus(cfg);
  const Sentence& s = corpus.sentences.front();
  REQUIRE(s.tokens.size() <= cfg.refiner.c);  // 3 tokens: cue, target, polarity

  InspectOutcome out = cmd_inspect(cfg, s.id, "LOCATION1", corpus.aspects[0]);
  CHECK(out.json.find("\"iterations\": 1") != std::string::npos);
  CHECK(out.json.find("\"converged\": true") != std::string::npos);
}

TEST_CASE("the sentihood + glove pathway runs end to end") {
  // fixture: synthetic sentences re-serialized in the SentiHood layout, with
  // the synthetic table written as a GloVe-format text file
  SyntheticConfig syn = SyntheticConfig::defaults();
  syn.count = 120;
  std::vector<Sentence> sentences = generate_synthetic(syn);
  EmbeddingTable table = build_synthetic_table(syn);

  std::string dir = temp_dir("tabsa_sh_path");
  fs::create_directories(dir);
  std::string glove_path = dir + "/vectors.txt";
  write_embedding_file(table, glove_path);

  std::ostringstream js;
  js << "[";
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const Sentence& s = sentences[i];
    if (i) js << ",";
    js << "{\"id\": \"" << s.id << "\", \"text\": \"";
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      if (t) js << ' ';
      js << s.tokens[t];
    }
    js << "\", \"opinions\": [";
    for (std::size_t o = 0; o < s.opinions.size(); ++o) {
      if (o) js << ",";
      js << "{\"target_entity\": \"" << s.opinions[o].target_id
         << "\", \"aspect\": \"" << s.opinions[o].aspect
         << "\", \"sentiment\": \"" << to_string(s.opinions[o].polarity) << "\"}";
    }
    js << "]}";
  }
  js << "]";
  std::string data_path = dir + "/sentihood.json";
  std::ofstream(data_path) << js.str();

  RunConfig cfg;
  cfg.sentihood_path = data_path;
  cfg.glove_path = glove_path;
  cfg.dim = syn.dim;
  cfg.train.epochs = 400;
  cfg.seed = 5;
  cfg.out_dir = dir + "/out";
  EvalOutcome out = cmd_eval(cfg);
  REQUIRE(out.seeds.size() == 1);
  CHECK(out.seeds[0].raw.aspect_macro_f1.has_value());
  CHECK(out.seeds[0].refined.aspect_macro_f1.has_value());
  CHECK(out.seeds[0].refinement.records > 0);
  CHECK(fs::exists(cfg.out_dir + "/report.txt"));
}

TEST_CASE("refinement errors carry the (sentence, target, aspect) tag") {
  EmbeddingTable table(2, 1);
  // a non-finite aspect anchor reaches the aspect loss directly
  table.insert("price", {std::nan(""), 0.0});
  Sentence s;
  s.id = "err-1";
  s.tokens = {"x", "LOCATION1", "x", "x", "x", "x"};
  s.target_positions = {{"LOCATION1", 1}};
  RefinerConfig cfg;
  try {
    refine_pair(s, table, "LOCATION1", "price", cfg);
    FAIL("expected NumericalDivergenceError");
  } catch (const NumericalDivergenceError& e) {
    std::string what = e.what();
    CHECK(what.find("err-1") != std::string::npos);
    CHECK(what.find("LOCATION1") != std::string::npos);
    CHECK(what.find("price") != std::string::npos);
  }
}

TEST_CASE("refinement selects a planted price cue for some inspected sentence") {
  RunConfig cfg = small_synthetic_config(temp_dir("tabsa_cue_out"), 150);
  Corpus corpus = load_corpus(cfg);
  EmbeddingTable table = corpus.table.reseeded(cfg.seed);
  RefinerConfig refiner = cfg.refiner;
  refiner.seed = cfg.seed;

  std::size_t candidates = 0;
  bool found = false;
  for (const Sentence& s : corpus.sentences) {
    if (found || candidates >= 10) break;
    auto cue = std::find(s.tokens.begin(), s.tokens.end(), "expensive");
    if (cue == s.tokens.end()) continue;
    std::size_t cue_index = static_cast<std::size_t>(cue - s.tokens.begin());
    for (const OpinionTuple& op : s.opinions) {
      if (op.aspect != "price") continue;
      ++candidates;
      PairTrace trace;
      refine_pair(s, table, op.target_id, "price", refiner, &trace);
      if (trace.aspect_state.u_sparse[cue_index] != 0.0 ||
          trace.target_state.u_sparse[cue_index] != 0.0) {
        found = true;
      }
      break;
    }
  }
  REQUIRE(candidates > 0);
  CHECK(found);
}
