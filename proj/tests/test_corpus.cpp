#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tabsa/corpus.hpp"
#include "tabsa/errors.hpp"
#include "tabsa/synthetic.hpp"

using namespace tabsa;

namespace {

std::string temp_json(const std::string& name, const std::string& content) {
  std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("tokenize lowercases, strips edge punctuation, keeps targets atomic") {
  auto tokens = tokenize("Great, LOCATION1 is (really) cheap!  LOCATION2...");
  CHECK(tokens == std::vector<std::string>{"great", "LOCATION1", "is", "really",
                                           "cheap", "LOCATION2"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("...").empty());
}

TEST_CASE("load_sentihood maps records to sentences") {
  std::string path = temp_json("sh_ok.json", R"([
    {"id": 11, "text": "LOCATION1 is great",
     "opinions": [{"target_entity": "LOCATION1", "aspect": "general", "sentiment": "Positive"}]},
    {"id": 12, "text": "LOCATION1 is pricey but LOCATION2 is cheap",
     "opinions": [{"target_entity": "LOCATION1", "aspect": "price", "sentiment": "Negative"},
                  {"target_entity": "LOCATION2", "aspect": "price", "sentiment": "Positive"}]}
  ])");
  CorpusLoadReport report;
  std::vector<Sentence> sentences = load_sentihood(path, &report);
  REQUIRE(sentences.size() == 2);
  CHECK(report.single_target == 1);
  CHECK(report.two_target == 1);

  const Sentence& s = sentences[0];
  CHECK(s.id == "11");
  CHECK(s.target_positions.at("LOCATION1") == 0);
  REQUIRE(s.opinions.size() == 1);
  CHECK(s.opinions[0].aspect == "general");
  CHECK(s.opinions[0].polarity == Polarity::Positive);

  CHECK(sentences[1].target_positions.size() == 2);
  CHECK(gold_polarity(sentences[1], "LOCATION2", "price") == Polarity::Positive);
  CHECK(gold_polarity(sentences[1], "LOCATION2", "safety") == Polarity::None);
}

TEST_CASE("load_sentihood rejects records whose opinion target is missing") {
  std::string path = temp_json("sh_reject.json", R"([
    {"id": 1, "text": "LOCATION1 is fine",
     "opinions": [{"target_entity": "LOCATION2", "aspect": "general", "sentiment": "Positive"}]},
    {"id": 2, "text": "no targets here", "opinions": []}
  ])");
  CorpusLoadReport report;
  std::vector<Sentence> sentences = load_sentihood(path, &report);
  CHECK(sentences.empty());
  REQUIRE(report.record_errors.size() == 2);
  CHECK(report.record_errors[0].first == "1");
  CHECK(report.record_errors[1].first == "2");
}

TEST_CASE("load_sentihood records unknown sentiment strings as per-record errors") {
  std::string path = temp_json("sh_sent.json", R"([
    {"id": 5, "text": "LOCATION1 is odd",
     "opinions": [{"target_entity": "LOCATION1", "aspect": "general", "sentiment": "Meh"}]}
  ])");
  CorpusLoadReport report;
  std::vector<Sentence> sentences = load_sentihood(path, &report);
  CHECK(sentences.empty());
  REQUIRE(report.record_errors.size() == 1);
  CHECK(report.record_errors[0].second.find("Meh") != std::string::npos);
}

TEST_CASE("load_sentihood rejects malformed JSON") {
  std::string path = temp_json("sh_bad.json", "{not json");
  CHECK_THROWS_AS(load_sentihood(path), InputError);
}

TEST_CASE("load_sentihood reads a split directory and tags splits") {
  auto dir = std::filesystem::temp_directory_path() / "sh_dir";
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const char* id) {
    std::ofstream(dir / name) << R"([{"id": )" << id
                              << R"(, "text": "LOCATION1 is fine", "opinions": []}])";
  };
  write("sentihood-train.json", "1");
  write("sentihood-dev.json", "2");
  write("sentihood-test.json", "3");

  std::vector<Sentence> sentences = load_sentihood(dir.string());
  REQUIRE(sentences.size() == 3);
  CHECK(sentences[0].split == "train");
  CHECK(sentences[1].split == "dev");
  CHECK(sentences[2].split == "test");

  auto empty_dir = std::filesystem::temp_directory_path() / "sh_dir_empty";
  std::filesystem::create_directories(empty_dir);
  CHECK_THROWS_AS(load_sentihood(empty_dir.string()), InputError);
}

TEST_CASE("filter_top_aspects drops out-of-set opinions and emptied sentences") {
  Sentence s;
  s.id = "a";
  s.tokens = {"LOCATION1", "x"};
  s.target_positions = {{"LOCATION1", 0}};
  s.opinions = {{"LOCATION1", "general", Polarity::Positive},
                {"LOCATION1", "nightlife", Polarity::Positive}};
  auto filtered = filter_top_aspects({s}, default_aspect_set());
  REQUIRE(filtered.size() == 1);
  REQUIRE(filtered[0].opinions.size() == 1);
  CHECK(filtered[0].opinions[0].aspect == "general");

  s.opinions = {{"LOCATION1", "nightlife", Polarity::Positive}};
  CHECK(filter_top_aspects({s}, default_aspect_set()).empty());

  CHECK_THROWS_AS(filter_top_aspects({s}, {}), InputError);
}

TEST_CASE("build_context places embeddings and target columns") {
  EmbeddingTable table(2, 1);
  // vocabulary left empty: non-target tokens resolve to the zero sentinel
  Sentence s;
  s.id = "ctx";
  s.tokens = {"foo", "LOCATION1", "bar"};
  s.target_positions = {{"LOCATION1", 1}};

  SentenceContext ctx = build_context(s, "LOCATION1", AspectEmbedding{}, table);
  CHECK(ctx.x.rows() == 2);
  CHECK(ctx.x.cols() == 3);
  CHECK(ctx.target_column == 1);
  CHECK_FALSE(ctx.other_target_column.has_value());

  auto v = table.target_embedding("LOCATION1");
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(ctx.x.at(i, 0) == 0.0);
    CHECK(ctx.x.at(i, 1) == v[i]);
    CHECK(ctx.x.at(i, 2) == 0.0);
  }

  CHECK_THROWS_AS(build_context(s, "LOCATION2", AspectEmbedding{}, table), InputError);
}

TEST_CASE("build_context handles two targets and single-token sentences") {
  EmbeddingTable table(2, 1);
  Sentence two;
  two.id = "two";
  two.tokens = {"LOCATION1", "beats", "LOCATION2"};
  two.target_positions = {{"LOCATION1", 0}, {"LOCATION2", 2}};
  SentenceContext ctx = build_context(two, "LOCATION1", AspectEmbedding{}, table);
  REQUIRE(ctx.other_target_column.has_value());
  CHECK(*ctx.other_target_column == 2);
  CHECK(ctx.other_target_id == "LOCATION2");

  Sentence solo;
  solo.id = "solo";
  solo.tokens = {"LOCATION1"};
  solo.target_positions = {{"LOCATION1", 0}};
  SentenceContext sctx = build_context(solo, "LOCATION1", AspectEmbedding{}, table);
  CHECK(sctx.x.cols() == 1);
  CHECK(sctx.target_column == 0);
}

TEST_CASE("validate_sentence enforces the type invariants") {
  Sentence s;
  s.id = "v";
  s.tokens = {"LOCATION1"};
  s.target_positions = {{"LOCATION1", 0}};
  CHECK_NOTHROW(validate_sentence(s));

  Sentence no_targets = s;
  no_targets.target_positions.clear();
  CHECK_THROWS_AS(validate_sentence(no_targets), InputError);

  Sentence bad_pos = s;
  bad_pos.target_positions["LOCATION1"] = 5;
  CHECK_THROWS_AS(validate_sentence(bad_pos), InputError);

  Sentence bad_opinion = s;
  bad_opinion.opinions = {{"LOCATION2", "general", Polarity::Positive}};
  CHECK_THROWS_AS(validate_sentence(bad_opinion), InputError);
}

TEST_CASE("generate_synthetic is a pure function of its config") {
  SyntheticConfig cfg = SyntheticConfig::defaults();
  cfg.count = 200;
  std::vector<Sentence> a = generate_synthetic(cfg);
  std::vector<Sentence> b = generate_synthetic(cfg);
  REQUIRE(a.size() == 200);
  REQUIRE(b.size() == 200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tokens == b[i].tokens);
    CHECK(a[i].target_positions == b[i].target_positions);
    REQUIRE(a[i].opinions.size() == b[i].opinions.size());
    for (std::size_t j = 0; j < a[i].opinions.size(); ++j) {
      CHECK(a[i].opinions[j].aspect == b[i].opinions[j].aspect);
      CHECK(a[i].opinions[j].polarity == b[i].opinions[j].polarity);
    }
  }
}

TEST_CASE("synthetic sentences plant cues adjacent to the opinionated target") {
  SyntheticConfig cfg = SyntheticConfig::defaults();
  cfg.count = 100;
  for (const Sentence& s : generate_synthetic(cfg)) {
    for (const auto& [target, pos] : s.target_positions) {
      // first opinion of each target: aspect cue before, polarity cue after
      const OpinionTuple* first = nullptr;
      for (const OpinionTuple& op : s.opinions) {
        if (op.target_id == target) {
          first = &op;
          break;
        }
      }
      REQUIRE(first != nullptr);
      REQUIRE(pos >= 1);
      REQUIRE(pos + 1 < s.tokens.size());
      const auto& lexicon = cfg.aspect_lexicons.at(first->aspect);
      bool cue_before = std::find(lexicon.begin(), lexicon.end(), s.tokens[pos - 1]) !=
                        lexicon.end();
      CHECK(cue_before);
      const auto& pol_lexicon = first->polarity == Polarity::Positive
                                    ? cfg.positive_cues
                                    : cfg.negative_cues;
      bool pol_after = std::find(pol_lexicon.begin(), pol_lexicon.end(),
                                 s.tokens[pos + 1]) != pol_lexicon.end();
      CHECK(pol_after);
    }
  }
}

TEST_CASE("two_target_ratio zero yields only single-target sentences") {
  SyntheticConfig cfg = SyntheticConfig::defaults();
  cfg.count = 80;
  cfg.two_target_ratio = 0.0;
  for (const Sentence& s : generate_synthetic(cfg)) {
    CHECK(s.target_positions.size() == 1);
  }
}

TEST_CASE("assign_splits is seeded and keeps published splits") {
  std::vector<Sentence> sentences;
  for (int i = 0; i < 50; ++i) {
    Sentence s;
    s.id = "s" + std::to_string(i);
    s.tokens = {"LOCATION1"};
    s.target_positions = {{"LOCATION1", 0}};
    if (i == 0) s.split = "test";
    sentences.push_back(s);
  }
  std::vector<Sentence> copy = sentences;
  assign_splits(sentences, 3);
  assign_splits(copy, 3);
  CHECK(sentences[0].split == "test");
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    CHECK(sentences[i].split == copy[i].split);
    CHECK((sentences[i].split == "train" || sentences[i].split == "dev" ||
           sentences[i].split == "test"));
  }
}

TEST_CASE("synthetic config files parse and validate") {
  std::string path = temp_json("syn_cfg.txt",
                               "# comment\n"
                               "seed = 9\n"
                               "count = 33\n"
                               "two_target_ratio = 0.5\n"
                               "aspect_lexicon.price = cheap dear\n");
  SyntheticConfig cfg = parse_synthetic_config(path);
  CHECK(cfg.seed == 9);
  CHECK(cfg.count == 33);
  CHECK(cfg.two_target_ratio == doctest::Approx(0.5));
  CHECK(cfg.aspect_lexicons.at("price") == std::vector<std::string>{"cheap", "dear"});

  std::string bad = temp_json("syn_bad.txt", "unknown_key = 1\n");
  CHECK_THROWS_AS(parse_synthetic_config(bad), InputError);
}
