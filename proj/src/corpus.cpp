#include "tabsa/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tabsa/errors.hpp"
#include "tabsa/rng.hpp"

namespace tabsa {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Polarity p) {
  switch (p) {
    case Polarity::Positive: return "Positive";
    case Polarity::Negative: return "Negative";
    default: return "None";
  }
}

std::optional<Polarity> parse_polarity(const std::string& s) {
  if (s == "Positive") return Polarity::Positive;
  if (s == "Negative") return Polarity::Negative;
  if (s == "None") return Polarity::None;
  return std::nullopt;
}

void validate_sentence(const Sentence& s) {
  if (s.target_positions.empty() || s.target_positions.size() > 2) {
    throw InputError("sentence " + s.id + ": expected 1 or 2 targets, got " +
                     std::to_string(s.target_positions.size()));
  }
  for (const auto& [target, pos] : s.target_positions) {
    if (pos >= s.tokens.size()) {
      throw InputError("sentence " + s.id + ": target " + target +
                       " position out of range");
    }
  }
  for (const OpinionTuple& op : s.opinions) {
    if (!s.target_positions.count(op.target_id)) {
      throw InputError("sentence " + s.id + ": opinion target " + op.target_id +
                       " has no position");
    }
  }
}

Polarity gold_polarity(const Sentence& s, const std::string& target_id,
                       const std::string& aspect) {
  for (const OpinionTuple& op : s.opinions) {
    if (op.target_id == target_id && op.aspect == aspect) return op.polarity;
  }
  return Polarity::None;
}

static bool is_target_token(const std::string& t) {
  return t == "LOCATION1" || t == "LOCATION2";
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    std::string raw = text.substr(start, i - start);

    // strip edge punctuation
    std::size_t a = 0, b = raw.size();
    while (a < b && std::ispunct(static_cast<unsigned char>(raw[a]))) ++a;
    while (b > a && std::ispunct(static_cast<unsigned char>(raw[b - 1]))) --b;
    if (a == b) continue;
    std::string core = raw.substr(a, b - a);

    if (is_target_token(core)) {
      tokens.push_back(core);
      continue;
    }
    for (char& c : core) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    tokens.push_back(core);
  }
  return tokens;
}

namespace {

std::string record_id(const json& rec, std::size_t index) {
  if (rec.contains("id")) {
    const json& id = rec["id"];
    if (id.is_string()) return id.get<std::string>();
    if (id.is_number_integer()) return std::to_string(id.get<long long>());
  }
  return "record-" + std::to_string(index);
}

void load_sentihood_file(const std::string& path, const std::string& split,
                         std::vector<Sentence>& out, CorpusLoadReport& report) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in " + path + ": " + e.what());
  }
  if (!root.is_array()) throw InputError("expected a JSON array in " + path);

  for (std::size_t i = 0; i < root.size(); ++i) {
    const json& rec = root[i];
    std::string id = record_id(rec, i);
    if (!rec.contains("text") || !rec["text"].is_string()) {
      report.record_errors.emplace_back(id, "missing text field");
      continue;
    }

    Sentence s;
    s.id = id;
    s.split = split;
    s.tokens = tokenize(rec["text"].get<std::string>());

    for (std::size_t j = 0; j < s.tokens.size(); ++j) {
      if (is_target_token(s.tokens[j]) && !s.target_positions.count(s.tokens[j])) {
        s.target_positions[s.tokens[j]] = j;
      }
    }
    if (s.target_positions.empty()) {
      report.record_errors.emplace_back(id, "no target token in text");
      continue;
    }

    bool bad = false;
    std::string reason;
    if (rec.contains("opinions")) {
      for (const json& op : rec["opinions"]) {
        std::string target = op.value("target_entity", "");
        std::string aspect = op.value("aspect", "");
        std::string sentiment = op.value("sentiment", "");
        std::optional<Polarity> pol = parse_polarity(sentiment);
        if (!pol) {
          bad = true;
          reason = "unknown sentiment '" + sentiment + "'";
          break;
        }
        if (!s.target_positions.count(target)) {
          bad = true;
          reason = "opinion target " + target + " absent from text";
          break;
        }
        std::string aspect_norm = aspect;
        for (char& c : aspect_norm)
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        s.opinions.push_back({target, aspect_norm, *pol});
      }
    }
    if (bad) {
      report.record_errors.emplace_back(id, reason);
      continue;
    }

    validate_sentence(s);
    if (s.target_positions.size() == 1) {
      ++report.single_target;
    } else {
      ++report.two_target;
    }
    ++report.loaded;
    out.push_back(std::move(s));
  }
}

}  // namespace

std::vector<Sentence> load_sentihood(const std::string& path, CorpusLoadReport* report) {
  CorpusLoadReport local;
  std::vector<Sentence> out;

  fs::path p(path);
  if (fs::is_directory(p)) {
    bool found = false;
    for (const char* split : {"train", "dev", "test"}) {
      fs::path f = p / ("sentihood-" + std::string(split) + ".json");
      if (fs::exists(f)) {
        load_sentihood_file(f.string(), split, out, local);
        found = true;
      }
    }
    if (!found) {
      throw InputError("no sentihood-{train,dev,test}.json files under " + path);
    }
  } else {
    load_sentihood_file(path, "", out, local);
  }

  if (report) *report = local;
  return out;
}

std::vector<Sentence> filter_top_aspects(std::vector<Sentence> sentences,
                                         const std::set<std::string>& aspects) {
  if (aspects.empty()) throw InputError("aspect set must be non-empty");
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (Sentence& s : sentences) {
    std::vector<OpinionTuple> kept;
    for (OpinionTuple& op : s.opinions) {
      if (aspects.count(op.aspect)) kept.push_back(std::move(op));
    }
    if (kept.empty()) continue;
    s.opinions = std::move(kept);
    out.push_back(std::move(s));
  }
  return out;
}

void assign_splits(std::vector<Sentence>& sentences, std::uint64_t seed) {
  for (Sentence& s : sentences) {
    if (!s.split.empty()) continue;
    double u = SplitMix64(derive_seed(seed, {"split", s.id})).next_double();
    s.split = u < 0.8 ? "train" : (u < 0.9 ? "dev" : "test");
  }
}

SentenceContext build_context(const Sentence& sentence, const std::string& target_id,
                              AspectEmbedding aspect, const EmbeddingTable& table) {
  auto pos_it = sentence.target_positions.find(target_id);
  if (pos_it == sentence.target_positions.end()) {
    throw InputError("sentence " + sentence.id + ": unknown target " + target_id);
  }

  SentenceContext ctx;
  ctx.target_id = target_id;
  ctx.target_column = pos_it->second;
  ctx.aspect = std::move(aspect);
  ctx.x = Matrix(table.dim(), sentence.tokens.size());

  for (std::size_t j = 0; j < sentence.tokens.size(); ++j) {
    const std::string& tok = sentence.tokens[j];
    std::span<const double> v = sentence.target_positions.count(tok)
                                    ? table.target_embedding(tok)
                                    : table.lookup(tok);
    std::copy(v.begin(), v.end(), ctx.x.col(j).begin());
  }

  for (const auto& [other, pos] : sentence.target_positions) {
    if (other != target_id) {
      ctx.other_target_id = other;
      ctx.other_target_column = pos;
    }
  }
  return ctx;
}

const std::set<std::string>& default_aspect_set() {
  static const std::set<std::string> aspects = {"general", "price", "transit-location",
                                                "safety"};
  return aspects;
}

}  // namespace tabsa
