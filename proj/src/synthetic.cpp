#include "tabsa/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tabsa/errors.hpp"
#include "tabsa/rng.hpp"

namespace tabsa {

SyntheticConfig SyntheticConfig::defaults() {
  SyntheticConfig c;
  c.aspects = {"general", "price", "transit-location", "safety"};
  // cue lexicons deliberately exclude the label words themselves: label words
  // anchor the aspect direction, cue words sit on the opposite side of it
  c.aspect_lexicons = {
      {"general", {"area", "neighbourhood", "vibe", "atmosphere", "lively", "spot"}},
      {"price", {"expensive", "cheap", "cost", "rent", "afford", "pricey"}},
      {"transit-location", {"tube", "station", "commute", "transport", "bus", "trains"}},
      {"safety", {"safe", "crime", "police", "dangerous", "mugging", "burglaries"}},
  };
  c.positive_cues = {"good", "great", "excellent", "lovely", "wonderful", "pleasant"};
  c.negative_cues = {"bad", "terrible", "awful", "poor", "dreadful", "grim"};
  c.distractors = {"the",  "a",      "is",    "was",   "and",   "but",    "with",
                   "near", "live",   "lived", "house", "flat",  "friend", "people",
                   "year", "really", "quite", "very",  "there", "here",   "week",
                   "move", "moving", "know",  "think", "small", "big",    "old"};
  return c;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string w;
  while (iss >> w) out.push_back(w);
  return out;
}

const std::string& pick(SplitMix64& rng, const std::vector<std::string>& words) {
  if (words.empty()) throw InputError("synthetic lexicon is empty");
  return words[rng.index(words.size())];
}

}  // namespace

SyntheticConfig parse_synthetic_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open synthetic config: " + path);

  SyntheticConfig c = SyntheticConfig::defaults();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "seed") {
        c.seed = std::stoull(value);
      } else if (key == "count") {
        c.count = std::stoull(value);
      } else if (key == "two_target_ratio") {
        c.two_target_ratio = std::stod(value);
      } else if (key == "dim") {
        c.dim = std::stoull(value);
      } else if (key == "min_distractors") {
        c.min_distractors = std::stoull(value);
      } else if (key == "max_distractors") {
        c.max_distractors = std::stoull(value);
      } else if (key == "second_opinion_prob") {
        c.second_opinion_prob = std::stod(value);
      } else if (key == "cue_strength") {
        c.cue_strength = std::stod(value);
      } else if (key == "cue_noise") {
        c.cue_noise = std::stod(value);
      } else if (key == "valence_strength") {
        c.valence_strength = std::stod(value);
      } else if (key == "distractor_scale") {
        c.distractor_scale = std::stod(value);
      } else if (key == "aspects") {
        c.aspects = split_words(value);
      } else if (key == "positive_cues") {
        c.positive_cues = split_words(value);
      } else if (key == "negative_cues") {
        c.negative_cues = split_words(value);
      } else if (key == "distractors") {
        c.distractors = split_words(value);
      } else if (key.rfind("aspect_lexicon.", 0) == 0) {
        c.aspect_lexicons[key.substr(15)] = split_words(value);
      } else {
        throw InputError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw InputError(path + ":" + std::to_string(line_no) + ": bad value for '" + key + "'");
    }
  }
  for (const std::string& a : c.aspects) {
    if (!c.aspect_lexicons.count(a)) {
      throw InputError("no aspect_lexicon." + a + " for configured aspect '" + a + "'");
    }
  }
  return c;
}

std::vector<Sentence> generate_synthetic(const SyntheticConfig& config) {
  if (config.aspects.empty()) throw InputError("synthetic config needs aspects");
  std::vector<Sentence> out;
  out.reserve(config.count);

  for (std::size_t i = 0; i < config.count; ++i) {
    SplitMix64 rng(derive_seed(config.seed, {"sentence", std::to_string(i)}));

    Sentence s;
    s.id = "syn-" + std::to_string(i);
    bool two_targets = rng.next_double() < config.two_target_ratio;
    std::vector<std::string> targets = {"LOCATION1"};
    if (two_targets) targets.push_back("LOCATION2");

    std::size_t n_distractors =
        config.min_distractors +
        rng.index(config.max_distractors - config.min_distractors + 1);
    // distractors are split across the slots around the target clauses
    std::size_t slots = targets.size() + 1;
    std::vector<std::size_t> fill(slots, 0);
    for (std::size_t d = 0; d < n_distractors; ++d) ++fill[rng.index(slots)];

    for (std::size_t t = 0; t < targets.size(); ++t) {
      for (std::size_t d = 0; d < fill[t]; ++d) {
        s.tokens.push_back(pick(rng, config.distractors));
      }

      // opinions for this target: distinct aspects, each with a polarity
      std::vector<std::string> chosen = {config.aspects[rng.index(config.aspects.size())]};
      if (rng.next_double() < config.second_opinion_prob && config.aspects.size() > 1) {
        std::string second;
        do {
          second = config.aspects[rng.index(config.aspects.size())];
        } while (second == chosen[0]);
        chosen.push_back(second);
      }

      // first opinion's cues sit immediately around the target token:
      //   ... aspect_cue TARGET polarity_cue ...
      // a second opinion appends its cue pair right after.
      for (std::size_t o = 0; o < chosen.size(); ++o) {
        Polarity pol = rng.next_double() < 0.5 ? Polarity::Positive : Polarity::Negative;
        const std::vector<std::string>& pol_lex =
            pol == Polarity::Positive ? config.positive_cues : config.negative_cues;
        s.tokens.push_back(pick(rng, config.aspect_lexicons.at(chosen[o])));
        if (o == 0) {
          s.target_positions[targets[t]] = s.tokens.size();
          s.tokens.push_back(targets[t]);
        }
        s.tokens.push_back(pick(rng, pol_lex));
        s.opinions.push_back({targets[t], chosen[o], pol});
      }
    }
    for (std::size_t d = 0; d < fill[targets.size()]; ++d) {
      s.tokens.push_back(pick(rng, config.distractors));
    }

    validate_sentence(s);
    out.push_back(std::move(s));
  }
  return out;
}

EmbeddingTable build_synthetic_table(const SyntheticConfig& config) {
  const std::size_t m = config.dim;
  EmbeddingTable table(m, config.seed);

  // one direction per aspect plus one valence direction, orthonormalized
  std::vector<Vec> dirs;
  std::vector<std::string> dir_keys = config.aspects;
  dir_keys.push_back("~valence~");
  for (const std::string& key : dir_keys) {
    SplitMix64 rng(derive_seed(config.seed, {"direction", key}));
    Vec d(m);
    for (double& x : d) x = rng.normal();
    for (const Vec& prev : dirs) {
      double proj = dot(d, prev);
      axpy(-proj, prev, d);
    }
    double len = norm(d);
    if (len < 1e-9) throw InputError("degenerate synthetic direction (dim too small?)");
    for (double& x : d) x /= len;
    dirs.push_back(std::move(d));
  }
  const Vec& valence = dirs.back();

  auto noisy = [&](const Vec& base, double strength, double noise_scale,
                   const std::string& word) {
    SplitMix64 rng(derive_seed(config.seed, {"word", word}));
    Vec v(m);
    double ns = noise_scale / std::sqrt(static_cast<double>(m));
    for (std::size_t j = 0; j < m; ++j) v[j] = strength * base[j] + ns * rng.normal();
    return v;
  };

  for (std::size_t k = 0; k < config.aspects.size(); ++k) {
    const std::string& aspect = config.aspects[k];
    auto lex_it = config.aspect_lexicons.find(aspect);
    if (lex_it == config.aspect_lexicons.end()) {
      throw InputError("no lexicon for aspect '" + aspect + "'");
    }
    // label words anchor the +direction; cue words sit opposite, so a present
    // cue is the column that moves an aspect anchor toward a reconstruction
    for (const std::string& part : split_aspect_label(aspect)) {
      table.insert(part, noisy(dirs[k], config.cue_strength, config.cue_noise, part));
    }
    for (const std::string& w : lex_it->second) {
      if (!table.contains(w)) {
        table.insert(w, noisy(dirs[k], -config.cue_strength, config.cue_noise, w));
      }
    }
  }
  for (const std::string& w : config.positive_cues) {
    table.insert(w, noisy(valence, config.valence_strength, config.cue_noise, w));
  }
  for (const std::string& w : config.negative_cues) {
    table.insert(w, noisy(valence, -config.valence_strength, config.cue_noise, w));
  }
  Vec zero(m, 0.0);
  for (const std::string& w : config.distractors) {
    if (!table.contains(w)) {
      table.insert(w, noisy(zero, 0.0, config.distractor_scale, w));
    }
  }
  return table;
}

}  // namespace tabsa
