#include "tabsa/embedding.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "tabsa/errors.hpp"
#include "tabsa/rng.hpp"

namespace tabsa {

void EmbeddingTable::insert(const std::string& word, Vec v) {
  if (v.size() != dim_) {
    throw InputError("embedding for '" + word + "' has length " +
                     std::to_string(v.size()) + ", table dim is " + std::to_string(dim_));
  }
  entries_[word] = std::move(v);
}

std::span<const double> EmbeddingTable::lookup(const std::string& word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return zero_;
  return it->second;
}

std::span<const double> EmbeddingTable::target_embedding(const std::string& target_id) const {
  if (target_id.empty()) throw InputError("target id must be non-empty");
  std::lock_guard<std::mutex> lock(target_mutex_);
  auto it = target_entries_.find(target_id);
  if (it == target_entries_.end()) {
    it = target_entries_
             .emplace(target_id, init_target_embedding_value(seed_, target_id, dim_,
                                                             target_init_range_))
             .first;
  }
  return it->second;
}

Vec init_target_embedding_value(std::uint64_t seed, const std::string& target_id,
                                std::size_t dim, double range) {
  SplitMix64 rng(derive_seed(seed, {"target-init", target_id}));
  Vec v(dim);
  for (double& x : v) x = rng.uniform(-range, range);
  return v;
}

EmbeddingTable parse_embedding_file(const std::string& path, std::size_t dim,
                                    std::uint64_t seed, EmbeddingLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embedding file: " + path);

  EmbeddingTable table(dim, seed);
  EmbeddingLoadReport local;
  std::string line;
  std::size_t line_no = 0;
  Vec v;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;

    std::size_t sep = line.find(' ');
    if (sep == std::string::npos || sep == 0) {
      local.skipped_lines.push_back(line_no);
      continue;
    }
    std::string word = line.substr(0, sep);

    v.clear();
    const char* p = line.data() + sep;
    const char* end = line.data() + line.size();
    bool bad = false;
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      double x;
      auto [next, ec] = std::from_chars(p, end, x);
      if (ec != std::errc{}) {
        bad = true;
        break;
      }
      v.push_back(x);
      p = next;
    }
    if (bad || v.size() != dim) {
      local.skipped_lines.push_back(line_no);
      continue;
    }
    table.insert(word, v);
    ++local.stored;
  }
  if (report) *report = local;
  return table;
}

void write_embedding_file(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write embedding file: " + path);
  char buf[64];
  for (const auto& [word, vec] : table.entries()) {
    out << word;
    for (double x : vec) {
      std::snprintf(buf, sizeof(buf), " %.17g", x);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<std::string> split_aspect_label(const std::string& label) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : label) {
    if (c == '-' || c == ' ' || c == '\t' || c == '_') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

AspectEmbedding aspect_embedding(const EmbeddingTable& table, const std::string& label) {
  std::vector<std::string> parts = split_aspect_label(label);
  if (parts.empty()) throw InputError("empty aspect label");

  AspectEmbedding out;
  out.label = label;
  out.vector.assign(table.dim(), 0.0);
  for (const std::string& w : parts) {
    if (!table.contains(w)) continue;  // OOV constituents are excluded from the mean
    axpy(1.0, table.lookup(w), out.vector);
    out.source_words.push_back(w);
  }
  if (out.source_words.empty()) {
    out.all_oov = true;
    return out;
  }
  double inv = 1.0 / static_cast<double>(out.source_words.size());
  for (double& x : out.vector) x *= inv;
  return out;
}

}  // namespace tabsa
