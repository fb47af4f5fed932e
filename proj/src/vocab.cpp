#include "tabgraph/vocab.hpp"

#include <algorithm>
#include <fstream>

#include "tabgraph/errors.hpp"
#include "tabgraph/text.hpp"

namespace tabgraph {

namespace {
const char* kSpecialNames[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
}

Vocab::Vocab() {
  for (const char* s : kSpecialNames) {
    ids_.emplace(s, static_cast<int>(tokens_.size()));
    tokens_.emplace_back(s);
  }
}

Vocab Vocab::build(const std::vector<LabeledExample>& corpus, std::size_t min_count) {
  if (corpus.empty()) throw Error("build_vocab: empty corpus");
  std::map<std::string, std::size_t> counts;
  auto count_text = [&counts](const std::string& text) {
    for (const auto& tok : tokenize(text)) ++counts[tok];
  };
  for (const auto& ex : corpus) {
    count_text(ex.query);
    count_text(ex.example.caption);
    if (ex.example.header.has_value())
      for (const auto& h : *ex.example.header) count_text(h);
    for (const auto& row : ex.example.body)
      for (const auto& cell : row) count_text(cell);
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [tok, c] : counts)
    if (c >= min_count) kept.emplace_back(tok, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab v;
  for (const auto& [tok, c] : kept) {
    (void)c;
    v.ids_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(tok);
  }
  return v;
}

int Vocab::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw Error("token id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocab::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  for (std::size_t i = kNumSpecials; i < tokens_.size(); ++i) os << tokens_[i] << '\n';
  if (!os) throw Error("write failed for " + path);
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  Vocab v;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    v.ids_.emplace(line, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(line);
  }
  return v;
}

}  // namespace tabgraph
