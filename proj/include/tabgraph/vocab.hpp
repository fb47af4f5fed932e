#pragma once

#include <map>
#include <string>
#include <vector>

#include "tabgraph/dataset.hpp"

namespace tabgraph {

// Token <-> id bijection with dense ids. Specials occupy [0, 5); corpus
// tokens follow ordered by count descending, ties lexicographic.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kMask = 4;
  static constexpr std::size_t kNumSpecials = 5;

  static Vocab build(const std::vector<LabeledExample>& corpus, std::size_t min_count = 1);

  std::size_t size() const { return tokens_.size(); }  // V
  int id_of(const std::string& token) const;           // kUnk when absent
  const std::string& token_of(int id) const;
  bool is_special(int id) const { return id >= 0 && id < static_cast<int>(kNumSpecials); }

  // one corpus token per line; line number = id - kNumSpecials
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  Vocab();
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

}  // namespace tabgraph
