#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabgraph/dataset.hpp"

namespace tabgraph {

enum class SynthFamily {
  caption_match,   // positive iff the caption shares a keyword with the query
  header_class,    // positive iff some header equals the queried class word
  row_lookup,      // positive iff queried entity and value share a row
  pretrain_tables, // unlabeled tables for pre-training (no query, no label)
};

SynthFamily synth_family_from_name(const std::string& name);
const char* synth_family_name(SynthFamily family);

struct SynthSpec {
  SynthFamily family = SynthFamily::row_lookup;
  std::size_t count = 1000;
  std::size_t rows = 3;  // data rows per example
  std::size_t cols = 3;  // caption_match / header_class tables
  std::size_t entities = 24;
  std::size_t values = 24;
  std::size_t classes = 12;
  std::size_t keywords = 12;
  std::size_t fillers = 16;
  bool as_lists = false;            // caption_match over lists
  double value_correlation = 0.7;   // pretrain_tables: P(value = canonical(entity))
};

// Deterministic per (spec, seed). Labeled families alternate labels so the
// dataset is exactly balanced. Negatives keep the same bag of words as the
// matching positive construction, only the arrangement changes.
std::vector<LabeledExample> generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

}  // namespace tabgraph
