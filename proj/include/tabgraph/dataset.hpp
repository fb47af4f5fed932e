#pragma once

#include <string>
#include <vector>

#include "tabgraph/table.hpp"

namespace tabgraph {

// One query-example pair. `labeled` is false for pre-training corpora, whose
// records carry no query/label fields on disk; such records read back with
// an empty query and label 0.
struct LabeledExample {
  std::string id;
  std::string query;
  SemiTable example;
  int label = 0;
  bool labeled = true;

  bool operator==(const LabeledExample& o) const {
    return id == o.id && query == o.query && example == o.example && label == o.label &&
           labeled == o.labeled;
  }
};

// JSONL schema per line:
//   {"id","query","caption","header"(nullable),"rows","kind","label"}
// query/label are omitted for unlabeled records. Column roles are not
// persisted; they are recomputed downstream.
std::vector<LabeledExample> read_jsonl(const std::string& path, bool strict = false);
void write_jsonl(const std::vector<LabeledExample>& data, const std::string& path);

std::string example_to_json_line(const LabeledExample& ex);
LabeledExample example_from_json_line(const std::string& line, std::size_t line_no,
                                      bool strict = false);

}  // namespace tabgraph
