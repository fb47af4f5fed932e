#include "tabgraph/dataset.hpp"

#include <fstream>

#include "json.hpp"
#include "tabgraph/errors.hpp"
#include "tabgraph/text.hpp"

namespace tabgraph {

namespace {

using nlohmann::ordered_json;

const char* kKnownKeys[] = {"id", "query", "caption", "header", "rows", "kind", "label"};

bool known_key(const std::string& k) {
  for (const char* known : kKnownKeys)
    if (k == known) return true;
  return false;
}

}  // namespace

std::string example_to_json_line(const LabeledExample& ex) {
  ordered_json j;
  j["id"] = ex.id;
  if (ex.labeled) j["query"] = ex.query;
  j["caption"] = ex.example.caption;
  if (ex.example.header.has_value())
    j["header"] = *ex.example.header;
  else
    j["header"] = nullptr;
  j["rows"] = ex.example.body;
  j["kind"] = ex.example.kind == TableKind::table ? "table" : "list";
  if (ex.labeled) j["label"] = ex.label;
  return j.dump();
}

LabeledExample example_from_json_line(const std::string& line, std::size_t line_no,
                                      bool strict) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const std::exception& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_no, "record is not an object");
  if (strict) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!known_key(it.key())) throw ParseError(line_no, "unknown field: " + it.key());
  }

  LabeledExample ex;
  try {
    ex.id = j.value("id", std::string{});
    ex.example.caption = j.value("caption", std::string{});
    if (j.contains("header") && !j.at("header").is_null())
      ex.example.header = j.at("header").get<std::vector<std::string>>();
    if (!j.contains("rows")) throw ParseError(line_no, "missing rows");
    ex.example.body = j.at("rows").get<std::vector<std::vector<std::string>>>();
    const std::string kind = j.value("kind", std::string{"table"});
    if (kind == "table") ex.example.kind = TableKind::table;
    else if (kind == "list") ex.example.kind = TableKind::list;
    else throw ParseError(line_no, "kind must be \"table\" or \"list\"");
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(line_no, std::string("bad field type: ") + e.what());
  }

  if (j.contains("label")) {
    if (!j.at("label").is_number_integer())
      throw ParseError(line_no, "label must be an integer");
    const auto label = j.at("label").get<long long>();
    if (label != 0 && label != 1) throw ParseError(line_no, "label must be binary");
    ex.label = static_cast<int>(label);
    ex.labeled = true;
    ex.query = j.value("query", std::string{});
    if (ex.query.empty()) throw ParseError(line_no, "labeled record has empty query");
  } else {
    ex.labeled = false;
    ex.label = 0;
    ex.query = j.value("query", std::string{});
  }

  try {
    ex.example.validate();
  } catch (const std::exception& e) {
    throw ParseError(line_no, e.what());
  }
  return ex;
}

std::vector<LabeledExample> read_jsonl(const std::string& path, bool strict) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;  // blank lines tolerated
    out.push_back(example_from_json_line(line, line_no, strict));
  }
  return out;
}

void write_jsonl(const std::vector<LabeledExample>& data, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  for (const auto& ex : data) os << example_to_json_line(ex) << '\n';
  if (!os) throw Error("write failed for " + path);
}

}  // namespace tabgraph
