#include "tabgraph/table.hpp"

#include <algorithm>
#include <set>

#include "tabgraph/errors.hpp"
#include "tabgraph/text.hpp"

namespace tabgraph {

namespace {

// Small lexicon of words that usually label fields rather than hold data;
// used by the vertical-table heuristic.
const std::set<std::string>& header_lexicon() {
  static const std::set<std::string> kLexicon = {
      "name",     "rank",   "country",  "city",       "year",   "date",
      "type",     "title",  "price",    "location",   "state",  "region",
      "category", "score",  "age",      "population", "height", "weight",
      "capacity", "address"};
  return kLexicon;
}

bool lexicon_match(const std::string& cell) {
  std::string n = normalize_cell(cell);
  if (!n.empty() && n.back() == ':') n.pop_back();
  return header_lexicon().count(trim(n)) > 0;
}

}  // namespace

void SemiTable::validate() const {
  if (body.empty()) throw InvalidTable("body must have at least one row");
  const std::size_t n = body.front().size();
  if (n == 0) throw InvalidTable("body must have at least one column");
  for (const auto& row : body) {
    if (row.size() != n) throw InvalidTable("body is not rectangular");
  }
  if (kind == TableKind::list) {
    if (n != 1) throw InvalidTable("a list must have exactly one column");
    if (header.has_value()) throw InvalidTable("a list cannot have a header");
  }
  if (header.has_value() && header->size() != n)
    throw InvalidTable("header width does not match body width");
  if (column_roles.has_value()) {
    if (column_roles->size() != n)
      throw InvalidTable("column_roles length does not match body width");
    if (kind == TableKind::list) {
      for (ColumnRole r : *column_roles)
        if (r != ColumnRole::attribute)
          throw InvalidTable("list columns must all be attributes");
    }
  }
}

bool SemiTable::operator==(const SemiTable& other) const {
  return kind == other.kind && caption == other.caption && header == other.header &&
         body == other.body;
}

double distinct_ratio(const std::vector<std::string>& column) {
  if (column.empty()) throw EmptyColumn();
  std::set<std::string> distinct;
  for (const auto& cell : column) distinct.insert(normalize_cell(cell));
  return static_cast<double>(distinct.size()) / static_cast<double>(column.size());
}

double numeric_fraction(const std::vector<std::string>& column) {
  if (column.empty()) return 0.0;
  std::size_t numeric = 0;
  for (const auto& cell : column)
    if (is_numeric_cell(cell)) ++numeric;
  return static_cast<double>(numeric) / static_cast<double>(column.size());
}

std::vector<std::string> body_column(const SemiTable& t, std::size_t j) {
  std::vector<std::string> col;
  col.reserve(t.rows());
  for (const auto& row : t.body) col.push_back(row.at(j));
  return col;
}

ColumnRoles classify_columns(const SemiTable& t, const ClassifyOptions& opts) {
  t.validate();
  const std::size_t n = t.cols();
  ColumnRoles out;
  out.roles.assign(n, ColumnRole::attribute);
  out.ratios.resize(n);

  std::vector<bool> qualifies(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = body_column(t, j);
    out.ratios[j] = distinct_ratio(col);
    qualifies[j] = out.ratios[j] >= opts.theta_subject &&
                   numeric_fraction(col) < opts.numeric_max_fraction;
  }
  if (t.kind == TableKind::list) return out;  // lists have no subject column

  for (std::size_t j = 0; j < n; ++j) {
    if (!qualifies[j]) continue;
    out.roles[j] = ColumnRole::subject;
    if (!opts.allow_multiple_subjects) break;  // leftmost qualifying wins
  }
  return out;
}

bool looks_vertical(const SemiTable& t, const TransposeOptions& opts) {
  if (!opts.enabled) return false;
  if (t.kind != TableKind::table) return false;
  if (t.header.has_value()) return false;
  if (t.cols() < 2) return false;

  const auto first = body_column(t, 0);
  std::size_t hits = 0;
  for (const auto& cell : first)
    if (lexicon_match(cell)) ++hits;
  const double hit_fraction =
      static_cast<double>(hits) / static_cast<double>(first.size());
  if (hit_fraction >= opts.lexicon_min_fraction) return true;
  return distinct_ratio(first) == 1.0;
}

SemiTable transpose_if_vertical(const SemiTable& t, const TransposeOptions& opts) {
  t.validate();
  if (!looks_vertical(t, opts)) return t;

  const std::size_t r = t.rows();
  const std::size_t n = t.cols();
  SemiTable out;
  out.kind = TableKind::table;
  out.caption = t.caption;
  // first column becomes the header row ...
  std::vector<std::string> header;
  header.reserve(r);
  for (std::size_t i = 0; i < r; ++i) header.push_back(t.body[i][0]);
  out.header = std::move(header);
  // ... and each remaining column becomes a data row
  out.body.reserve(n - 1);
  for (std::size_t j = 1; j < n; ++j) {
    std::vector<std::string> row;
    row.reserve(r);
    for (std::size_t i = 0; i < r; ++i) row.push_back(t.body[i][j]);
    out.body.push_back(std::move(row));
  }
  out.validate();
  return out;
}

SemiTable list_as_table(const SemiTable& l) {
  if (l.kind != TableKind::list) throw NotAList();
  l.validate();
  SemiTable out;
  out.kind = TableKind::table;
  out.caption = l.caption;
  for (const auto& row : l.body) {
    if (trim(row.front()).empty()) continue;  // blank-drop
    out.body.push_back(row);
  }
  if (out.body.empty()) throw EmptyList();
  out.column_roles = std::vector<ColumnRole>{ColumnRole::attribute};
  return out;
}

}  // namespace tabgraph
