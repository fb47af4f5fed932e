#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tabgraph {

enum class TableKind { table, list };
enum class ColumnRole { subject, attribute };

// Canonical representation of a semi-structured data example. A list is a
// single-column, headerless table. body is always rectangular (R x N).
struct SemiTable {
  TableKind kind = TableKind::table;
  std::string caption;
  std::optional<std::vector<std::string>> header;
  std::vector<std::vector<std::string>> body;
  std::optional<std::vector<ColumnRole>> column_roles;

  std::size_t rows() const { return body.size(); }
  std::size_t cols() const { return body.empty() ? 0 : body.front().size(); }

  // throws InvalidTable when an invariant is broken
  void validate() const;

  bool operator==(const SemiTable& other) const;
};

struct ColumnRoles {
  std::vector<ColumnRole> roles;
  std::vector<double> ratios;
};

struct ClassifyOptions {
  double theta_subject = 0.9;        // minimum distinct string ratio
  double numeric_max_fraction = 0.5; // columns at/above this are never subjects
  bool allow_multiple_subjects = false;
};

struct TransposeOptions {
  double lexicon_min_fraction = 0.6;
  bool enabled = true;
};

// distinct normalized strings / column length; throws EmptyColumn
double distinct_ratio(const std::vector<std::string>& column);

// Subject/attribute assignment from distinct string ratios. Among columns
// with ratio >= theta and numeric fraction < 0.5, the leftmost becomes the
// subject; everything else is an attribute.
ColumnRoles classify_columns(const SemiTable& t, const ClassifyOptions& opts = {});

// Vertical-table heuristic: a headerless table whose first column looks like
// a header (keyword lexicon hit or fully distinct) is transposed, with the
// first column promoted to the header row. Idempotent.
SemiTable transpose_if_vertical(const SemiTable& t, const TransposeOptions& opts = {});

bool looks_vertical(const SemiTable& t, const TransposeOptions& opts = {});

// Reinterpret a list as a single-column headerless table. Blank items are
// dropped; an all-blank list raises EmptyList.
SemiTable list_as_table(const SemiTable& l);

// Fraction of cells in the column that parse as numbers.
double numeric_fraction(const std::vector<std::string>& column);

// Column j of the body as a vector.
std::vector<std::string> body_column(const SemiTable& t, std::size_t j);

}  // namespace tabgraph
