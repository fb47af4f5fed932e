#pragma once

#include <string>

#include "tabgraph/table.hpp"

namespace tabgraph {

// Parse the first table element of an HTML fragment into a canonical
// SemiTable. Caption comes from the caption element, else the nearest
// preceding heading. A first row made entirely of header cells becomes the
// header. Spanned cells are duplicated to keep the grid rectangular. The
// vertical-table transpose and subject classification are applied before
// returning. Throws NoTableFound / EmptyTable.
SemiTable parse_html_table(const std::string& html);

// Parse the first ul/ol/dl element into a single-column list. Description
// list entries are joined as "term: description". Nested list items are
// flattened depth-first after their parent item. Throws NoListFound /
// EmptyList.
SemiTable parse_html_list(const std::string& html);

}  // namespace tabgraph
