#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "tabgraph/table.hpp"

namespace tabgraph {

enum class NodeKind { query, caption, header, cell };

struct Node {
  NodeKind kind;
  std::size_t index;  // position in the fixed node ordering
  std::size_t row;    // cell nodes only (0-based data row)
  std::size_t col;    // header/cell nodes
  std::string text;
};

enum class EdgeKind : std::uint8_t {
  query_link = 0,
  caption_content = 1,
  header_cell = 2,
  subject_attribute = 3,
  cell_cell = 4,
};

const char* edge_kind_name(EdgeKind k);
EdgeKind edge_kind_from_name(const std::string& name);

// Undirected typed edge; endpoints normalized a < b. Exactly one kind per
// endpoint pair (dedup precedence: subject_attribute > header_cell >
// caption_content > cell_cell > query_link).
struct TypedEdge {
  std::size_t a;
  std::size_t b;
  EdgeKind kind;

  bool operator==(const TypedEdge& o) const {
    return a == o.a && b == o.b && kind == o.kind;
  }
};

struct GraphOptions {
  // stricter reading that keeps subject-column cells out of cell-cell edges
  bool cell_cell_excludes_subject = false;
};

// Node ordering is Query, Caption, Headers by column, Cells row-major. The
// encoder relies on the same ordering for its span layout.
struct Graph {
  std::vector<Node> nodes;
  std::vector<TypedEdge> edges;
  std::size_t body_rows = 0;
  std::size_t body_cols = 0;
  bool has_header = false;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t cell_node(std::size_t row, std::size_t col) const;
  std::vector<std::size_t> neighbors(std::size_t node) const;
};

Graph build_graph(const std::string& query, const SemiTable& t,
                  const GraphOptions& opts = {});

// A, A~ = A + I, D~ and the symmetric renormalized adjacency
// A^ = D~^{-1/2} A~ D~^{-1/2}, all dense row-major K x K.
struct GraphMatrices {
  std::size_t k = 0;
  std::vector<double> adjacency;       // A
  std::vector<double> adjacency_self;  // A~
  std::vector<double> degree_self;     // diagonal of D~
  std::vector<double> normalized;      // A^

  double at(const std::vector<double>& m, std::size_t i, std::size_t j) const {
    return m[i * k + j];
  }
};

GraphMatrices normalized_adjacency(std::size_t num_nodes,
                                   const std::vector<TypedEdge>& edges);

// Drop every edge whose kind is in `remove`. Pairs that were absorbed into a
// higher-precedence kind are not resurrected. If query_link is removed the
// query node ends up isolated; *query_isolated reports that when non-null.
std::vector<TypedEdge> ablate_edges(const std::vector<TypedEdge>& edges,
                                    const std::set<EdgeKind>& remove,
                                    bool* query_isolated = nullptr);

// Deterministic dumps for external inspection.
std::string graph_to_json(const Graph& g);
std::string graph_to_edge_list(const Graph& g);

}  // namespace tabgraph
