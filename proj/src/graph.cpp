#include "tabgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tabgraph/errors.hpp"

namespace tabgraph {

const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::query_link: return "query_link";
    case EdgeKind::caption_content: return "caption_content";
    case EdgeKind::header_cell: return "header_cell";
    case EdgeKind::subject_attribute: return "subject_attribute";
    case EdgeKind::cell_cell: return "cell_cell";
  }
  return "unknown";
}

EdgeKind edge_kind_from_name(const std::string& name) {
  if (name == "query_link") return EdgeKind::query_link;
  if (name == "caption_content") return EdgeKind::caption_content;
  if (name == "header_cell") return EdgeKind::header_cell;
  if (name == "subject_attribute") return EdgeKind::subject_attribute;
  if (name == "cell_cell") return EdgeKind::cell_cell;
  throw Error("unknown edge kind: " + name);
}

std::size_t Graph::cell_node(std::size_t row, std::size_t col) const {
  const std::size_t header_nodes = has_header ? body_cols : 0;
  return 2 + header_nodes + row * body_cols + col;
}

std::vector<std::size_t> Graph::neighbors(std::size_t node) const {
  std::vector<std::size_t> out;
  for (const auto& e : edges) {
    if (e.a == node) out.push_back(e.b);
    else if (e.b == node) out.push_back(e.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Precedence used when two rules produce the same endpoint pair; lower wins.
int precedence(EdgeKind k) {
  switch (k) {
    case EdgeKind::subject_attribute: return 0;
    case EdgeKind::header_cell: return 1;
    case EdgeKind::caption_content: return 2;
    case EdgeKind::cell_cell: return 3;
    case EdgeKind::query_link: return 4;
  }
  return 5;
}

struct EdgeAccumulator {
  std::map<std::pair<std::size_t, std::size_t>, EdgeKind> by_pair;

  void add(std::size_t a, std::size_t b, EdgeKind kind) {
    if (a == b) return;  // no self-loops at this layer
    if (a > b) std::swap(a, b);
    auto key = std::make_pair(a, b);
    auto it = by_pair.find(key);
    if (it == by_pair.end()) {
      by_pair.emplace(key, kind);
    } else if (precedence(kind) < precedence(it->second)) {
      it->second = kind;
    }
  }
};

}  // namespace

Graph build_graph(const std::string& query, const SemiTable& t,
                  const GraphOptions& opts) {
  t.validate();
  const bool is_table = t.kind == TableKind::table;
  if (is_table && !t.column_roles.has_value())
    throw InvalidTable("build_graph requires column_roles on tables");

  Graph g;
  g.body_rows = t.rows();
  g.body_cols = t.cols();
  g.has_header = t.header.has_value();

  g.nodes.push_back({NodeKind::query, 0, 0, 0, query});
  g.nodes.push_back({NodeKind::caption, 1, 0, 0, t.caption});
  if (g.has_header) {
    for (std::size_t j = 0; j < g.body_cols; ++j)
      g.nodes.push_back({NodeKind::header, g.nodes.size(), 0, j, (*t.header)[j]});
  }
  for (std::size_t i = 0; i < g.body_rows; ++i)
    for (std::size_t j = 0; j < g.body_cols; ++j)
      g.nodes.push_back({NodeKind::cell, g.nodes.size(), i, j, t.body[i][j]});

  EdgeAccumulator acc;

  // query connects to every other node
  for (std::size_t v = 1; v < g.nodes.size(); ++v)
    acc.add(0, v, EdgeKind::query_link);

  // caption to every cell
  for (std::size_t i = 0; i < g.body_rows; ++i)
    for (std::size_t j = 0; j < g.body_cols; ++j)
      acc.add(1, g.cell_node(i, j), EdgeKind::caption_content);

  // header to the cells of its column
  if (g.has_header) {
    for (std::size_t j = 0; j < g.body_cols; ++j)
      for (std::size_t i = 0; i < g.body_rows; ++i)
        acc.add(2 + j, g.cell_node(i, j), EdgeKind::header_cell);
  }

  // subject cell to the attribute cells of its row (tables only)
  std::vector<bool> is_subject(g.body_cols, false);
  if (is_table) {
    for (std::size_t j = 0; j < g.body_cols; ++j)
      is_subject[j] = (*t.column_roles)[j] == ColumnRole::subject;
    for (std::size_t i = 0; i < g.body_rows; ++i) {
      for (std::size_t js = 0; js < g.body_cols; ++js) {
        if (!is_subject[js]) continue;
        for (std::size_t ja = 0; ja < g.body_cols; ++ja) {
          if (is_subject[ja]) continue;
          acc.add(g.cell_node(i, js), g.cell_node(i, ja),
                  EdgeKind::subject_attribute);
        }
      }
    }
  }

  // orthogonally adjacent cells
  auto cell_cell_allowed = [&](std::size_t j1, std::size_t j2) {
    if (!opts.cell_cell_excludes_subject) return true;
    return !is_subject[j1] && !is_subject[j2];
  };
  for (std::size_t i = 0; i < g.body_rows; ++i)
    for (std::size_t j = 0; j + 1 < g.body_cols; ++j)
      if (cell_cell_allowed(j, j + 1))
        acc.add(g.cell_node(i, j), g.cell_node(i, j + 1), EdgeKind::cell_cell);
  for (std::size_t i = 0; i + 1 < g.body_rows; ++i)
    for (std::size_t j = 0; j < g.body_cols; ++j)
      if (cell_cell_allowed(j, j))
        acc.add(g.cell_node(i, j), g.cell_node(i + 1, j), EdgeKind::cell_cell);

  // emit grouped by kind, pairs ascending within each kind
  for (EdgeKind kind : {EdgeKind::query_link, EdgeKind::caption_content,
                        EdgeKind::header_cell, EdgeKind::subject_attribute,
                        EdgeKind::cell_cell}) {
    for (const auto& [pair, k] : acc.by_pair)
      if (k == kind) g.edges.push_back({pair.first, pair.second, kind});
  }
  return g;
}

GraphMatrices normalized_adjacency(std::size_t num_nodes,
                                   const std::vector<TypedEdge>& edges) {
  if (num_nodes == 0) throw Error("normalized_adjacency: empty graph");
  GraphMatrices m;
  m.k = num_nodes;
  m.adjacency.assign(num_nodes * num_nodes, 0.0);
  for (const auto& e : edges) {
    m.adjacency[e.a * num_nodes + e.b] = 1.0;
    m.adjacency[e.b * num_nodes + e.a] = 1.0;
  }
  m.adjacency_self = m.adjacency;
  for (std::size_t i = 0; i < num_nodes; ++i)
    m.adjacency_self[i * num_nodes + i] += 1.0;

  m.degree_self.assign(num_nodes, 0.0);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < num_nodes; ++j) d += m.adjacency_self[i * num_nodes + j];
    m.degree_self[i] = d;
  }

  m.normalized.assign(num_nodes * num_nodes, 0.0);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t j = 0; j < num_nodes; ++j) {
      const double a = m.adjacency_self[i * num_nodes + j];
      if (a != 0.0)
        m.normalized[i * num_nodes + j] =
            a / std::sqrt(m.degree_self[i] * m.degree_self[j]);
    }
  }
  return m;
}

std::vector<TypedEdge> ablate_edges(const std::vector<TypedEdge>& edges,
                                    const std::set<EdgeKind>& remove,
                                    bool* query_isolated) {
  std::vector<TypedEdge> out;
  out.reserve(edges.size());
  for (const auto& e : edges)
    if (!remove.count(e.kind)) out.push_back(e);
  if (query_isolated)
    *query_isolated = remove.count(EdgeKind::query_link) > 0;
  return out;
}

std::string graph_to_json(const Graph& g) {
  nlohmann::ordered_json j;
  j["num_nodes"] = g.num_nodes();
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes) {
    nlohmann::ordered_json nj;
    nj["id"] = n.index;
    switch (n.kind) {
      case NodeKind::query: nj["kind"] = "query"; break;
      case NodeKind::caption: nj["kind"] = "caption"; break;
      case NodeKind::header:
        nj["kind"] = "header";
        nj["col"] = n.col;
        break;
      case NodeKind::cell:
        nj["kind"] = "cell";
        nj["row"] = n.row;
        nj["col"] = n.col;
        break;
    }
    nj["text"] = n.text;
    j["nodes"].push_back(std::move(nj));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) {
    nlohmann::ordered_json ej;
    ej["a"] = e.a;
    ej["b"] = e.b;
    ej["kind"] = edge_kind_name(e.kind);
    j["edges"].push_back(std::move(ej));
  }
  return j.dump(2);
}

std::string graph_to_edge_list(const Graph& g) {
  std::ostringstream out;
  for (const auto& e : g.edges)
    out << e.a << ' ' << e.b << ' ' << edge_kind_name(e.kind) << '\n';
  return out.str();
}

}  // namespace tabgraph
