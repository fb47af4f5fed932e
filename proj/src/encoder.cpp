#include "tabgraph/encoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tabgraph/errors.hpp"
#include "tabgraph/text.hpp"

namespace tabgraph {

TokenizedInput encode_input(const std::string& query, const SemiTable& t,
                            const Vocab& vocab) {
  t.validate();
  TokenizedInput out;
  out.ids.push_back(Vocab::kCls);
  out.owner.push_back(-1);

  auto push_node = [&out, &vocab](const std::string& text) {
    const int node = static_cast<int>(out.node_spans.size());
    std::vector<std::string> tokens = tokenize(text);
    const std::size_t start = out.ids.size();
    if (tokens.empty()) {
      out.ids.push_back(Vocab::kPad);  // empty component still owns a span
      out.owner.push_back(node);
    } else {
      for (const auto& tok : tokens) {
        out.ids.push_back(vocab.id_of(tok));
        out.owner.push_back(node);
      }
    }
    out.node_spans.push_back({start, out.ids.size() - 1});
    out.ids.push_back(Vocab::kSep);
    out.owner.push_back(-1);
  };

  push_node(query);
  push_node(t.caption);
  if (t.header.has_value())
    for (const auto& h : *t.header) push_node(h);
  for (const auto& row : t.body)
    for (const auto& cell : row) push_node(cell);
  return out;
}

Tensor init_weight(std::size_t rows, std::size_t cols, InitScheme scheme, Rng& rng) {
  std::vector<double> values(rows * cols);
  if (scheme == InitScheme::glorot) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : values) v = (rng.uniform() * 2.0 - 1.0) * a;
  } else {
    for (double& v : values) v = rng.normal() * 0.01;
  }
  return Tensor::from_values({rows, cols}, std::move(values), true);
}

namespace {

// forget-gate bias starts at 1 so early training retains state
Tensor init_lstm_bias(std::size_t h_dim) {
  std::vector<double> b(4 * h_dim, 0.0);
  for (std::size_t j = 0; j < h_dim; ++j) b[h_dim + j] = 1.0;
  return Tensor::from_values({1, 4 * h_dim}, std::move(b), true);
}

}  // namespace

EncoderParams init_encoder_params(const EncoderDims& dims, std::size_t vocab_size,
                                  InitScheme scheme, Rng& rng) {
  EncoderParams p;
  p.embedding = init_weight(vocab_size, dims.d_e, scheme, rng);
  p.fwd_wx = init_weight(dims.d_e, 4 * dims.hidden, scheme, rng);
  p.fwd_wh = init_weight(dims.hidden, 4 * dims.hidden, scheme, rng);
  p.fwd_b = init_lstm_bias(dims.hidden);
  p.bwd_wx = init_weight(dims.d_e, 4 * dims.hidden, scheme, rng);
  p.bwd_wh = init_weight(dims.hidden, 4 * dims.hidden, scheme, rng);
  p.bwd_b = init_lstm_bias(dims.hidden);
  p.span_w1 = init_weight(4 * dims.hidden, dims.mlp_hidden, scheme, rng);
  p.span_b1 = Tensor::zeros({1, dims.mlp_hidden}, true);
  p.span_w2 = init_weight(dims.mlp_hidden, dims.d, scheme, rng);
  p.span_b2 = Tensor::zeros({1, dims.d}, true);
  return p;
}

std::vector<std::pair<std::string, Tensor>> EncoderParams::named(
    const std::string& prefix) const {
  return {{prefix + "embedding", embedding}, {prefix + "fwd_wx", fwd_wx},
          {prefix + "fwd_wh", fwd_wh},       {prefix + "fwd_b", fwd_b},
          {prefix + "bwd_wx", bwd_wx},       {prefix + "bwd_wh", bwd_wh},
          {prefix + "bwd_b", bwd_b},         {prefix + "span_w1", span_w1},
          {prefix + "span_b1", span_b1},     {prefix + "span_w2", span_w2},
          {prefix + "span_b2", span_b2}};
}

Tensor token_embeddings(Tape& tape, const TokenizedInput& input,
                        const EncoderParams& params) {
  return tape.embedding_rows(params.embedding, input.ids);
}

Tensor load_embedding_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  std::size_t t_len = 0, d_e = 0;
  is >> t_len >> d_e;
  if (!is || t_len == 0 || d_e == 0)
    throw Error("embedding import: bad shape header in " + path);
  std::vector<double> values(t_len * d_e);
  for (double& v : values) {
    is >> v;
    if (!is) throw Error("embedding import: truncated matrix in " + path);
  }
  return Tensor::from_values({t_len, d_e}, std::move(values));
}

Tensor bilstm_states(Tape& tape, const Tensor& token_matrix, const EncoderParams& params) {
  return tape.bilstm(token_matrix, params.fwd_wx, params.fwd_wh, params.fwd_b,
                     params.bwd_wx, params.bwd_wh, params.bwd_b);
}

Tensor init_nodes_from_states(Tape& tape, const Tensor& states,
                              const TokenizedInput& input, const EncoderParams& params,
                              double dropout_p, bool train_mode, Rng& rng) {
  std::vector<Tensor> rows;
  rows.reserve(input.num_nodes());
  for (const TokenSpan& span : input.node_spans) {
    if (span.end >= states.rows())
      throw ShapeError("init_nodes: span out of bounds for token matrix");
    Tensor h_start = tape.select_row(states, span.start);
    Tensor h_end = tape.select_row(states, span.end);
    Tensor extremes = tape.concat_cols({h_start, h_end});
    Tensor h1 = tape.relu(tape.add(tape.matmul(extremes, params.span_w1), params.span_b1));
    h1 = tape.dropout(h1, dropout_p, train_mode, rng);
    rows.push_back(tape.add(tape.matmul(h1, params.span_w2), params.span_b2));
  }
  return tape.stack_rows(rows);
}

Tensor init_nodes(Tape& tape, const Tensor& token_matrix, const TokenizedInput& input,
                  const EncoderParams& params, double dropout_p, bool train_mode,
                  Rng& rng) {
  Tensor states = bilstm_states(tape, token_matrix, params);
  return init_nodes_from_states(tape, states, input, params, dropout_p, train_mode, rng);
}

Tensor init_nodes_avg(Tape& tape, const Tensor& token_matrix, const TokenizedInput& input) {
  std::vector<Tensor> rows;
  rows.reserve(input.num_nodes());
  for (const TokenSpan& span : input.node_spans) {
    std::vector<std::size_t> positions;
    positions.reserve(span.length());
    for (std::size_t p = span.start; p <= span.end; ++p) positions.push_back(p);
    rows.push_back(tape.mean_pool_rows_subset(token_matrix, positions));
  }
  return tape.stack_rows(rows);
}

}  // namespace tabgraph
