#pragma once

#include <string>
#include <vector>

#include "tabgraph/rng.hpp"
#include "tabgraph/table.hpp"
#include "tabgraph/tensor.hpp"
#include "tabgraph/vocab.hpp"

namespace tabgraph {

struct TokenSpan {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // inclusive
  std::size_t length() const { return end - start + 1; }
};

// The concatenated input: [CLS] query [SEP] caption [SEP] header cells and
// body cells row-major, each node span followed by [SEP]. Empty components
// get a single [PAD] token so every node owns at least one position.
// node_spans follow the graph node ordering (query, caption, headers, cells).
struct TokenizedInput {
  std::vector<int> ids;
  std::vector<TokenSpan> node_spans;
  std::vector<int> owner;  // node index per token; -1 for [CLS]/[SEP]

  std::size_t num_tokens() const { return ids.size(); }
  std::size_t num_nodes() const { return node_spans.size(); }
};

TokenizedInput encode_input(const std::string& query, const SemiTable& t,
                            const Vocab& vocab);

enum class InitScheme { glorot, gaussian };

struct EncoderDims {
  std::size_t d_e = 64;        // token embedding width
  std::size_t hidden = 64;     // LSTM hidden units per direction
  std::size_t mlp_hidden = 64; // span MLP hidden layer
  std::size_t d = 64;          // node vector width
};

struct EncoderParams {
  Tensor embedding;  // V x d_e
  Tensor fwd_wx, fwd_wh, fwd_b;
  Tensor bwd_wx, bwd_wh, bwd_b;
  Tensor span_w1, span_b1;  // 4H -> mlp_hidden
  Tensor span_w2, span_b2;  // mlp_hidden -> d

  std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

EncoderParams init_encoder_params(const EncoderDims& dims, std::size_t vocab_size,
                                  InitScheme scheme, Rng& rng);

// glorot: uniform(-a, a), a = sqrt(6 / (fan_in + fan_out)); gaussian: N(0, 0.01)
Tensor init_weight(std::size_t rows, std::size_t cols, InitScheme scheme, Rng& rng);

// token id rows gathered from the embedding table; T x d_e
Tensor token_embeddings(Tape& tape, const TokenizedInput& input,
                        const EncoderParams& params);

// import path for externally produced contextual embeddings; text format
// "T d_e" header line followed by T rows of doubles
Tensor load_embedding_matrix(const std::string& path);

// bidirectional hidden states over the token matrix; T x 2H
Tensor bilstm_states(Tape& tape, const Tensor& token_matrix, const EncoderParams& params);

// Span-extremes node initialization: for node span (s, t) feed
// [states(s); states(t)] through the span MLP. K x d, rows in node order.
Tensor init_nodes_from_states(Tape& tape, const Tensor& states,
                              const TokenizedInput& input, const EncoderParams& params,
                              double dropout_p, bool train_mode, Rng& rng);

Tensor init_nodes(Tape& tape, const Tensor& token_matrix, const TokenizedInput& input,
                  const EncoderParams& params, double dropout_p, bool train_mode,
                  Rng& rng);

// LSTM-ablated variant: node vector = mean of its span's token embeddings
Tensor init_nodes_avg(Tape& tape, const Tensor& token_matrix, const TokenizedInput& input);

}  // namespace tabgraph
