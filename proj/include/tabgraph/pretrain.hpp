#pragma once

#include <set>
#include <vector>

#include "tabgraph/model.hpp"

namespace tabgraph {

enum class MaskAction { mask_token, random_token, keep };

struct MaskedToken {
  std::size_t position;    // token index in the input sequence
  MaskAction action;
  int replacement_id;      // id written into the masked sequence
  int original_id;         // prediction target
  std::size_t node;        // owning node
  std::size_t offset;      // 0-based offset inside the node span
};

// Deterministic record of the whole-cell masking decisions for one input.
// Cell-atomicity: once a node is selected every token in its span carries an
// action. Query and caption nodes are never selected.
struct MaskPlan {
  std::vector<std::size_t> masked_nodes;
  std::vector<MaskedToken> tokens;  // ordered by position

  bool position_masked(std::size_t position) const;
  bool empty() const { return tokens.empty(); }
};

// Select each header/cell node with probability mask_rate; within selected
// nodes sample per-token actions 80/10/10 (mask/random/keep). If nothing is
// drawn one maskable node is forced so the loss is defined.
MaskPlan plan_wcm_mask(const TokenizedInput& input,
                       const std::vector<NodeKind>& node_kinds, const Vocab& vocab,
                       Rng& rng, double mask_rate = 0.15);

std::vector<int> apply_mask_plan(const std::vector<int>& ids, const MaskPlan& plan);

struct WcmHead {
  Tensor w1, b1;  // 2H -> hidden
  Tensor w2, b2;  // hidden -> V
  std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

struct NpoHead {
  Tensor positional;  // max positions x d, fixed sinusoidal table
  Tensor w1, b1;      // (g + d) -> hidden
  Tensor w2, b2;      // hidden -> hidden
  Tensor w3, b3;      // hidden -> V
  std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

struct PretrainHeads {
  WcmHead wcm;
  NpoHead npo;
  std::vector<std::pair<std::string, Tensor>> named() const;
  void zero_grad();
};

PretrainHeads init_pretrain_heads(const ModelDims& dims, std::size_t vocab_size,
                                  InitScheme scheme, Rng& rng,
                                  std::size_t max_positions = 128);

// dims 2i = sin(k / 10000^(2i/d)), 2i+1 = cos(k / 10000^(2i/d)); d must be even
std::vector<double> sinusoidal_position(std::size_t k, std::size_t d);
Tensor build_positional_table(std::size_t max_positions, std::size_t d);

// Vocabulary logits for masked position m from its contextual state.
Tensor wcm_logits(Tape& tape, const Tensor& states, std::size_t position,
                  const MaskPlan& plan, const WcmHead& head, double dropout_p,
                  bool train_mode, Rng& rng);

// Vocabulary logits for token offset k of masked node n: mean-pool the L2
// rows of n's neighbors (n itself excluded), concatenate the k-th positional
// code, decode through the two-hidden-layer MLP.
Tensor npo_logits(Tape& tape, const Tensor& l2, const CompiledExample& ex,
                  std::size_t node, std::size_t offset, const NpoHead& head,
                  double dropout_p, bool train_mode, Rng& rng);

enum class Objective { wcm, npo };

// Mean over masked positions of the enabled objectives' cross-entropies;
// the WCM and NPO means are summed. The encoder and GCN run on the masked
// sequence; the graph itself only depends on the example's shape.
Tensor pretrain_loss(Tape& tape, const Model& model, const PretrainHeads& heads,
                     const CompiledExample& ex, const MaskPlan& plan,
                     const std::set<Objective>& objectives, bool train_mode, Rng& rng);

}  // namespace tabgraph
