#include "tabgraph/pretrain.hpp"

#include <algorithm>
#include <cmath>

#include "tabgraph/errors.hpp"

namespace tabgraph {

bool MaskPlan::position_masked(std::size_t position) const {
  for (const auto& t : tokens)
    if (t.position == position) return true;
  return false;
}

namespace {

bool maskable(NodeKind kind) {
  return kind == NodeKind::header || kind == NodeKind::cell;
}

void mask_node(const TokenizedInput& input, const Vocab& vocab, std::size_t node,
               Rng& rng, MaskPlan& plan) {
  plan.masked_nodes.push_back(node);
  const TokenSpan& span = input.node_spans[node];
  for (std::size_t p = span.start; p <= span.end; ++p) {
    MaskedToken mt;
    mt.position = p;
    mt.original_id = input.ids[p];
    mt.node = node;
    mt.offset = p - span.start;
    const double u = rng.uniform();
    if (u < 0.8) {
      mt.action = MaskAction::mask_token;
      mt.replacement_id = Vocab::kMask;
    } else if (u < 0.9) {
      mt.action = MaskAction::random_token;
      const std::size_t corpus_tokens = vocab.size() - Vocab::kNumSpecials;
      if (corpus_tokens == 0) {
        mt.replacement_id = Vocab::kMask;  // degenerate vocab, fall back
        mt.action = MaskAction::mask_token;
      } else {
        mt.replacement_id =
            static_cast<int>(Vocab::kNumSpecials + rng.uniform_int(corpus_tokens));
      }
    } else {
      mt.action = MaskAction::keep;
      mt.replacement_id = input.ids[p];
    }
    plan.tokens.push_back(mt);
  }
}

}  // namespace

MaskPlan plan_wcm_mask(const TokenizedInput& input,
                       const std::vector<NodeKind>& node_kinds, const Vocab& vocab,
                       Rng& rng, double mask_rate) {
  if (node_kinds.size() != input.num_nodes())
    throw Error("plan_wcm_mask: node kinds do not match input spans");
  std::vector<std::size_t> candidates;
  for (std::size_t n = 0; n < node_kinds.size(); ++n)
    if (maskable(node_kinds[n])) candidates.push_back(n);
  if (candidates.empty()) throw Error("plan_wcm_mask: input has no cell or header nodes");

  MaskPlan plan;
  for (std::size_t n : candidates) {
    if (rng.uniform() < mask_rate) mask_node(input, vocab, n, rng, plan);
  }
  if (plan.masked_nodes.empty()) {
    // force one selection so the loss is defined
    const std::size_t n = candidates[rng.uniform_int(candidates.size())];
    mask_node(input, vocab, n, rng, plan);
  }
  return plan;
}

std::vector<int> apply_mask_plan(const std::vector<int>& ids, const MaskPlan& plan) {
  std::vector<int> out = ids;
  for (const auto& t : plan.tokens) out[t.position] = t.replacement_id;
  return out;
}

std::vector<double> sinusoidal_position(std::size_t k, std::size_t d) {
  if (d % 2 != 0) throw Error("sinusoidal_position: dimension must be even");
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d / 2; ++i) {
    const double rate = std::pow(10000.0, 2.0 * static_cast<double>(i) /
                                              static_cast<double>(d));
    v[2 * i] = std::sin(static_cast<double>(k) / rate);
    v[2 * i + 1] = std::cos(static_cast<double>(k) / rate);
  }
  return v;
}

Tensor build_positional_table(std::size_t max_positions, std::size_t d) {
  std::vector<double> values;
  values.reserve(max_positions * d);
  for (std::size_t k = 0; k < max_positions; ++k) {
    const auto row = sinusoidal_position(k, d);
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor::from_values({max_positions, d}, std::move(values));  // fixed
}

std::vector<std::pair<std::string, Tensor>> WcmHead::named(
    const std::string& prefix) const {
  return {{prefix + "w1", w1}, {prefix + "b1", b1}, {prefix + "w2", w2}, {prefix + "b2", b2}};
}

std::vector<std::pair<std::string, Tensor>> NpoHead::named(
    const std::string& prefix) const {
  return {{prefix + "w1", w1}, {prefix + "b1", b1}, {prefix + "w2", w2},
          {prefix + "b2", b2}, {prefix + "w3", w3}, {prefix + "b3", b3}};
}

std::vector<std::pair<std::string, Tensor>> PretrainHeads::named() const {
  auto out = wcm.named("wcm/");
  for (auto& p : npo.named("npo/")) out.push_back(std::move(p));
  return out;
}

void PretrainHeads::zero_grad() {
  for (auto& [name, t] : named()) {
    (void)name;
    t.zero_grad();
  }
}

PretrainHeads init_pretrain_heads(const ModelDims& dims, std::size_t vocab_size,
                                  InitScheme scheme, Rng& rng,
                                  std::size_t max_positions) {
  PretrainHeads heads;
  heads.wcm.w1 = init_weight(2 * dims.hidden, dims.wcm_hidden, scheme, rng);
  heads.wcm.b1 = Tensor::zeros({1, dims.wcm_hidden}, true);
  heads.wcm.w2 = init_weight(dims.wcm_hidden, vocab_size, scheme, rng);
  heads.wcm.b2 = Tensor::zeros({1, vocab_size}, true);

  heads.npo.positional = build_positional_table(max_positions, dims.d);
  heads.npo.w1 = init_weight(dims.g + dims.d, dims.npo_hidden, scheme, rng);
  heads.npo.b1 = Tensor::zeros({1, dims.npo_hidden}, true);
  heads.npo.w2 = init_weight(dims.npo_hidden, dims.npo_hidden, scheme, rng);
  heads.npo.b2 = Tensor::zeros({1, dims.npo_hidden}, true);
  heads.npo.w3 = init_weight(dims.npo_hidden, vocab_size, scheme, rng);
  heads.npo.b3 = Tensor::zeros({1, vocab_size}, true);
  return heads;
}

Tensor wcm_logits(Tape& tape, const Tensor& states, std::size_t position,
                  const MaskPlan& plan, const WcmHead& head, double dropout_p,
                  bool train_mode, Rng& rng) {
  if (!plan.position_masked(position))
    throw Error("wcm_logits: position " + std::to_string(position) +
                " is not masked; the loss is defined only on masked tokens");
  Tensor e_m = tape.select_row(states, position);
  Tensor h = tape.relu(tape.add(tape.matmul(e_m, head.w1), head.b1));
  h = tape.dropout(h, dropout_p, train_mode, rng);
  return tape.add(tape.matmul(h, head.w2), head.b2);
}

Tensor npo_logits(Tape& tape, const Tensor& l2, const CompiledExample& ex,
                  std::size_t node, std::size_t offset, const NpoHead& head,
                  double dropout_p, bool train_mode, Rng& rng) {
  const auto& adjacent = ex.neighbors.at(node);
  if (adjacent.empty()) throw NoNeighbors(node);
  Tensor pooled = tape.mean_pool_rows_subset(l2, adjacent);
  const std::size_t k = std::min(offset, head.positional.rows() - 1);
  Tensor pos = tape.select_row(head.positional, k);
  Tensor r = tape.concat_cols({pooled, pos});
  Tensor h = tape.relu(tape.add(tape.matmul(r, head.w1), head.b1));
  h = tape.dropout(h, dropout_p, train_mode, rng);
  h = tape.relu(tape.add(tape.matmul(h, head.w2), head.b2));
  h = tape.dropout(h, dropout_p, train_mode, rng);
  return tape.add(tape.matmul(h, head.w3), head.b3);
}

Tensor pretrain_loss(Tape& tape, const Model& model, const PretrainHeads& heads,
                     const CompiledExample& ex, const MaskPlan& plan,
                     const std::set<Objective>& objectives, bool train_mode, Rng& rng) {
  if (plan.empty()) throw Error("pretrain_loss: empty mask plan");
  if (objectives.empty()) throw Error("pretrain_loss: no objectives enabled");

  const std::vector<int> masked_ids = apply_mask_plan(ex.input.ids, plan);
  const ModelConfig& cfg = model.config();

  Tensor emb = tape.embedding_rows(model.encoder().embedding, masked_ids);
  Tensor states = bilstm_states(tape, emb, model.encoder());

  Tensor l2;
  if (objectives.count(Objective::npo)) {
    Tensor l0 = init_nodes_from_states(tape, states, ex.input, model.encoder(),
                                       cfg.dropout, train_mode, rng);
    l2 = gcn_forward(tape, l0, ex.a_hat, model.gcn(), cfg.dropout, train_mode, rng);
  }

  std::vector<Tensor> wcm_terms;
  std::vector<Tensor> npo_terms;
  for (const MaskedToken& t : plan.tokens) {
    const auto target = static_cast<std::size_t>(t.original_id);
    if (objectives.count(Objective::wcm)) {
      Tensor logits =
          wcm_logits(tape, states, t.position, plan, heads.wcm, cfg.dropout, train_mode, rng);
      wcm_terms.push_back(tape.softmax_cross_entropy(logits, target));
    }
    if (objectives.count(Objective::npo)) {
      Tensor logits = npo_logits(tape, l2, ex, t.node, t.offset, heads.npo, cfg.dropout,
                                 train_mode, rng);
      npo_terms.push_back(tape.softmax_cross_entropy(logits, target));
    }
  }

  const double inv = 1.0 / static_cast<double>(plan.tokens.size());
  std::vector<Tensor> parts;
  if (!wcm_terms.empty()) parts.push_back(tape.scale(tape.add_n(wcm_terms), inv));
  if (!npo_terms.empty()) parts.push_back(tape.scale(tape.add_n(npo_terms), inv));
  return parts.size() == 1 ? parts.front() : tape.add_n(parts);
}

}  // namespace tabgraph
