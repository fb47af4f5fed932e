#include "tabgraph/model.hpp"

#include <algorithm>

#include "tabgraph/errors.hpp"

namespace tabgraph {

namespace {

Tensor classify(Tape& tape, const Tensor& pooled, const ClassifierParams& params,
                double dropout_p, bool train_mode, Rng& rng) {
  Tensor h = tape.relu(tape.add(tape.matmul(pooled, params.w1), params.b1));
  h = tape.dropout(h, dropout_p, train_mode, rng);
  return tape.sigmoid(tape.add(tape.matmul(h, params.w2), params.b2));
}

}  // namespace

std::vector<std::pair<std::string, Tensor>> GcnParams::named(
    const std::string& prefix) const {
  return {{prefix + "w0", w0}, {prefix + "w1", w1}};
}

std::vector<std::pair<std::string, Tensor>> ClassifierParams::named(
    const std::string& prefix) const {
  return {{prefix + "w1", w1}, {prefix + "b1", b1}, {prefix + "w2", w2}, {prefix + "b2", b2}};
}

Model::Model(Vocab vocab, ModelConfig config, std::uint64_t seed)
    : vocab_(std::move(vocab)), config_(std::move(config)) {
  Rng rng(seed, 7001);
  encoder_ = init_encoder_params(config_.dims.encoder(), vocab_.size(), config_.init, rng);

  // GCN consumes node vectors (d), or raw span-averaged embeddings (d_e)
  // when the BiLSTM is ablated.
  const std::size_t gcn_in = config_.use_bilstm ? config_.dims.d : config_.dims.d_e;
  gcn_.w0 = init_weight(gcn_in, config_.dims.g, config_.init, rng);
  gcn_.w1 = init_weight(config_.dims.g, config_.dims.g, config_.init, rng);

  const std::size_t clf_in = config_.use_gcn ? config_.dims.g : config_.dims.d_e;
  classifier_.w1 = init_weight(clf_in, config_.dims.clf_hidden, config_.init, rng);
  classifier_.b1 = Tensor::zeros({1, config_.dims.clf_hidden}, true);
  classifier_.w2 = init_weight(config_.dims.clf_hidden, 1, config_.init, rng);
  classifier_.b2 = Tensor::zeros({1, 1}, true);
}

std::vector<std::pair<std::string, Tensor>> Model::named_params() const {
  auto out = encoder_.named("encoder/");
  for (auto& p : gcn_.named("gcn/")) out.push_back(std::move(p));
  for (auto& p : classifier_.named("clf/")) out.push_back(std::move(p));
  return out;
}

void Model::zero_grad() {
  for (auto& [name, t] : named_params()) {
    (void)name;
    t.zero_grad();
  }
}

void prepare_example(SemiTable& t) {
  t.validate();
  if (t.kind == TableKind::table) {
    if (!t.column_roles.has_value()) t.column_roles = classify_columns(t).roles;
  } else if (!t.column_roles.has_value()) {
    t.column_roles = std::vector<ColumnRole>(t.cols(), ColumnRole::attribute);
  }
}

CompiledExample Model::compile(const LabeledExample& ex) const {
  SemiTable t = ex.example;
  prepare_example(t);

  CompiledExample out;
  out.input = encode_input(ex.query, t, vocab_);
  Graph graph = build_graph(ex.query, t, config_.graph_options);
  std::vector<TypedEdge> edges = graph.edges;
  if (!config_.removed_edges.empty())
    edges = ablate_edges(edges, config_.removed_edges, &out.query_isolated);

  out.node_kinds.reserve(graph.nodes.size());
  for (const auto& n : graph.nodes) out.node_kinds.push_back(n.kind);

  out.neighbors.assign(graph.num_nodes(), {});
  for (const auto& e : edges) {
    out.neighbors[e.a].push_back(e.b);
    out.neighbors[e.b].push_back(e.a);
  }
  for (auto& adj : out.neighbors) std::sort(adj.begin(), adj.end());

  GraphMatrices m = normalized_adjacency(graph.num_nodes(), edges);
  out.a_hat = Tensor::from_values({m.k, m.k}, std::move(m.normalized));
  out.label = ex.label;
  out.labeled = ex.labeled;

  if (out.input.num_nodes() != graph.num_nodes())
    throw Error("compile: encoder and graph disagree on node count");
  return out;
}

std::vector<CompiledExample> Model::compile_dataset(
    const std::vector<LabeledExample>& data) const {
  std::vector<CompiledExample> out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(compile(ex));
  return out;
}

Tensor Model::node_init(Tape& tape, const CompiledExample& ex, bool train_mode,
                        Rng& rng) const {
  Tensor emb = tape.embedding_rows(encoder_.embedding, ex.input.ids);
  if (config_.use_bilstm)
    return init_nodes(tape, emb, ex.input, encoder_, config_.dropout, train_mode, rng);
  return init_nodes_avg(tape, emb, ex.input);
}

Tensor Model::forward_score(Tape& tape, const CompiledExample& ex, bool train_mode,
                            Rng& rng) const {
  if (config_.use_gcn) {
    Tensor l0 = node_init(tape, ex, train_mode, rng);
    Tensor l2 = gcn_forward(tape, l0, ex.a_hat, gcn_, config_.dropout, train_mode, rng);
    return predict_score(tape, l2, classifier_, config_.dropout, train_mode, rng);
  }
  // GCN ablation: classify the mean of the raw token embeddings
  Tensor emb = tape.embedding_rows(encoder_.embedding, ex.input.ids);
  Tensor pooled = tape.mean_pool_rows(emb);
  return classify(tape, pooled, classifier_, config_.dropout, train_mode, rng);
}

void Model::load_params(const std::map<std::string, Tensor>& params) {
  for (auto& [name, tensor] : named_params()) {
    auto it = params.find(name);
    if (it == params.end()) throw CheckpointError("checkpoint missing tensor " + name);
    if (it->second.shape() != tensor.shape())
      throw CheckpointError("checkpoint shape mismatch for " + name);
    tensor.values() = it->second.values();
    tensor.zero_grad();
  }
}

std::size_t Model::load_overlapping(const std::map<std::string, Tensor>& params) {
  std::size_t loaded = 0;
  for (auto& [name, tensor] : named_params()) {
    auto it = params.find(name);
    if (it == params.end()) continue;
    if (it->second.shape() != tensor.shape())
      throw CheckpointError("checkpoint shape mismatch for " + name);
    tensor.values() = it->second.values();
    tensor.zero_grad();
    ++loaded;
  }
  return loaded;
}

void Model::save(const std::string& path) const { save_checkpoint(path, named_params()); }

Tensor gcn_forward(Tape& tape, const Tensor& l0, const Tensor& a_hat,
                   const GcnParams& params, double dropout_p, bool train_mode, Rng& rng) {
  Tensor l1 = tape.relu(tape.matmul(a_hat, tape.matmul(l0, params.w0)));
  l1 = tape.dropout(l1, dropout_p, train_mode, rng);
  return tape.relu(tape.matmul(a_hat, tape.matmul(l1, params.w1)));
}

Tensor predict_score(Tape& tape, const Tensor& l2, const ClassifierParams& params,
                     double dropout_p, bool train_mode, Rng& rng) {
  Tensor pooled = tape.mean_pool_rows(l2);
  return classify(tape, pooled, params, dropout_p, train_mode, rng);
}

Tensor supervised_loss(Tape& tape, const Tensor& score, int label) {
  return tape.binary_cross_entropy(score, label);
}

}  // namespace tabgraph
