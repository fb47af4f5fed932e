#pragma once

#include <set>
#include <string>
#include <vector>

#include "tabgraph/dataset.hpp"
#include "tabgraph/encoder.hpp"
#include "tabgraph/graph.hpp"
#include "tabgraph/tensor.hpp"

namespace tabgraph {

struct ModelDims {
  std::size_t d_e = 64;
  std::size_t hidden = 64;      // LSTM units per direction
  std::size_t mlp_hidden = 64;  // span MLP hidden
  std::size_t d = 64;           // node width
  std::size_t g = 128;          // GCN hidden size (2d)
  std::size_t clf_hidden = 64;
  std::size_t wcm_hidden = 64;
  std::size_t npo_hidden = 64;

  EncoderDims encoder() const { return {d_e, hidden, mlp_hidden, d}; }
};

struct GcnParams {
  Tensor w0;  // in x g
  Tensor w1;  // g x g
  std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

struct ClassifierParams {
  Tensor w1, b1;  // in x hidden
  Tensor w2, b2;  // hidden x 1
  std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

struct ModelConfig {
  ModelDims dims;
  double dropout = 0.5;
  bool use_bilstm = true;
  bool use_gcn = true;
  std::set<EdgeKind> removed_edges;
  GraphOptions graph_options;
  InitScheme init = InitScheme::glorot;
};

// Everything about an example that does not depend on parameters: the token
// sequence, the graph with its normalized adjacency, and per-node neighbor
// lists. Computed once per dataset, reused every epoch.
struct CompiledExample {
  TokenizedInput input;
  std::vector<NodeKind> node_kinds;
  std::vector<std::vector<std::size_t>> neighbors;
  Tensor a_hat;  // K x K constant
  int label = 0;
  bool labeled = true;
  bool query_isolated = false;
};

// Two GCN layers over the renormalized adjacency followed by a mean-pool MLP
// scorer. Parameters are shared between pre-training and fine-tuning.
class Model {
 public:
  Model(Vocab vocab, ModelConfig config, std::uint64_t seed);

  const Vocab& vocab() const { return vocab_; }
  const ModelConfig& config() const { return config_; }

  const EncoderParams& encoder() const { return encoder_; }
  const GcnParams& gcn() const { return gcn_; }
  const ClassifierParams& classifier() const { return classifier_; }

  std::vector<std::pair<std::string, Tensor>> named_params() const;
  void zero_grad();

  CompiledExample compile(const LabeledExample& ex) const;
  std::vector<CompiledExample> compile_dataset(const std::vector<LabeledExample>& data) const;

  // L0 (node init, K x d) for a compiled example
  Tensor node_init(Tape& tape, const CompiledExample& ex, bool train_mode, Rng& rng) const;

  // match score y in (0, 1), shape 1x1
  Tensor forward_score(Tape& tape, const CompiledExample& ex, bool train_mode,
                       Rng& rng) const;

  // copy parameter values from a checkpoint map; all names must be present
  void load_params(const std::map<std::string, Tensor>& params);
  // copy values for names that exist in the map (pre-trained encoder + GCN)
  std::size_t load_overlapping(const std::map<std::string, Tensor>& params);

  void save(const std::string& path) const;

 private:
  Vocab vocab_;
  ModelConfig config_;
  EncoderParams encoder_;
  GcnParams gcn_;
  ClassifierParams classifier_;
};

// L2 = ReLU(A^ . ReLU(A^ . L0 . W0) . W1) with dropout between the layers
Tensor gcn_forward(Tape& tape, const Tensor& l0, const Tensor& a_hat,
                   const GcnParams& params, double dropout_p, bool train_mode, Rng& rng);

// y = sigmoid(MLP(mean over node rows))
Tensor predict_score(Tape& tape, const Tensor& l2, const ClassifierParams& params,
                     double dropout_p, bool train_mode, Rng& rng);

// binary cross-entropy against a 0/1 label
Tensor supervised_loss(Tape& tape, const Tensor& score, int label);

// assigns column roles when missing; call before compiling tables
void prepare_example(SemiTable& t);

}  // namespace tabgraph
