#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tabgraph/model.hpp"
#include "tabgraph/pretrain.hpp"
#include "tabgraph/synth.hpp"

namespace tabgraph {

struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  double precision() const {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  double recall() const {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(const std::vector<double>& xs);  // population std

// Serializable run configuration. File format: flat "key=value" lines,
// '#' comments. Unknown keys are errors.
struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 8;
  std::size_t epochs = 10;
  double dropout = 0.5;
  std::uint64_t seed = 1;
  ModelDims dims;
  InitScheme init = InitScheme::glorot;
  bool use_bilstm = true;
  bool use_gcn = true;
  std::set<EdgeKind> removed_edges;
  bool cell_cell_excludes_subject = false;
  std::set<Objective> objectives = {Objective::wcm, Objective::npo};
  std::size_t pretrain_epochs = 4;
  double mask_rate = 0.15;
  std::size_t min_count = 1;
  double threshold = 0.5;

  // hyperparameters reported for the original large-scale setup; not the
  // default because 2e-5 SGD cannot move a small from-scratch model
  static TrainConfig paper_preset();

  ModelConfig model_config() const;
  void apply(const std::string& key, const std::string& value);
  void save(const std::string& path) const;
  static TrainConfig from_file(const std::string& path);
};

struct Split {
  std::vector<LabeledExample> train, valid, test;
};

// 80/10/10 with floor sizes; deterministic shuffle per seed. |data| >= 10.
Split split_dataset(const std::vector<LabeledExample>& data, std::uint64_t seed);

Metrics evaluate(const Model& model, const std::vector<CompiledExample>& data,
                 double threshold = 0.5);
Metrics evaluate_dataset(const Model& model, const std::vector<LabeledExample>& data,
                         double threshold = 0.5);

double score_example(const Model& model, const LabeledExample& ex);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  Metrics valid;
};

struct TrainResult {
  std::size_t best_epoch = 0;
  double best_valid_f1 = 0.0;
  std::vector<EpochRecord> history;
};

// Mini-batch SGD with per-epoch validation; the model is left holding the
// parameters of the best validation epoch (ties keep the earliest).
TrainResult train_supervised(Model& model, const std::vector<LabeledExample>& train_data,
                             const std::vector<LabeledExample>& valid_data,
                             const TrainConfig& cfg);

struct PretrainResult {
  std::vector<double> epoch_losses;
};

PretrainResult pretrain_run(Model& model, PretrainHeads& heads,
                            const std::vector<LabeledExample>& corpus,
                            const TrainConfig& cfg);

// model tensors at `path` (heads included when given), vocabulary at
// path.vocab, architecture at path.meta.json
void save_model_files(const Model& model, const PretrainHeads* heads,
                      const TrainConfig& cfg, const std::string& path);

struct LoadedModel {
  Model model;
  TrainConfig config;
};
LoadedModel load_model_files(const std::string& path);

struct SeedResult {
  std::uint64_t seed = 0;
  Metrics test;
};

struct AblationRow {
  std::string variant;
  std::vector<SeedResult> runs;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
};

// Trains and evaluates the ablation grid: full model, each edge kind
// removed, average-pooled node init instead of the BiLSTM, no GCN, and no
// pre-training. List data skips the header/subject rows. When a pre-trained
// checkpoint is given every variant except "wo_pretrain" starts from it.
std::vector<AblationRow> run_ablation(const TrainConfig& cfg,
                                      const std::vector<LabeledExample>& data,
                                      std::size_t num_seeds = 3,
                                      const std::string& pretrained_path = {});

std::string ablation_to_json(const std::vector<AblationRow>& rows);
std::string metrics_to_json(const std::string& variant, std::uint64_t seed,
                            const Metrics& m);

const char* objective_name(Objective o);
Objective objective_from_name(const std::string& name);

}  // namespace tabgraph
