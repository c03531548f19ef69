#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrgnn/dataset.hpp"
#include "mrgnn/metrics.hpp"
#include "mrgnn/model.hpp"
#include "mrgnn/parameter_store.hpp"
#include "mrgnn/tensor.hpp"

namespace mrgnn {

enum class SplitMode {
  TenthTestFifthVal,  // test = floor(q/10); val = floor(rest/5); train = rest
  Fractions602020,
  Custom,
};

struct SplitSpec {
  SplitMode mode = SplitMode::TenthTestFifthVal;
  // Used by Custom only; must be positive and sum to 1.
  double train_frac = 0.0;
  double val_frac = 0.0;
  double test_frac = 0.0;
  std::uint64_t seed = 0;
};

struct IndexSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Disjoint, exhaustive, deterministic per seed. Throws ConfigError when any
// part would come out empty.
IndexSplit split_indices(int count, const SplitSpec& spec);

struct DatasetSplit {
  LabeledPairDataset train;
  LabeledPairDataset val;
  LabeledPairDataset test;
};

DatasetSplit split_dataset(const LabeledPairDataset& data, const SplitSpec& spec);

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int patience = 10;  // early-stop epochs without validation improvement
  SplitSpec split;

  void check() const;  // throws ConfigError
};

// Adaptive-moment optimizer over a parameter store. Moments live here, in
// store order; apply() expects gradients in that same order.
class AdamOptimizer {
 public:
  AdamOptimizer(ParameterStore& params, const TrainConfig& config);

  void apply(const std::vector<std::pair<std::string, Tensor>>& gradients);
  std::int64_t step_count() const { return step_; }

 private:
  ParameterStore& params_;
  double lr_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::int64_t step_ = 0;
  std::vector<Tensor> first_moment_;
  std::vector<Tensor> second_moment_;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  bool has_val = false;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

// One JSON object per line, keys {epoch, train_loss, val_loss, val_accuracy};
// the val fields are null when there was no validation set.
std::string epoch_logs_to_jsonl(std::span<const EpochLog> logs);

struct TrainResult {
  std::vector<EpochLog> epochs;
  int best_epoch = 0;        // epoch whose parameters the model ends up with
  double best_val_loss = 0.0;
  bool early_stopped = false;
};

// Minibatch training: per-epoch seeded shuffle, per-sample tapes accumulated
// into batch-mean gradients (fixed summation order), one optimizer step per
// batch. With a validation set, early-stops after `patience` stale epochs and
// restores the best-validation-loss parameters; without one it keeps the
// final parameters. A non-finite loss aborts with NumericError naming the
// offending pair index.
TrainResult train_model(MrGnnModel& model, const PreparedDataset& data,
                        std::span<const int> train_pairs, std::span<const int> val_pairs,
                        const TrainConfig& config);

struct EvalResult {
  double mean_loss = 0.0;
  Tensor scores;                 // pair count x num_labels probabilities
  std::vector<int> predictions;  // argmax, first index on ties
  std::vector<int> labels;
  MetricsReport report;
};

// Pure: parameters are read, never written. Runs on non-recording tapes.
EvalResult evaluate_model(const MrGnnModel& model, const PreparedDataset& data,
                          std::span<const int> pair_indices);

// Forward for one pair of already-featurized graphs; returns probabilities.
Tensor predict_pair(const MrGnnModel& model, const MolecularGraph& a, const Tensor& fa,
                    const MolecularGraph& b, const Tensor& fb);

}  // namespace mrgnn
