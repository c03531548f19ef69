#include "mrgnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "mrgnn/autodiff.hpp"
#include "mrgnn/errors.hpp"
#include "mrgnn/rng.hpp"

namespace mrgnn {

namespace {

std::vector<int> shuffled_indices(int count, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(count));
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  return idx;
}

Tensor one_hot(int label, int k) {
  Tensor t(1, k);
  t.at(0, label) = 1.0;
  return t;
}

int argmax_row(const Tensor& row) {
  int best = 0;
  for (int c = 1; c < row.cols(); ++c) {
    if (row.at(0, c) > row.at(0, best)) best = c;
  }
  return best;
}

void check_pair_indices(const PreparedDataset& data, std::span<const int> pairs,
                        const char* what) {
  for (int p : pairs) {
    if (p < 0 || p >= static_cast<int>(data.pairs.size())) {
      throw ValidationError(std::string(what) + ": pair index " + std::to_string(p) +
                            " outside 0.." + std::to_string(data.pairs.size() - 1));
    }
  }
}

// Forward pass plus loss for one pair on the caller's tape.
struct SampleLoss {
  Var loss;
  Var probabilities;
  StagedParams params;
};

SampleLoss pair_loss(const MrGnnModel& model, const PreparedDataset& data,
                     const PreparedPair& pair, Tape& tape) {
  GraphInput a{&data.graphs[static_cast<std::size_t>(pair.graph_a)],
               &data.features[static_cast<std::size_t>(pair.graph_a)]};
  GraphInput b{&data.graphs[static_cast<std::size_t>(pair.graph_b)],
               &data.features[static_cast<std::size_t>(pair.graph_b)]};
  ForwardResult fwd = model.forward(tape, a, b);
  Var loss = cross_entropy(fwd.probabilities, one_hot(pair.label, model.config().num_labels));
  return {loss, fwd.probabilities, std::move(fwd.params)};
}

// Mean loss and accuracy without recording (validation between epochs).
std::pair<double, double> quick_eval(const MrGnnModel& model, const PreparedDataset& data,
                                     std::span<const int> pairs) {
  double loss_sum = 0.0;
  std::int64_t correct = 0;
  for (int p : pairs) {
    const PreparedPair& pair = data.pairs[static_cast<std::size_t>(p)];
    Tape tape(TapeOptions{.recording = false});
    SampleLoss sample = pair_loss(model, data, pair, tape);
    loss_sum += sample.loss.value()[0];
    if (argmax_row(sample.probabilities.value()) == pair.label) ++correct;
  }
  double n = static_cast<double>(pairs.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

}  // namespace

IndexSplit split_indices(int count, const SplitSpec& spec) {
  if (count < 2) throw ConfigError("split: need at least 2 records, got " + std::to_string(count));

  int n_test = 0;
  int n_val = 0;
  switch (spec.mode) {
    case SplitMode::TenthTestFifthVal:
      n_test = count / 10;
      n_val = (count - n_test) / 5;
      break;
    case SplitMode::Fractions602020:
      n_test = count / 5;
      n_val = count / 5;
      break;
    case SplitMode::Custom: {
      double sum = spec.train_frac + spec.val_frac + spec.test_frac;
      if (spec.train_frac <= 0 || spec.val_frac <= 0 || spec.test_frac <= 0 ||
          std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split: custom fractions must be positive and sum to 1");
      }
      // The nudge keeps exact products like 0.2 * 35 from flooring short.
      n_test = static_cast<int>(count * spec.test_frac + 1e-9);
      n_val = static_cast<int>(count * spec.val_frac + 1e-9);
      break;
    }
  }
  int n_train = count - n_test - n_val;
  if (n_test < 1 || n_val < 1 || n_train < 1) {
    throw ConfigError("split: " + std::to_string(count) +
                      " records leave an empty part (train " + std::to_string(n_train) +
                      ", val " + std::to_string(n_val) + ", test " + std::to_string(n_test) +
                      ")");
  }

  Rng rng(mix_seed(spec.seed, 0x59117));
  std::vector<int> order = shuffled_indices(count, rng);
  IndexSplit split;
  split.test.assign(order.begin(), order.begin() + n_test);
  split.val.assign(order.begin() + n_test, order.begin() + n_test + n_val);
  split.train.assign(order.begin() + n_test + n_val, order.end());
  return split;
}

DatasetSplit split_dataset(const LabeledPairDataset& data, const SplitSpec& spec) {
  IndexSplit idx = split_indices(static_cast<int>(data.records.size()), spec);
  auto take = [&](const std::vector<int>& indices) {
    LabeledPairDataset part;
    part.num_labels = data.num_labels;
    part.label_names = data.label_names;
    part.provenance = data.provenance;
    part.records.reserve(indices.size());
    for (int i : indices) part.records.push_back(data.records[static_cast<std::size_t>(i)]);
    return part;
  };
  return {take(idx.train), take(idx.val), take(idx.test)};
}

void TrainConfig::check() const {
  // Zero is allowed: it freezes parameters, which the purity tests rely on.
  if (!(learning_rate >= 0)) throw ConfigError("train: learning_rate must be non-negative");
  if (epochs < 1) throw ConfigError("train: epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw ConfigError("train: moment decays must lie in [0,1)");
  }
  if (!(epsilon > 0)) throw ConfigError("train: epsilon must be positive");
  if (patience < 1) throw ConfigError("train: patience must be at least 1");
}

AdamOptimizer::AdamOptimizer(ParameterStore& params, const TrainConfig& config)
    : params_(params),
      lr_(config.learning_rate),
      beta1_(config.beta1),
      beta2_(config.beta2),
      epsilon_(config.epsilon) {
  first_moment_.reserve(params.count());
  second_moment_.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    const Tensor& t = params.tensor_at(i);
    first_moment_.emplace_back(t.rows(), t.cols());
    second_moment_.emplace_back(t.rows(), t.cols());
  }
}

void AdamOptimizer::apply(const std::vector<std::pair<std::string, Tensor>>& gradients) {
  if (gradients.size() != params_.count()) {
    throw ValidationError("optimizer: got " + std::to_string(gradients.size()) +
                          " gradients for " + std::to_string(params_.count()) +
                          " parameters");
  }
  ++step_;
  double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t i = 0; i < gradients.size(); ++i) {
    const auto& [name, grad] = gradients[i];
    if (name != params_.name_at(i)) {
      throw ValidationError("optimizer: gradient " + std::to_string(i) + " is for " + name +
                            ", expected " + params_.name_at(i));
    }
    Tensor& param = params_.tensor_at(i);
    if (!param.same_shape(grad)) {
      throw ShapeError("optimizer: gradient for " + name + " is " + grad.shape_str() +
                       ", parameter is " + param.shape_str());
    }
    Tensor& m = first_moment_[i];
    Tensor& v = second_moment_[i];
    for (std::int64_t j = 0; j < param.size(); ++j) {
      double g = grad[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      double m_hat = m[j] / bias1;
      double v_hat = v[j] / bias2;
      param[j] -= lr_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  }
}

std::string epoch_logs_to_jsonl(std::span<const EpochLog> logs) {
  std::string out;
  for (const EpochLog& log : logs) {
    nlohmann::json j;
    j["epoch"] = log.epoch;
    j["train_loss"] = log.train_loss;
    if (log.has_val) {
      j["val_loss"] = log.val_loss;
      j["val_accuracy"] = log.val_accuracy;
    } else {
      j["val_loss"] = nullptr;
      j["val_accuracy"] = nullptr;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

TrainResult train_model(MrGnnModel& model, const PreparedDataset& data,
                        std::span<const int> train_pairs, std::span<const int> val_pairs,
                        const TrainConfig& config) {
  config.check();
  if (train_pairs.empty()) throw ValidationError("train: empty training set");
  check_pair_indices(data, train_pairs, "train");
  check_pair_indices(data, val_pairs, "val");
  if (data.num_labels != model.config().num_labels) {
    throw ConfigError("train: dataset has " + std::to_string(data.num_labels) +
                      " labels but the model expects " +
                      std::to_string(model.config().num_labels));
  }

  ParameterStore& params = model.parameters();
  AdamOptimizer optimizer(params, config);
  Rng shuffle_rng(mix_seed(config.seed, 0xe60c));

  auto snapshot = [&] {
    std::vector<Tensor> copy;
    copy.reserve(params.count());
    for (std::size_t i = 0; i < params.count(); ++i) copy.push_back(params.tensor_at(i));
    return copy;
  };
  auto restore = [&](const std::vector<Tensor>& copy) {
    for (std::size_t i = 0; i < params.count(); ++i) {
      bool track = params.tensor_at(i).requires_grad;
      params.tensor_at(i) = copy[i];
      params.tensor_at(i).requires_grad = track;
    }
  };

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_params = snapshot();
  int stale_epochs = 0;

  std::vector<int> order(train_pairs.begin(), train_pairs.end());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);

    double epoch_loss_sum = 0.0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      std::size_t batch_end =
          std::min(cursor + static_cast<std::size_t>(config.batch_size), order.size());
      std::vector<std::pair<std::string, Tensor>> batch_grads;
      for (std::size_t s = cursor; s < batch_end; ++s) {
        const PreparedPair& pair = data.pairs[static_cast<std::size_t>(order[s])];
        Tape tape;
        SampleLoss sample = pair_loss(model, data, pair, tape);
        double loss = sample.loss.value()[0];
        if (!std::isfinite(loss)) {
          throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                             ", pair index " + std::to_string(order[s]));
        }
        epoch_loss_sum += loss;
        tape.backward(sample.loss);
        auto grads = collect_gradients(tape, sample.params);
        if (batch_grads.empty()) {
          batch_grads = std::move(grads);
        } else {
          for (std::size_t i = 0; i < batch_grads.size(); ++i) {
            add_in_place(batch_grads[i].second, grads[i].second);
          }
        }
      }
      double scale = 1.0 / static_cast<double>(batch_end - cursor);
      for (auto& [name, grad] : batch_grads) {
        for (std::int64_t j = 0; j < grad.size(); ++j) grad[j] *= scale;
      }
      optimizer.apply(batch_grads);
      cursor = batch_end;
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = epoch_loss_sum / static_cast<double>(order.size());
    if (!val_pairs.empty()) {
      auto [val_loss, val_acc] = quick_eval(model, data, val_pairs);
      log.has_val = true;
      log.val_loss = val_loss;
      log.val_accuracy = val_acc;
      if (val_loss < result.best_val_loss) {
        result.best_val_loss = val_loss;
        result.best_epoch = epoch;
        best_params = snapshot();
        stale_epochs = 0;
      } else {
        ++stale_epochs;
      }
    }
    result.epochs.push_back(log);

    if (!val_pairs.empty() && stale_epochs >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }

  if (!val_pairs.empty()) {
    restore(best_params);
  } else {
    result.best_epoch = static_cast<int>(result.epochs.size());
    result.best_val_loss = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

EvalResult evaluate_model(const MrGnnModel& model, const PreparedDataset& data,
                          std::span<const int> pair_indices) {
  if (pair_indices.empty()) throw ValidationError("evaluate: empty pair set");
  check_pair_indices(data, pair_indices, "evaluate");

  int k = model.config().num_labels;
  EvalResult result;
  result.scores = Tensor(static_cast<int>(pair_indices.size()), k);
  result.predictions.reserve(pair_indices.size());
  result.labels.reserve(pair_indices.size());

  double loss_sum = 0.0;
  for (std::size_t row = 0; row < pair_indices.size(); ++row) {
    const PreparedPair& pair = data.pairs[static_cast<std::size_t>(pair_indices[row])];
    Tape tape(TapeOptions{.recording = false});
    SampleLoss sample = pair_loss(model, data, pair, tape);
    loss_sum += sample.loss.value()[0];
    const Tensor& probs = sample.probabilities.value();
    for (int c = 0; c < k; ++c) result.scores.at(static_cast<int>(row), c) = probs.at(0, c);
    result.predictions.push_back(argmax_row(probs));
    result.labels.push_back(pair.label);
  }
  result.mean_loss = loss_sum / static_cast<double>(pair_indices.size());

  if (k == 2) {
    std::vector<double> positive(pair_indices.size());
    for (std::size_t i = 0; i < pair_indices.size(); ++i) {
      positive[i] = result.scores.at(static_cast<int>(i), 1);
    }
    result.report = evaluate_binary(positive, result.predictions, result.labels);
  } else {
    result.report = evaluate_multiclass(result.scores, result.predictions, result.labels, k);
  }
  return result;
}

Tensor predict_pair(const MrGnnModel& model, const MolecularGraph& a, const Tensor& fa,
                    const MolecularGraph& b, const Tensor& fb) {
  Tape tape(TapeOptions{.recording = false});
  ForwardResult fwd = model.forward(tape, GraphInput{&a, &fa}, GraphInput{&b, &fb});
  return fwd.probabilities.value();
}

}  // namespace mrgnn
