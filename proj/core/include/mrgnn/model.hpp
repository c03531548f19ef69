#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrgnn/autodiff.hpp"
#include "mrgnn/featurize.hpp"
#include "mrgnn/graph.hpp"
#include "mrgnn/parameter_store.hpp"
#include "mrgnn/tensor.hpp"

namespace mrgnn {

// Which submodules participate in the forward pass. Disabling one also drops
// its parameters, and the readout concatenation narrows to match:
//   full model      : [summary_x, pooled_x, summary_y, pooled_y, pair_state]
//   no pair LSTM    : [summary_x, pooled_x, summary_y, pooled_y]
//   no summary LSTM : [pooled_x, pooled_y, pair_state]
//   neither LSTM    : [pooled_x, pooled_y]
struct AblationFlags {
  bool use_summary_lstm = true;   // per-graph LSTM over the gather sequence
  bool use_pair_lstm = true;      // LSTM over both graphs' gather sequences
  bool weighted_conv = true;      // separate self/neighbor weights + bias
};

struct ModelConfig {
  int feature_dim = 75;                         // input feature width per atom
  std::vector<int> conv_widths = {384, 384, 384};
  int gather_width = 128;                       // graph-state width, also LSTM width
  int hidden_width = 64;                        // readout hidden layer
  int num_labels = 2;
  int degree_cap = 10;                          // buckets 0..cap for degree-indexed weights
  AblationFlags ablation;
  bool conv_activation = true;                  // tanh after each conv; false = linear conv

  int conv_layer_count() const { return static_cast<int>(conv_widths.size()); }
  int bucket_count() const { return degree_cap + 1; }
  int final_conv_width() const { return conv_widths.back(); }
  // Width of the concatenated readout input under the active ablation.
  int head_input_width() const;
  // Throws ConfigError on non-positive widths, empty conv stack, bad labels.
  void check() const;
};

// Intermediate values of one paired forward pass, copied off the tape.
// node_features[t] is the m x width matrix after conv+pool layer t, with
// node_features[0] the raw input features.
struct GraphTrace {
  std::vector<Tensor> node_features;
  std::vector<Tensor> graph_states;    // gather outputs, one per conv depth + input
  std::vector<Tensor> summary_states;  // summary LSTM hidden states, oldest first
  Tensor pooled;                       // columnwise max over final node features
  Tensor readout;                      // [summary, pooled] (or pooled alone)
};

struct ForwardTrace {
  GraphTrace x;
  GraphTrace y;
  std::vector<Tensor> pair_states;     // pair LSTM hidden states, oldest first
  Tensor interaction;                  // concatenated readout input
  Tensor logits;
  Tensor probabilities;
};

struct ForwardResult {
  ForwardTrace trace;
  Var logits;
  Var probabilities;
  StagedParams params;  // staged copies used by this pass, for gradients
};

struct GraphInput {
  const MolecularGraph* graph = nullptr;
  const Tensor* features = nullptr;  // atom_count x feature_dim
};

// Siamese pair model: one shared stack of degree-indexed conv layers, gather
// layers and a summary LSTM applied to both graphs, a pair LSTM over the two
// gather sequences, and a two-layer softmax readout.
class MrGnnModel {
 public:
  MrGnnModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }
  int head_input_width() const { return config_.head_input_width(); }

  // Runs the pair through the network on `tape`. Order matters: (x, y) and
  // (y, x) produce different distributions because the pair LSTM and readout
  // see the graphs in a fixed order.
  ForwardResult forward(Tape& tape, const GraphInput& x, const GraphInput& y) const;

 private:
  ModelConfig config_;
  ParameterStore params_;
};

// ---- layer building blocks (exposed for direct testing) --------------------

// Per-bucket staged weights of one conv layer. `neighbor_weight` and `bias`
// stay empty for the unweighted variant.
struct ConvLayerVars {
  std::vector<Var> self_weight;
  std::vector<Var> neighbor_weight;
  std::vector<Var> bias;
};

struct GatherLayerVars {
  std::vector<Var> weight;
  std::vector<Var> bias;
};

struct LstmVars {
  Var w_x_input, w_h_input, b_input;
  Var w_x_forget, w_h_forget, b_forget;
  Var w_x_output, w_h_output, b_output;
  Var w_x_cell, w_h_cell, b_cell;
};

// One row per node. Each node i with degree bucket d computes
//   act(f_i * self[d] + (sum of neighbor rows) * neighbor[d] + bias[d]).
std::vector<Var> weighted_graph_conv(const ConvLayerVars& layer,
                                     const std::vector<Var>& node_rows,
                                     const MolecularGraph& graph, int degree_cap,
                                     bool apply_activation);

// Shared-weight variant: both the node row and the neighbor sum go through
// self_weight[d]; no bias, always tanh. Matches weighted_graph_conv exactly
// when self and neighbor weights coincide and the bias is zero.
std::vector<Var> standard_graph_conv(const ConvLayerVars& layer,
                                     const std::vector<Var>& node_rows,
                                     const MolecularGraph& graph, int degree_cap);

// Elementwise max over each node's closed neighborhood {i} + N(i).
std::vector<Var> neighborhood_max_pool(const std::vector<Var>& node_rows,
                                       const MolecularGraph& graph);

// Graph state: sum over nodes of f_i * weight[bucket(i)] + bias[bucket(i)].
// The bias enters once per node.
Var graph_gather(const GatherLayerVars& layer, const std::vector<Var>& node_rows,
                 const MolecularGraph& graph, int degree_cap);

// One LSTM step; returns (hidden, cell).
std::pair<Var, Var> lstm_step(const LstmVars& cell, Var hidden, Var cell_state, Var input);

// Runs the cell over `inputs` from an all-zero state; returns every hidden
// state, oldest first (size == inputs.size()).
std::vector<Var> lstm_unroll(Tape& tape, const LstmVars& cell, int width,
                             const std::vector<Var>& inputs);

// Columnwise max over all node rows.
Var global_max_pool(const std::vector<Var>& node_rows);

// Staging helpers shared by the model and the tests.
ConvLayerVars stage_conv_layer(const StagedParams& params, int layer, int buckets,
                               bool weighted);
GatherLayerVars stage_gather_layer(const StagedParams& params, int layer, int buckets);
LstmVars stage_lstm(const StagedParams& params, const std::string& prefix);

// Parameter names, shared by construction, staging and the checkpoint codec.
std::string conv_param_name(int layer, const char* role, int bucket);
std::string gather_param_name(int layer, const char* role, int bucket);
std::string lstm_param_name(const std::string& prefix, const char* gate, const char* role);

}  // namespace mrgnn
