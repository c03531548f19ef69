#include "mrgnn/model.hpp"

#include <cmath>
#include <sstream>

#include "mrgnn/errors.hpp"
#include "mrgnn/rng.hpp"

namespace mrgnn {

namespace {

constexpr const char* kGates[] = {"input", "forget", "output", "cell"};

double glorot_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (static_cast<double>(fan_in) + static_cast<double>(fan_out)));
}

Tensor stack_rows(const std::vector<Var>& rows) {
  std::vector<std::vector<double>> values;
  values.reserve(rows.size());
  for (const Var& r : rows) {
    const Tensor& v = r.value();
    values.emplace_back(v.values().begin(), v.values().end());
  }
  return Tensor::from_rows(values);
}

}  // namespace

std::string conv_param_name(int layer, const char* role, int bucket) {
  std::ostringstream os;
  os << "conv." << layer << '.' << role << '.' << bucket;
  return os.str();
}

std::string gather_param_name(int layer, const char* role, int bucket) {
  std::ostringstream os;
  os << "gather." << layer << '.' << role << '.' << bucket;
  return os.str();
}

std::string lstm_param_name(const std::string& prefix, const char* gate, const char* role) {
  return prefix + "." + gate + "." + role;
}

int ModelConfig::head_input_width() const {
  int readout = final_conv_width() + (ablation.use_summary_lstm ? gather_width : 0);
  int width = 2 * readout;
  if (ablation.use_pair_lstm) width += 2 * gather_width;
  return width;
}

void ModelConfig::check() const {
  if (feature_dim <= 0) throw ConfigError("model: feature_dim must be positive");
  if (conv_widths.empty()) throw ConfigError("model: at least one conv layer is required");
  for (int w : conv_widths) {
    if (w <= 0) throw ConfigError("model: conv widths must be positive");
  }
  if (gather_width <= 0) throw ConfigError("model: gather_width must be positive");
  if (hidden_width <= 0) throw ConfigError("model: hidden_width must be positive");
  if (num_labels < 2) throw ConfigError("model: num_labels must be at least 2");
  if (degree_cap < 0) throw ConfigError("model: degree_cap must be non-negative");
}

MrGnnModel::MrGnnModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.check();
  Rng rng(seed);
  const int buckets = config_.bucket_count();
  const bool gathers_needed =
      config_.ablation.use_summary_lstm || config_.ablation.use_pair_lstm;

  auto glorot = [&rng](int rows, int cols) {
    return Tensor::uniform(rows, cols, glorot_limit(rows, cols), rng);
  };

  int in_width = config_.feature_dim;
  for (int t = 0; t < config_.conv_layer_count(); ++t) {
    int out_width = config_.conv_widths[static_cast<std::size_t>(t)];
    for (int d = 0; d < buckets; ++d) {
      params_.create(conv_param_name(t, "self", d), glorot(in_width, out_width));
    }
    if (config_.ablation.weighted_conv) {
      for (int d = 0; d < buckets; ++d) {
        params_.create(conv_param_name(t, "neighbor", d), glorot(in_width, out_width));
      }
      for (int d = 0; d < buckets; ++d) {
        params_.create(conv_param_name(t, "bias", d), Tensor(1, out_width));
      }
    }
    in_width = out_width;
  }

  if (gathers_needed) {
    int width = config_.feature_dim;
    for (int t = 0; t <= config_.conv_layer_count(); ++t) {
      for (int d = 0; d < buckets; ++d) {
        params_.create(gather_param_name(t, "weight", d), glorot(width, config_.gather_width));
      }
      for (int d = 0; d < buckets; ++d) {
        params_.create(gather_param_name(t, "bias", d), Tensor(1, config_.gather_width));
      }
      if (t < config_.conv_layer_count()) {
        width = config_.conv_widths[static_cast<std::size_t>(t)];
      }
    }
  }

  auto create_lstm = [&](const std::string& prefix, int input_width, int width) {
    for (const char* gate : kGates) {
      params_.create(lstm_param_name(prefix, gate, "x"), glorot(input_width, width));
      params_.create(lstm_param_name(prefix, gate, "h"), glorot(width, width));
      // Forget gate bias starts at 1 so early training does not flush state.
      Tensor bias(1, width);
      if (std::string(gate) == "forget") bias.fill(1.0);
      params_.create(lstm_param_name(prefix, gate, "b"), std::move(bias));
    }
  };

  if (config_.ablation.use_summary_lstm) {
    create_lstm("summary_lstm", config_.gather_width, config_.gather_width);
  }
  if (config_.ablation.use_pair_lstm) {
    create_lstm("pair_lstm", 2 * config_.gather_width, 2 * config_.gather_width);
  }

  const int head_in = config_.head_input_width();
  params_.create("head.w1", glorot(head_in, config_.hidden_width));
  params_.create("head.b1", Tensor(1, config_.hidden_width));
  params_.create("head.w2", glorot(config_.hidden_width, config_.num_labels));
  params_.create("head.b2", Tensor(1, config_.num_labels));

  // Wiring self-check: the readout must consume exactly the concatenation the
  // forward pass produces.
  if (params_.get("head.w1").rows() != head_in) {
    throw ConfigError("model: readout width mismatch at construction");
  }
}

ConvLayerVars stage_conv_layer(const StagedParams& params, int layer, int buckets,
                               bool weighted) {
  ConvLayerVars vars;
  for (int d = 0; d < buckets; ++d) {
    vars.self_weight.push_back(params[conv_param_name(layer, "self", d)]);
  }
  if (weighted) {
    for (int d = 0; d < buckets; ++d) {
      vars.neighbor_weight.push_back(params[conv_param_name(layer, "neighbor", d)]);
    }
    for (int d = 0; d < buckets; ++d) {
      vars.bias.push_back(params[conv_param_name(layer, "bias", d)]);
    }
  }
  return vars;
}

GatherLayerVars stage_gather_layer(const StagedParams& params, int layer, int buckets) {
  GatherLayerVars vars;
  for (int d = 0; d < buckets; ++d) {
    vars.weight.push_back(params[gather_param_name(layer, "weight", d)]);
  }
  for (int d = 0; d < buckets; ++d) {
    vars.bias.push_back(params[gather_param_name(layer, "bias", d)]);
  }
  return vars;
}

LstmVars stage_lstm(const StagedParams& params, const std::string& prefix) {
  LstmVars v;
  v.w_x_input = params[lstm_param_name(prefix, "input", "x")];
  v.w_h_input = params[lstm_param_name(prefix, "input", "h")];
  v.b_input = params[lstm_param_name(prefix, "input", "b")];
  v.w_x_forget = params[lstm_param_name(prefix, "forget", "x")];
  v.w_h_forget = params[lstm_param_name(prefix, "forget", "h")];
  v.b_forget = params[lstm_param_name(prefix, "forget", "b")];
  v.w_x_output = params[lstm_param_name(prefix, "output", "x")];
  v.w_h_output = params[lstm_param_name(prefix, "output", "h")];
  v.b_output = params[lstm_param_name(prefix, "output", "b")];
  v.w_x_cell = params[lstm_param_name(prefix, "cell", "x")];
  v.w_h_cell = params[lstm_param_name(prefix, "cell", "h")];
  v.b_cell = params[lstm_param_name(prefix, "cell", "b")];
  return v;
}

namespace {

// Sum of a node's neighbor rows in adjacency (ascending index) order, or an
// invalid Var for isolated nodes.
Var neighbor_sum(const std::vector<Var>& node_rows, const MolecularGraph& graph, int node) {
  const auto& nbrs = graph.neighbors(node);
  if (nbrs.empty()) return Var();
  std::vector<Var> terms;
  terms.reserve(nbrs.size());
  for (int j : nbrs) terms.push_back(node_rows[static_cast<std::size_t>(j)]);
  return add_all(terms);
}

void check_rows(const std::vector<Var>& node_rows, const MolecularGraph& graph,
                const char* op) {
  if (static_cast<int>(node_rows.size()) != graph.atom_count()) {
    throw ShapeError(std::string(op) + ": got " + std::to_string(node_rows.size()) +
                     " rows for " + std::to_string(graph.atom_count()) + " atoms");
  }
}

}  // namespace

std::vector<Var> weighted_graph_conv(const ConvLayerVars& layer,
                                     const std::vector<Var>& node_rows,
                                     const MolecularGraph& graph, int degree_cap,
                                     bool apply_activation) {
  check_rows(node_rows, graph, "weighted_graph_conv");
  std::vector<Var> out;
  out.reserve(node_rows.size());
  for (int i = 0; i < graph.atom_count(); ++i) {
    int d = degree_bucket(graph.degree(i), degree_cap);
    std::vector<Var> terms;
    terms.push_back(matmul(node_rows[static_cast<std::size_t>(i)],
                           layer.self_weight[static_cast<std::size_t>(d)]));
    if (Var nb = neighbor_sum(node_rows, graph, i); nb.valid()) {
      terms.push_back(matmul(nb, layer.neighbor_weight[static_cast<std::size_t>(d)]));
    }
    terms.push_back(layer.bias[static_cast<std::size_t>(d)]);
    Var row = add_all(terms);
    out.push_back(apply_activation ? tanh(row) : row);
  }
  return out;
}

std::vector<Var> standard_graph_conv(const ConvLayerVars& layer,
                                     const std::vector<Var>& node_rows,
                                     const MolecularGraph& graph, int degree_cap) {
  check_rows(node_rows, graph, "standard_graph_conv");
  std::vector<Var> out;
  out.reserve(node_rows.size());
  for (int i = 0; i < graph.atom_count(); ++i) {
    int d = degree_bucket(graph.degree(i), degree_cap);
    const Var& w = layer.self_weight[static_cast<std::size_t>(d)];
    std::vector<Var> terms;
    terms.push_back(matmul(node_rows[static_cast<std::size_t>(i)], w));
    if (Var nb = neighbor_sum(node_rows, graph, i); nb.valid()) {
      terms.push_back(matmul(nb, w));
    }
    out.push_back(tanh(add_all(terms)));
  }
  return out;
}

std::vector<Var> neighborhood_max_pool(const std::vector<Var>& node_rows,
                                       const MolecularGraph& graph) {
  check_rows(node_rows, graph, "neighborhood_max_pool");
  std::vector<Var> out;
  out.reserve(node_rows.size());
  for (int i = 0; i < graph.atom_count(); ++i) {
    // Own row first: on ties the gradient stays with the node itself.
    std::vector<Var> group;
    group.push_back(node_rows[static_cast<std::size_t>(i)]);
    for (int j : graph.neighbors(i)) group.push_back(node_rows[static_cast<std::size_t>(j)]);
    out.push_back(max_all(group));
  }
  return out;
}

Var graph_gather(const GatherLayerVars& layer, const std::vector<Var>& node_rows,
                 const MolecularGraph& graph, int degree_cap) {
  check_rows(node_rows, graph, "graph_gather");
  std::vector<Var> terms;
  terms.reserve(node_rows.size());
  for (int i = 0; i < graph.atom_count(); ++i) {
    int d = degree_bucket(graph.degree(i), degree_cap);
    Var projected = matmul(node_rows[static_cast<std::size_t>(i)],
                           layer.weight[static_cast<std::size_t>(d)]);
    terms.push_back(add(projected, layer.bias[static_cast<std::size_t>(d)]));
  }
  return add_all(terms);
}

std::pair<Var, Var> lstm_step(const LstmVars& cell, Var hidden, Var cell_state, Var input) {
  auto gate = [&](Var wx, Var wh, Var b) {
    return add_all({matmul(input, wx), matmul(hidden, wh), b});
  };
  Var in_gate = sigmoid(gate(cell.w_x_input, cell.w_h_input, cell.b_input));
  Var forget_gate = sigmoid(gate(cell.w_x_forget, cell.w_h_forget, cell.b_forget));
  Var out_gate = sigmoid(gate(cell.w_x_output, cell.w_h_output, cell.b_output));
  Var candidate = tanh(gate(cell.w_x_cell, cell.w_h_cell, cell.b_cell));
  Var next_cell = add(mul(forget_gate, cell_state), mul(in_gate, candidate));
  Var next_hidden = mul(out_gate, tanh(next_cell));
  return {next_hidden, next_cell};
}

std::vector<Var> lstm_unroll(Tape& tape, const LstmVars& cell, int width,
                             const std::vector<Var>& inputs) {
  Var hidden = tape.leaf(Tensor(1, width), false);
  Var state = tape.leaf(Tensor(1, width), false);
  std::vector<Var> hiddens;
  hiddens.reserve(inputs.size());
  for (const Var& x : inputs) {
    auto [h, c] = lstm_step(cell, hidden, state, x);
    hidden = h;
    state = c;
    hiddens.push_back(h);
  }
  return hiddens;
}

Var global_max_pool(const std::vector<Var>& node_rows) {
  if (node_rows.empty()) throw ValidationError("global_max_pool: no rows");
  return max_all(node_rows);
}

namespace {

struct GraphSide {
  std::vector<std::vector<Var>> node_rows;  // per depth, starting at the input
  std::vector<Var> graph_states;
  std::vector<Var> summary_states;
  Var pooled;
  Var readout;
};

}  // namespace

ForwardResult MrGnnModel::forward(Tape& tape, const GraphInput& x, const GraphInput& y) const {
  auto check_input = [&](const GraphInput& in, const char* which) {
    if (in.graph == nullptr || in.features == nullptr) {
      throw ValidationError(std::string("forward: missing ") + which + " input");
    }
    if (in.features->rows() != in.graph->atom_count() ||
        in.features->cols() != config_.feature_dim) {
      std::ostringstream os;
      os << "forward: " << which << " features are " << in.features->shape_str()
         << ", expected " << in.graph->atom_count() << "x" << config_.feature_dim;
      throw ShapeError(os.str());
    }
  };
  check_input(x, "first");
  check_input(y, "second");

  StagedParams staged(tape, params_);
  const int buckets = config_.bucket_count();
  const int depth = config_.conv_layer_count();
  const bool gathers_needed =
      config_.ablation.use_summary_lstm || config_.ablation.use_pair_lstm;

  std::vector<ConvLayerVars> conv_layers;
  for (int t = 0; t < depth; ++t) {
    conv_layers.push_back(
        stage_conv_layer(staged, t, buckets, config_.ablation.weighted_conv));
  }
  std::vector<GatherLayerVars> gather_layers;
  if (gathers_needed) {
    for (int t = 0; t <= depth; ++t) {
      gather_layers.push_back(stage_gather_layer(staged, t, buckets));
    }
  }

  auto run_side = [&](const GraphInput& in) {
    GraphSide side;
    const MolecularGraph& graph = *in.graph;
    std::vector<Var> rows;
    rows.reserve(static_cast<std::size_t>(graph.atom_count()));
    for (int i = 0; i < graph.atom_count(); ++i) {
      std::vector<double> row(in.features->data() + static_cast<std::size_t>(i) *
                                                        config_.feature_dim,
                              in.features->data() +
                                  static_cast<std::size_t>(i + 1) * config_.feature_dim);
      rows.push_back(tape.leaf(Tensor::row(std::move(row)), false));
    }
    side.node_rows.push_back(rows);
    if (gathers_needed) {
      side.graph_states.push_back(
          graph_gather(gather_layers[0], rows, graph, config_.degree_cap));
    }
    for (int t = 0; t < depth; ++t) {
      std::vector<Var> convolved =
          config_.ablation.weighted_conv
              ? weighted_graph_conv(conv_layers[static_cast<std::size_t>(t)], rows, graph,
                                    config_.degree_cap, config_.conv_activation)
              : standard_graph_conv(conv_layers[static_cast<std::size_t>(t)], rows, graph,
                                    config_.degree_cap);
      rows = neighborhood_max_pool(convolved, graph);
      side.node_rows.push_back(rows);
      if (gathers_needed) {
        side.graph_states.push_back(graph_gather(
            gather_layers[static_cast<std::size_t>(t + 1)], rows, graph, config_.degree_cap));
      }
    }
    side.pooled = global_max_pool(rows);
    if (config_.ablation.use_summary_lstm) {
      LstmVars cell = stage_lstm(staged, "summary_lstm");
      side.summary_states =
          lstm_unroll(tape, cell, config_.gather_width, side.graph_states);
      side.readout = concat_row({side.summary_states.back(), side.pooled});
    } else {
      side.readout = side.pooled;
    }
    return side;
  };

  GraphSide side_x = run_side(x);
  GraphSide side_y = run_side(y);

  std::vector<Var> pair_states;
  if (config_.ablation.use_pair_lstm) {
    LstmVars cell = stage_lstm(staged, "pair_lstm");
    std::vector<Var> joint;
    joint.reserve(side_x.graph_states.size());
    for (std::size_t t = 0; t < side_x.graph_states.size(); ++t) {
      joint.push_back(concat_row({side_x.graph_states[t], side_y.graph_states[t]}));
    }
    pair_states = lstm_unroll(tape, cell, 2 * config_.gather_width, joint);
  }

  std::vector<Var> pieces{side_x.readout, side_y.readout};
  if (config_.ablation.use_pair_lstm) pieces.push_back(pair_states.back());
  Var interaction = concat_row(pieces);

  if (interaction.value().cols() != config_.head_input_width()) {
    throw ShapeError("forward: readout input is " + interaction.value().shape_str() +
                     ", expected width " + std::to_string(config_.head_input_width()));
  }

  Var hidden = relu(add(matmul(interaction, staged["head.w1"]), staged["head.b1"]));
  Var logits = add(matmul(hidden, staged["head.w2"]), staged["head.b2"]);
  Var probabilities = softmax_rows(logits);

  ForwardResult result{ForwardTrace{}, logits, probabilities, std::move(staged)};
  auto fill_side = [](const GraphSide& side, GraphTrace& trace) {
    for (const auto& rows : side.node_rows) trace.node_features.push_back(stack_rows(rows));
    for (const Var& g : side.graph_states) trace.graph_states.push_back(g.value());
    for (const Var& s : side.summary_states) trace.summary_states.push_back(s.value());
    trace.pooled = side.pooled.value();
    trace.readout = side.readout.value();
  };
  fill_side(side_x, result.trace.x);
  fill_side(side_y, result.trace.y);
  for (const Var& h : pair_states) result.trace.pair_states.push_back(h.value());
  result.trace.interaction = interaction.value();
  result.trace.logits = logits.value();
  result.trace.probabilities = probabilities.value();
  return result;
}

}  // namespace mrgnn
