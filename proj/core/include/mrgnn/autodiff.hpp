#pragma once

#include <functional>
#include <vector>

#include "mrgnn/tensor.hpp"

namespace mrgnn {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid for the tape's lifetime.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape& tape() const { return *tape_; }

  const Tensor& value() const;
  const Tensor& grad() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

struct TapeOptions {
  // When false the tape evaluates values only: no gradient buffers, no
  // backward rules. Finite-difference probes run in this mode.
  bool recording = true;
  // Validate every node value for NaN/Inf on creation (slow; tests only).
  bool check_finite = false;
};

// Define-by-run computation record. A tape is built fresh for every forward
// pass and supports exactly one backward() sweep, which replays the recorded
// operations in exact reverse order. Not thread-safe; confine one tape to one
// thread.
class Tape {
 public:
  explicit Tape(TapeOptions options = {}) : options_(options) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return options_.recording; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  // Copies `value` onto the tape. Gradients flow into the leaf only when
  // requested here (or via tensor.requires_grad) and the tape is recording.
  Var leaf(Tensor value);
  Var leaf(Tensor value, bool requires_grad);

  const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  // Gradient of the most recent backward() target w.r.t. node `id`.
  // Throws if backward has not run or the node is not tracked.
  const Tensor& grad(int id) const;
  bool tracked(int id) const { return nodes_[static_cast<std::size_t>(id)].tracked; }
  const std::vector<int>& inputs_of(int id) const {
    return nodes_[static_cast<std::size_t>(id)].inputs;
  }

  // Seeds d(loss)/d(loss) = 1 and pulls gradients back through every recorded
  // operation, newest first. `loss` must be scalar. One shot per tape.
  void backward(Var loss);
  bool backward_done() const { return backward_done_; }

  // --- used by the op implementations ---
  using PullFn = std::function<void(Tape&)>;
  int emplace(Tensor value, std::vector<int> inputs, bool tracked, PullFn pull);
  Tensor& grad_buffer(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated only when tracked on a recording tape
    std::vector<int> inputs;
    PullFn pull;  // empty for leaves
    bool tracked = false;
  };

  TapeOptions options_;
  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// ---- operations -----------------------------------------------------------
// Each op validates shapes eagerly, computes the value, and (on a recording
// tape, when any input is tracked) registers the matching backward rule.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
// n-ary elementwise sum; accumulates left to right. Requires >= 1 term.
Var add_all(const std::vector<Var>& xs);
Var mul(Var a, Var b);  // elementwise
Var tanh(Var x);
Var sigmoid(Var x);
Var relu(Var x);
// Numerically stable softmax applied independently to every row.
Var softmax_rows(Var x);
// Elementwise maximum across same-shaped tensors. Gradient flows to the first
// argument (in list order) attaining the maximum at each coordinate.
Var max_all(const std::vector<Var>& xs);
// Concatenate single-row tensors left to right into one row.
Var concat_row(const std::vector<Var>& xs);
Var sum_all(Var x);  // scalar sum of all entries
// -sum(target * log(probs)), probs clamped to [1e-12, 1]. `target` must be a
// one-hot row matching probs' shape.
Var cross_entropy(Var probs, const Tensor& target);

}  // namespace mrgnn
