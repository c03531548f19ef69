#include "mrgnn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrgnn/errors.hpp"

namespace mrgnn {

namespace {

constexpr double kProbFloor = 1e-12;

Tape& same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid()) throw ValidationError(std::string(op) + ": invalid Var");
  if (&a.tape() != &b.tape()) {
    throw ValidationError(std::string(op) + ": operands live on different tapes");
  }
  return a.tape();
}

}  // namespace

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }

Var Tape::leaf(Tensor value) {
  bool rg = value.requires_grad;
  return leaf(std::move(value), rg);
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  bool tracked = requires_grad && options_.recording;
  return Var(this, emplace(std::move(value), {}, tracked, nullptr));
}

int Tape::emplace(Tensor value, std::vector<int> inputs, bool tracked, PullFn pull) {
  if (options_.check_finite) value.ensure_finite("tape node " + std::to_string(nodes_.size()));
  Node node;
  if (tracked && options_.recording) {
    node.grad = Tensor(value.rows(), value.cols());
  } else {
    tracked = false;
  }
  node.value = std::move(value);
  node.inputs = std::move(inputs);
  node.tracked = tracked;
  if (tracked) node.pull = std::move(pull);
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

const Tensor& Tape::grad(int id) const {
  if (!backward_done_) throw ValidationError("gradient requested before backward()");
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.tracked) throw ValidationError("gradient requested for untracked node");
  return n.grad;
}

void Tape::backward(Var loss) {
  if (!options_.recording) throw ValidationError("backward() on a non-recording tape");
  if (backward_done_) throw ValidationError("backward() already ran on this tape");
  if (!loss.valid() || &loss.tape() != this) {
    throw ValidationError("backward(): loss is not on this tape");
  }
  Node& top = nodes_[static_cast<std::size_t>(loss.id())];
  if (top.value.size() != 1) {
    throw ShapeError("backward(): loss must be scalar, got " + top.value.shape_str());
  }
  if (!top.tracked) {
    throw ValidationError("backward(): loss does not depend on any tracked leaf");
  }
  backward_done_ = true;
  top.grad[0] = 1.0;
  // Exact reverse recording order; node inputs always precede the node, so a
  // single backwards sweep is a valid topological visit.
  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.tracked && n.pull) n.pull(*this);
  }
}

// ---- op helpers ------------------------------------------------------------

namespace {

bool tracked_any(Tape& t, const std::vector<Var>& xs) {
  for (const Var& v : xs) {
    if (t.tracked(v.id())) return true;
  }
  return false;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  Tensor c = matmul_values(a.value(), b.value());
  bool tracked = t.recording() && (t.tracked(a.id()) || t.tracked(b.id()));
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ia = a.id(), ib = b.id(), out_id](Tape& tp) {
      const Tensor& dc = tp.grad_buffer(out_id);
      if (tp.tracked(ia)) add_matmul_nt(tp.grad_buffer(ia), dc, tp.value(ib));
      if (tp.tracked(ib)) add_matmul_tn(tp.grad_buffer(ib), tp.value(ia), dc);
    };
  }
  return Var(&t, t.emplace(std::move(c), {a.id(), b.id()}, tracked, std::move(pull)));
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  Tensor c = add_values(a.value(), b.value());
  bool tracked = t.recording() && (t.tracked(a.id()) || t.tracked(b.id()));
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ia = a.id(), ib = b.id(), out_id](Tape& tp) {
      const Tensor& dc = tp.grad_buffer(out_id);
      if (tp.tracked(ia)) add_in_place(tp.grad_buffer(ia), dc);
      if (tp.tracked(ib)) add_in_place(tp.grad_buffer(ib), dc);
    };
  }
  return Var(&t, t.emplace(std::move(c), {a.id(), b.id()}, tracked, std::move(pull)));
}

Var add_all(const std::vector<Var>& xs) {
  if (xs.empty()) throw ValidationError("add_all: empty term list");
  Tape& t = xs.front().tape();
  Tensor acc = xs.front().value();
  std::vector<int> inputs;
  inputs.reserve(xs.size());
  inputs.push_back(xs.front().id());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    same_tape(xs.front(), xs[i], "add_all");
    add_in_place(acc, xs[i].value());
    inputs.push_back(xs[i].id());
  }
  bool tracked = t.recording() && tracked_any(t, xs);
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ins = inputs, out_id](Tape& tp) {
      const Tensor& dc = tp.grad_buffer(out_id);
      for (int id : ins) {
        if (tp.tracked(id)) add_in_place(tp.grad_buffer(id), dc);
      }
    };
  }
  return Var(&t, t.emplace(std::move(acc), std::move(inputs), tracked, std::move(pull)));
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b, "mul");
  Tensor c = mul_values(a.value(), b.value());
  bool tracked = t.recording() && (t.tracked(a.id()) || t.tracked(b.id()));
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ia = a.id(), ib = b.id(), out_id](Tape& tp) {
      const Tensor& dc = tp.grad_buffer(out_id);
      if (tp.tracked(ia)) {
        Tensor& da = tp.grad_buffer(ia);
        const Tensor& bv = tp.value(ib);
        for (std::int64_t i = 0; i < dc.size(); ++i) da[i] += dc[i] * bv[i];
      }
      if (tp.tracked(ib)) {
        Tensor& db = tp.grad_buffer(ib);
        const Tensor& av = tp.value(ia);
        for (std::int64_t i = 0; i < dc.size(); ++i) db[i] += dc[i] * av[i];
      }
    };
  }
  return Var(&t, t.emplace(std::move(c), {a.id(), b.id()}, tracked, std::move(pull)));
}

namespace {

template <typename Fwd, typename DFromY>
Var unary_elementwise(Var x, Fwd fwd, DFromY d_from_y, const char* /*name*/) {
  Tape& t = x.tape();
  const Tensor& in = x.value();
  Tensor out(in.rows(), in.cols());
  for (std::int64_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  bool tracked = t.recording() && t.tracked(x.id());
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ix = x.id(), out_id, d_from_y](Tape& tp) {
      const Tensor& y = tp.value(out_id);
      const Tensor& dy = tp.grad_buffer(out_id);
      Tensor& dx = tp.grad_buffer(ix);
      for (std::int64_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * d_from_y(y[i]);
    };
  }
  return Var(&t, t.emplace(std::move(out), {x.id()}, tracked, std::move(pull)));
}

}  // namespace

Var tanh(Var x) {
  return unary_elementwise(
      x, [](double v) { return std::tanh(v); }, [](double y) { return 1.0 - y * y; }, "tanh");
}

Var sigmoid(Var x) {
  return unary_elementwise(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double y) { return y * (1.0 - y); }, "sigmoid");
}

Var relu(Var x) {
  // d/dx at exactly 0 is taken as 0.
  return unary_elementwise(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double y) { return y > 0.0 ? 1.0 : 0.0; }, "relu");
}

Var softmax_rows(Var x) {
  Tape& t = x.tape();
  const Tensor& in = x.value();
  Tensor out(in.rows(), in.cols());
  for (int r = 0; r < in.rows(); ++r) {
    double mx = in.at(r, 0);
    for (int c = 1; c < in.cols(); ++c) mx = std::max(mx, in.at(r, c));
    double denom = 0.0;
    for (int c = 0; c < in.cols(); ++c) {
      double e = std::exp(in.at(r, c) - mx);
      out.at(r, c) = e;
      denom += e;
    }
    for (int c = 0; c < in.cols(); ++c) out.at(r, c) /= denom;
  }
  bool tracked = t.recording() && t.tracked(x.id());
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ix = x.id(), out_id](Tape& tp) {
      const Tensor& y = tp.value(out_id);
      const Tensor& dy = tp.grad_buffer(out_id);
      Tensor& dx = tp.grad_buffer(ix);
      // dx_j = y_j * (dy_j - sum_k dy_k y_k), rowwise
      for (int r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (int c = 0; c < y.cols(); ++c) dot += dy.at(r, c) * y.at(r, c);
        for (int c = 0; c < y.cols(); ++c) {
          dx.at(r, c) += y.at(r, c) * (dy.at(r, c) - dot);
        }
      }
    };
  }
  return Var(&t, t.emplace(std::move(out), {x.id()}, tracked, std::move(pull)));
}

Var max_all(const std::vector<Var>& xs) {
  if (xs.empty()) throw ValidationError("max_all: empty term list");
  Tape& t = xs.front().tape();
  const Tensor& first = xs.front().value();
  for (const Var& v : xs) {
    same_tape(xs.front(), v, "max_all");
    if (!v.value().same_shape(first)) {
      throw ShapeError("max_all: shape mismatch " + first.shape_str() + " vs " +
                       v.value().shape_str());
    }
  }
  Tensor out = first;
  // Winner = first index (in list order) attaining the max; ties stay with
  // the earliest term so gradient routing is deterministic.
  std::vector<int> winner(static_cast<std::size_t>(out.size()), 0);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const Tensor& v = xs[k].value();
    for (std::int64_t i = 0; i < out.size(); ++i) {
      if (v[i] > out[i]) {
        out[i] = v[i];
        winner[static_cast<std::size_t>(i)] = static_cast<int>(k);
      }
    }
  }
  std::vector<int> inputs;
  inputs.reserve(xs.size());
  for (const Var& v : xs) inputs.push_back(v.id());
  bool tracked = t.recording() && tracked_any(t, xs);
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ins = inputs, win = std::move(winner), out_id](Tape& tp) {
      const Tensor& dy = tp.grad_buffer(out_id);
      for (std::int64_t i = 0; i < dy.size(); ++i) {
        int src = ins[static_cast<std::size_t>(win[static_cast<std::size_t>(i)])];
        if (tp.tracked(src)) tp.grad_buffer(src)[i] += dy[i];
      }
    };
  }
  return Var(&t, t.emplace(std::move(out), std::move(inputs), tracked, std::move(pull)));
}

Var concat_row(const std::vector<Var>& xs) {
  if (xs.empty()) throw ValidationError("concat_row: empty term list");
  Tape& t = xs.front().tape();
  std::vector<double> flat;
  std::vector<int> inputs;
  std::vector<int> offsets;
  int offset = 0;
  for (const Var& v : xs) {
    same_tape(xs.front(), v, "concat_row");
    const Tensor& val = v.value();
    if (val.rows() != 1) {
      throw ShapeError("concat_row: every piece must be a single row, got " + val.shape_str());
    }
    offsets.push_back(offset);
    offset += val.cols();
    flat.insert(flat.end(), val.values().begin(), val.values().end());
    inputs.push_back(v.id());
  }
  Tensor out(1, offset, std::move(flat));
  bool tracked = t.recording() && tracked_any(t, xs);
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ins = inputs, offs = std::move(offsets), out_id](Tape& tp) {
      const Tensor& dy = tp.grad_buffer(out_id);
      for (std::size_t k = 0; k < ins.size(); ++k) {
        if (!tp.tracked(ins[k])) continue;
        Tensor& dx = tp.grad_buffer(ins[k]);
        for (std::int64_t i = 0; i < dx.size(); ++i) dx[i] += dy[offs[k] + i];
      }
    };
  }
  return Var(&t, t.emplace(std::move(out), std::move(inputs), tracked, std::move(pull)));
}

Var sum_all(Var x) {
  Tape& t = x.tape();
  const Tensor& in = x.value();
  double s = 0.0;
  for (std::int64_t i = 0; i < in.size(); ++i) s += in[i];
  bool tracked = t.recording() && t.tracked(x.id());
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ix = x.id(), out_id](Tape& tp) {
      double dy = tp.grad_buffer(out_id)[0];
      Tensor& dx = tp.grad_buffer(ix);
      for (std::int64_t i = 0; i < dx.size(); ++i) dx[i] += dy;
    };
  }
  return Var(&t, t.emplace(Tensor::scalar(s), {x.id()}, tracked, std::move(pull)));
}

Var cross_entropy(Var probs, const Tensor& target) {
  Tape& t = probs.tape();
  const Tensor& p = probs.value();
  if (!p.same_shape(target)) {
    throw ShapeError("cross_entropy: probs " + p.shape_str() + " vs target " +
                     target.shape_str());
  }
  int ones = 0;
  for (std::int64_t i = 0; i < target.size(); ++i) {
    if (target[i] == 1.0) {
      ++ones;
    } else if (target[i] != 0.0) {
      throw ValidationError("cross_entropy: target entries must be 0 or 1");
    }
  }
  if (ones != 1) throw ValidationError("cross_entropy: target must be one-hot");
  double loss = 0.0;
  for (std::int64_t i = 0; i < p.size(); ++i) {
    if (target[i] == 1.0) {
      loss -= std::log(std::clamp(p[i], kProbFloor, 1.0));
    }
  }
  bool tracked = t.recording() && t.tracked(probs.id());
  Tape::PullFn pull;
  int out_id = t.node_count();
  if (tracked) {
    pull = [ip = probs.id(), tgt = target, out_id](Tape& tp) {
      double dy = tp.grad_buffer(out_id)[0];
      const Tensor& pv = tp.value(ip);
      Tensor& dp = tp.grad_buffer(ip);
      for (std::int64_t i = 0; i < pv.size(); ++i) {
        if (tgt[i] != 1.0) continue;
        // Clamp is flat outside [floor, 1]; inside, d(-log p) = -1/p.
        if (pv[i] >= kProbFloor && pv[i] <= 1.0) dp[i] += dy * (-1.0 / pv[i]);
      }
    };
  }
  return Var(&t, t.emplace(Tensor::scalar(loss), {probs.id()}, tracked, std::move(pull)));
}

}  // namespace mrgnn
