// Release gate: one line per criterion, PASS or FAIL, exit 1 on any failure.
// Tolerances and budgets live next to each criterion so a red line can be
// read without digging through the suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mrgnn/checkpoint.hpp"
#include "mrgnn/dataset.hpp"
#include "mrgnn/errors.hpp"
#include "mrgnn/featurize.hpp"
#include "mrgnn/graph.hpp"
#include "mrgnn/metrics.hpp"
#include "mrgnn/model.hpp"
#include "mrgnn/rng.hpp"
#include "mrgnn/smiles.hpp"
#include "mrgnn/synthetic.hpp"
#include "mrgnn/train.hpp"
#include "test_util.hpp"

using mrgnn::AblationFlags;
using mrgnn::LabeledPairDataset;
using mrgnn::MolecularGraph;
using mrgnn::ModelConfig;
using mrgnn::MrGnnModel;
using mrgnn::PreparedDataset;
using mrgnn::Rng;
using mrgnn::Tensor;
using mrgnn::TrainConfig;

namespace {

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

struct Gate {
  int failures = 0;

  void run(const std::string& name, const std::function<bool(std::string&)>& body) {
    std::string note;
    bool ok = false;
    auto start = std::chrono::steady_clock::now();
    try {
      ok = body(note);
    } catch (const std::exception& e) {
      note = std::string("exception: ") + e.what();
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), seconds,
                note.empty() ? "" : " ", note.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

ModelConfig small_config(AblationFlags ablation = {}) {
  ModelConfig config;
  config.feature_dim = 6;
  config.conv_widths = {5, 4};
  config.gather_width = 3;
  config.hidden_width = 4;
  config.num_labels = 2;
  config.degree_cap = 3;
  config.ablation = ablation;
  return config;
}

std::vector<int> all_pairs(const PreparedDataset& data) {
  std::vector<int> idx(data.pairs.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

// Relabels nodes by `perm` (old index -> new index), rows of `features` along.
std::pair<MolecularGraph, Tensor> permute(const MolecularGraph& graph, const Tensor& features,
                                          const std::vector<int>& perm) {
  std::vector<mrgnn::AtomNode> atoms(static_cast<std::size_t>(graph.atom_count()));
  for (int i = 0; i < graph.atom_count(); ++i) {
    atoms[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = graph.atom(i);
  }
  MolecularGraph out;
  for (const mrgnn::AtomNode& atom : atoms) out.add_atom(atom);
  for (const mrgnn::Bond& bond : graph.bonds()) {
    out.add_bond(perm[static_cast<std::size_t>(bond.a)], perm[static_cast<std::size_t>(bond.b)],
                 bond.kind);
  }
  Tensor rows(features.rows(), features.cols());
  for (int r = 0; r < features.rows(); ++r) {
    for (int c = 0; c < features.cols(); ++c) {
      rows.at(perm[static_cast<std::size_t>(r)], c) = features.at(r, c);
    }
  }
  return {std::move(out), std::move(rows)};
}

Tensor forward_probs(const MrGnnModel& model, const MolecularGraph& a, const Tensor& fa,
                     const MolecularGraph& b, const Tensor& fb) {
  return mrgnn::predict_pair(model, a, fa, b, fb);
}

// ---- criteria ---------------------------------------------------------------

// Tape gradients vs central differences on 100 random pairs, cycling every
// ablation variant. eps and the tolerance are part of the contract.
bool crit_gradcheck(std::string& note) {
  constexpr double kEps = 1e-5;
  constexpr double kTolerance = 1e-4;
  constexpr int kPairs = 100;

  std::vector<MrGnnModel> models;
  models.emplace_back(small_config(), 101);
  models.emplace_back(small_config({true, false, true}), 102);   // no pair LSTM
  models.emplace_back(small_config({false, true, true}), 103);   // no summary LSTM
  models.emplace_back(small_config({false, false, true}), 104);  // no LSTMs
  models.emplace_back(small_config({true, true, false}), 105);   // shared conv weights

  Rng rng(mrgnn::mix_seed(42, 0x9c1));
  double worst = 0.0;
  long long checked = 0;
  for (int trial = 0; trial < kPairs; ++trial) {
    MolecularGraph a = testutil::random_graph(rng, 2, 6);
    MolecularGraph b = testutil::random_graph(rng, 2, 6);
    Tensor fa = testutil::random_features(rng, a.atom_count(), 6);
    Tensor fb = testutil::random_features(rng, b.atom_count(), 6);
    MrGnnModel& model = models[static_cast<std::size_t>(trial % 5)];
    testutil::GradCheckReport report =
        testutil::finite_difference_check(model, a, fa, b, fb, trial % 2, kEps);
    worst = std::max(worst, report.max_rel_err);
    checked += report.checked;
  }
  note = "max rel err " + fmt(worst) + " over " + std::to_string(kPairs) + " pairs, " +
         std::to_string(checked) + " partials";
  return worst < kTolerance;
}

// Node order must not matter, and the two graph towers must share weights
// exactly: the same molecule on both sides reads out identically.
bool crit_permutation(std::string& note) {
  constexpr double kTolerance = 1e-9;

  MrGnnModel model(small_config(), 7);
  Rng rng(mrgnn::mix_seed(42, 0xbe2));
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    MolecularGraph a = testutil::random_graph(rng, 3, 8);
    MolecularGraph b = testutil::random_graph(rng, 3, 8);
    Tensor fa = testutil::random_features(rng, a.atom_count(), 6);
    Tensor fb = testutil::random_features(rng, b.atom_count(), 6);

    std::vector<int> pa(static_cast<std::size_t>(a.atom_count()));
    std::iota(pa.begin(), pa.end(), 0);
    rng.shuffle(pa);
    std::vector<int> pb(static_cast<std::size_t>(b.atom_count()));
    std::iota(pb.begin(), pb.end(), 0);
    rng.shuffle(pb);
    auto [a2, fa2] = permute(a, fa, pa);
    auto [b2, fb2] = permute(b, fb, pb);

    Tensor p = forward_probs(model, a, fa, b, fb);
    Tensor q = forward_probs(model, a2, fa2, b2, fb2);
    for (int c = 0; c < p.cols(); ++c) {
      worst = std::max(worst, std::abs(p.at(0, c) - q.at(0, c)));
    }
  }

  bool siamese_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    MolecularGraph g = testutil::random_graph(rng, 3, 8);
    Tensor f = testutil::random_features(rng, g.atom_count(), 6);
    mrgnn::Tape tape(mrgnn::TapeOptions{.recording = false});
    mrgnn::ForwardResult fwd =
        model.forward(tape, mrgnn::GraphInput{&g, &f}, mrgnn::GraphInput{&g, &f});
    if (!(fwd.trace.x.readout == fwd.trace.y.readout)) siamese_ok = false;
  }

  note = "perm drift " + fmt(worst) + ", siamese readouts " +
         (siamese_ok ? "identical" : "DIFFER");
  return worst < kTolerance && siamese_ok;
}

// The tape-built forward pass against a plain-loop reimplementation.
bool crit_straightline(std::string& note) {
  constexpr double kTolerance = 1e-12;

  const AblationFlags variants[] = {
      {true, true, true}, {true, false, true}, {false, true, true},
      {false, false, true}, {true, true, false},
  };
  Rng rng(mrgnn::mix_seed(42, 0x51e));
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    MrGnnModel model(small_config(variants[trial % 5]), 200 + trial);
    MolecularGraph a = testutil::random_graph(rng, 3, 9);
    MolecularGraph b = testutil::random_graph(rng, 3, 9);
    Tensor fa = testutil::random_features(rng, a.atom_count(), 6);
    Tensor fb = testutil::random_features(rng, b.atom_count(), 6);

    Tensor probs = forward_probs(model, a, fa, b, fb);
    std::vector<double> oracle = testutil::straightline_forward(model, a, fa, b, fb);
    for (int c = 0; c < probs.cols(); ++c) {
      worst = std::max(worst,
                       std::abs(probs.at(0, c) - oracle[static_cast<std::size_t>(c)]));
    }
  }
  note = "max abs gap " + fmt(worst) + " over 20 instances";
  return worst <= kTolerance;
}

// Default widths: 384-wide final conv, 128-wide graph state, so the readout
// concatenation is 2*384 + 4*128 = 1280 and the first head matrix must agree.
bool crit_head_width(std::string& note) {
  ModelConfig config;  // defaults
  bool ok = config.head_input_width() == 1280;

  MrGnnModel model(config, 1);
  ok = ok && model.parameters().get("head.w1").rows() == 1280;

  ModelConfig no_pair = config;
  no_pair.ablation.use_pair_lstm = false;
  ModelConfig no_summary = config;
  no_summary.ablation.use_summary_lstm = false;
  ModelConfig no_lstms = config;
  no_lstms.ablation.use_summary_lstm = false;
  no_lstms.ablation.use_pair_lstm = false;
  ok = ok && no_pair.head_input_width() == 1024;
  ok = ok && no_summary.head_input_width() == 1024;
  ok = ok && no_lstms.head_input_width() == 768;

  note = "full 1280, ablated " + std::to_string(no_pair.head_input_width()) + "/" +
         std::to_string(no_summary.head_input_width()) + "/" +
         std::to_string(no_lstms.head_input_width());
  return ok;
}

// Memorization check at the stock step size: 50 labeled pairs, 200 epochs,
// single-sample batches, at least 99% training accuracy at the end.
bool crit_overfit(std::string& note) {
  constexpr double kLearningRate = 1e-4;  // stock value, deliberately not tuned
  constexpr int kEpochs = 200;
  constexpr double kAccuracyFloor = 0.99;

  mrgnn::SyntheticSpec spec;
  spec.n_pairs = 50;
  spec.seed = 0x50;
  LabeledPairDataset raw = mrgnn::generate_synthetic(spec);
  mrgnn::FeaturizerConfig featurizer;
  featurizer.output_dim = featurizer.intrinsic_width();
  PreparedDataset data = mrgnn::prepare_dataset(raw, featurizer);

  ModelConfig config;
  config.feature_dim = featurizer.output_dim;
  config.conv_widths = {32, 32};
  config.gather_width = 16;
  config.hidden_width = 16;
  config.degree_cap = 6;

  TrainConfig tc;
  tc.learning_rate = kLearningRate;
  tc.epochs = kEpochs;
  tc.batch_size = 1;  // one optimizer step per pair keeps the step count high
  tc.seed = 7;

  MrGnnModel model(config, 50);
  std::vector<int> train_idx = all_pairs(data);
  mrgnn::TrainResult result = mrgnn::train_model(model, data, train_idx, {}, tc);
  mrgnn::EvalResult eval = mrgnn::evaluate_model(model, data, train_idx);

  note = "train acc " + fmt(eval.report.accuracy) + " after " +
         std::to_string(result.epochs.size()) + " epochs, final loss " +
         fmt(result.epochs.back().train_loss);
  return eval.report.accuracy >= kAccuracyFloor;
}

// Desk-scale benchmark: the full model must solve the two-motif task and must
// not trail any ablation by more than one accuracy point, averaged over 3
// seeds (15 trainings).
bool crit_motif_benchmark(std::string& note) {
  constexpr double kAccuracyFloor = 0.90;
  constexpr double kAucFloor = 0.95;
  constexpr double kAblationMargin = 0.01;

  mrgnn::SyntheticSpec spec;
  spec.n_pairs = 2000;
  spec.seed = 0x2000;
  LabeledPairDataset raw = mrgnn::generate_synthetic(spec);
  mrgnn::FeaturizerConfig featurizer;
  featurizer.output_dim = featurizer.intrinsic_width();
  PreparedDataset data = mrgnn::prepare_dataset(raw, featurizer);

  mrgnn::SplitSpec split_spec;
  split_spec.seed = 0xf01d;
  mrgnn::IndexSplit split =
      mrgnn::split_indices(static_cast<int>(data.pairs.size()), split_spec);

  struct Variant {
    const char* name;
    AblationFlags flags;
  };
  const Variant variants[] = {
      {"full", {true, true, true}},
      {"no-ilstm", {true, false, true}},
      {"no-slstm", {false, true, true}},
      {"no-wgcl", {true, true, false}},
      {"no-lstms", {false, false, true}},
  };

  double mean_acc[5] = {};
  double mean_auc[5] = {};
  for (int v = 0; v < 5; ++v) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      ModelConfig config;
      config.feature_dim = featurizer.output_dim;
      config.conv_widths = {32, 32};
      config.gather_width = 16;
      config.hidden_width = 16;
      config.degree_cap = 6;
      config.ablation = variants[v].flags;

      TrainConfig tc;
      tc.learning_rate = 2e-3;
      tc.epochs = 25;
      tc.batch_size = 32;
      tc.patience = 5;
      tc.seed = mrgnn::mix_seed(seed, 0x7ea1);

      MrGnnModel model(config, mrgnn::mix_seed(seed, static_cast<std::uint64_t>(v)));
      mrgnn::train_model(model, data, split.train, split.val, tc);
      mrgnn::EvalResult eval = mrgnn::evaluate_model(model, data, split.test);
      mean_acc[v] += eval.report.accuracy / 3.0;
      mean_auc[v] += eval.report.auc / 3.0;
    }
  }

  bool ok = mean_acc[0] >= kAccuracyFloor && mean_auc[0] >= kAucFloor;
  double worst_margin = 1.0;
  for (int v = 1; v < 5; ++v) {
    worst_margin = std::min(worst_margin, mean_acc[0] - mean_acc[v]);
    if (mean_acc[0] < mean_acc[v] - kAblationMargin) ok = false;
  }

  std::ostringstream os;
  os << "full acc " << fmt(mean_acc[0]) << " auc " << fmt(mean_auc[0]) << "; ablation accs";
  for (int v = 1; v < 5; ++v) os << " " << variants[v].name << "=" << fmt(mean_acc[v]);
  os << "; worst margin " << fmt(worst_margin);
  note = os.str();
  return ok;
}

// Ranking metrics against brute force and a hand-computed fixture.
bool crit_metric_oracles(std::string& note) {
  Rng rng(mrgnn::mix_seed(42, 0xa0c));
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(rng.below(40));
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<int> labels(static_cast<std::size_t>(n));
    bool discrete = trial % 2 == 0;
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] =
          discrete ? static_cast<double>(rng.below(4)) * 0.25 : rng.uniform();
      labels[static_cast<std::size_t>(i)] = rng.chance(0.5) ? 1 : 0;
    }
    labels[0] = 0;
    labels[static_cast<std::size_t>(n - 1)] = 1;  // both classes present

    double fast = mrgnn::roc_auc(scores, labels);
    double slow = testutil::auc_bruteforce(scores, labels);
    if (fast != slow) {
      note = "auc mismatch on trial " + std::to_string(trial) + ": " + fmt(fast) + " vs " +
             fmt(slow);
      return false;
    }
  }

  std::vector<double> ap_scores = {0.9, 0.8, 0.7};
  std::vector<int> ap_labels = {1, 0, 1};
  double ap = mrgnn::average_precision(ap_scores, ap_labels);
  // Step sum by hand: positives at ranks 1 and 3, precisions 1/1 and 2/3,
  // each weighted by 1/2. Algebraically 5/6; the step sum itself must match
  // bit for bit and the algebraic value to within an ulp.
  double step_sum = 1.0 / 1.0 / 2.0 + 2.0 / 3.0 / 2.0;
  if (ap != step_sum || std::abs(ap - 5.0 / 6.0) > 1e-15) {
    note = "average precision fixture: got " + fmt(ap) + ", want " + fmt(step_sum);
    return false;
  }
  note = "auc bitwise equal on 300 random inputs; AP fixture exact";
  return true;
}

// The SMILES dialect: 40 accepted structures plus the designated failure kind
// for each malformed class.
bool crit_smiles_corpus(std::string& note) {
  struct Valid {
    const char* text;
    int atoms;
    int bonds;
  };
  const Valid accepted[] = {
      {"C", 1, 0},           {"N", 1, 0},
      {"O", 1, 0},           {"S", 1, 0},
      {"P", 1, 0},           {"F", 1, 0},
      {"Cl", 1, 0},          {"Br", 1, 0},
      {"I", 1, 0},           {"B", 1, 0},
      {"CC", 2, 1},          {"C=C", 2, 1},
      {"C#C", 2, 1},         {"C-C", 2, 1},
      {"CCO", 3, 2},         {"CC=O", 3, 2},
      {"O=C=O", 3, 2},       {"CC(=O)O", 4, 3},
      {"CC(C)C", 4, 3},      {"CC(C)(C)C", 5, 4},
      {"CCN(CC)CC", 7, 6},   {"C(F)(Cl)Br", 4, 3},
      {"CCCCCCCCCC", 10, 9}, {"C1CC1", 3, 3},
      {"C1CCCCC1", 6, 6},    {"C%12CC%12", 3, 3},
      {"C1.C1", 2, 1},       {"C=1CC=1", 3, 3},
      {"OC1CCCC1", 6, 6},    {"CN1CCC1", 5, 5},
      {"C1CC1C1CC1", 6, 7},  {"[NH4+]", 1, 0},
      {"[O-]C", 2, 1},       {"c1ccccc1", 6, 6},
      {"C1=CC=CC=C1", 6, 6}, {"Cc1ccccc1", 7, 7},
      {"Oc1ccccc1", 7, 7},   {"c1ccncc1", 6, 6},
      {"c1cc[nH]c1", 5, 5},  {"c1ccc2ccccc2c1", 10, 11},
  };
  static_assert(sizeof(accepted) / sizeof(accepted[0]) == 40);

  int bad_fixtures = 0;
  for (const Valid& v : accepted) {
    try {
      MolecularGraph g = mrgnn::parse_smiles(v.text);
      if (g.atom_count() != v.atoms || g.bond_count() != v.bonds) ++bad_fixtures;
    } catch (const mrgnn::SmilesError&) {
      ++bad_fixtures;
    }
  }

  using K = mrgnn::SmilesErrorKind;
  struct Bad {
    const char* text;
    K kind;
  };
  const Bad rejected[] = {
      {"", K::EmptyInput},
      {"C$", K::UnknownCharacter},
      {"C/C=C/C", K::UnsupportedFeature},
      {"[13C]", K::UnsupportedFeature},
      {"[C@H](C)C", K::UnsupportedFeature},
      {"[H]", K::UnsupportedFeature},
      {"[C", K::MalformedBracket},
      {"[N+-]", K::MalformedBracket},
      {"C%1C", K::MalformedRingNumber},
      {"C(C", K::UnbalancedParenthesis},
      {"C)", K::UnbalancedParenthesis},
      {"C1CC", K::UnclosedRing},
      {"C=", K::DanglingBond},
      {"C==C", K::DanglingBond},
      {"C11", K::RingBondConflict},
      {"C=1CC#1", K::RingBondConflict},
      {"(C)C", K::UnexpectedToken},
      {"C.C", K::MultiComponent},
  };
  int bad_rejections = 0;
  for (const Bad& b : rejected) {
    try {
      mrgnn::parse_smiles(b.text);
      ++bad_rejections;
    } catch (const mrgnn::SmilesError& e) {
      if (e.kind != b.kind) ++bad_rejections;
    }
  }

  note = std::to_string(40 - bad_fixtures) + "/40 accepted, " +
         std::to_string(18 - bad_rejections) + "/18 rejections with the right kind";
  return bad_fixtures == 0 && bad_rejections == 0;
}

// The same seed must give byte-identical checkpoints across two full runs.
bool crit_determinism(std::string& note) {
  mrgnn::SyntheticSpec spec;
  spec.n_pairs = 60;
  spec.seed = 0x60;
  LabeledPairDataset raw = mrgnn::generate_synthetic(spec);
  mrgnn::FeaturizerConfig featurizer;
  featurizer.output_dim = featurizer.intrinsic_width();
  PreparedDataset data = mrgnn::prepare_dataset(raw, featurizer);

  mrgnn::SplitSpec split_spec;
  split_spec.seed = 42;
  mrgnn::IndexSplit split =
      mrgnn::split_indices(static_cast<int>(data.pairs.size()), split_spec);

  testutil::TempDir dir;
  auto run = [&](const std::string& path) {
    ModelConfig config;
    config.feature_dim = featurizer.output_dim;
    config.conv_widths = {12, 12};
    config.gather_width = 8;
    config.hidden_width = 8;
    config.degree_cap = 6;

    TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.epochs = 5;
    tc.batch_size = 8;
    tc.seed = 42;

    MrGnnModel model(config, 42);
    mrgnn::train_model(model, data, split.train, split.val, tc);
    mrgnn::save_checkpoint(path, mrgnn::snapshot(model, featurizer, "{}"));
  };

  std::string first = dir.file("first.bin");
  std::string second = dir.file("second.bin");
  run(first);
  run(second);
  bool ok = testutil::files_identical(first, second);
  note = ok ? "checkpoints byte-identical" : "checkpoints differ";
  return ok;
}

// Full-scale runs take hours, so the gate only demands that the exact
// commands are written down, including every threshold variant.
bool crit_documented_runs(std::string& note) {
  std::string path = std::string(MRGNN_SOURCE_DIR) + "/docs/experiments.md";
  std::ifstream file(path);
  if (!file) {
    note = "missing " + path;
    return false;
  }
  std::ostringstream buf;
  buf << file.rdbuf();
  std::string text = buf.str();

  const char* needles[] = {
      "--threshold 900", "--threshold 800", "--threshold 700",
      "--task multiclass", "--epochs 100", "not reproduced",
  };
  std::string missing;
  for (const char* needle : needles) {
    if (text.find(needle) == std::string::npos) {
      if (!missing.empty()) missing += ", ";
      missing += needle;
    }
  }
  if (!missing.empty()) {
    note = "experiments doc lacks: " + missing;
    return false;
  }
  note = "all full-scale commands documented";
  return true;
}

}  // namespace

int main() {
  Gate gate;
  gate.run("gradcheck-vs-finite-differences", crit_gradcheck);
  gate.run("permutation-invariance-and-siamese-sharing", crit_permutation);
  gate.run("straight-line-oracle-agreement", crit_straightline);
  gate.run("readout-width-1280", crit_head_width);
  gate.run("fifty-pair-overfit", crit_overfit);
  gate.run("motif-benchmark-with-ablations", crit_motif_benchmark);
  gate.run("metric-oracles", crit_metric_oracles);
  gate.run("smiles-corpus", crit_smiles_corpus);
  gate.run("bit-identical-retraining", crit_determinism);
  gate.run("full-scale-runs-documented", crit_documented_runs);

  if (gate.failures > 0) {
    std::printf("%d criterion(s) failed\n", gate.failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
