// Microbenchmarks for the hot paths: SMILES parsing, featurization, the
// paired forward pass (inference and with a recording tape), the backward
// pass, and AUC. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "mrgnn/autodiff.hpp"
#include "mrgnn/featurize.hpp"
#include "mrgnn/graph.hpp"
#include "mrgnn/metrics.hpp"
#include "mrgnn/model.hpp"
#include "mrgnn/rng.hpp"
#include "mrgnn/smiles.hpp"
#include "mrgnn/tensor.hpp"

namespace {

const char* kSmilesA = "CC(=O)Oc1ccccc1C(=O)O";  // aspirin-sized input
const char* kSmilesB = "CN1CCC(CC1)c1ccc(Cl)cc1";

mrgnn::ModelConfig bench_config(int scale) {
  mrgnn::ModelConfig config;
  config.feature_dim = 75;
  config.conv_widths = {scale, scale};
  config.gather_width = scale / 2;
  config.hidden_width = scale / 2;
  config.degree_cap = 6;
  return config;
}

struct PairFixture {
  mrgnn::MolecularGraph a;
  mrgnn::MolecularGraph b;
  mrgnn::Tensor fa;
  mrgnn::Tensor fb;

  PairFixture() {
    a = mrgnn::parse_smiles(kSmilesA);
    b = mrgnn::parse_smiles(kSmilesB);
    mrgnn::FeaturizerConfig featurizer;
    fa = mrgnn::featurize(a, featurizer);
    fb = mrgnn::featurize(b, featurizer);
  }
};

void BM_ParseSmiles(benchmark::State& state) {
  for (auto _ : state) {
    mrgnn::MolecularGraph g = mrgnn::parse_smiles(kSmilesA);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_ParseSmiles);

void BM_Featurize(benchmark::State& state) {
  mrgnn::MolecularGraph g = mrgnn::parse_smiles(kSmilesA);
  mrgnn::FeaturizerConfig featurizer;
  for (auto _ : state) {
    mrgnn::Tensor f = mrgnn::featurize(g, featurizer);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_Featurize);

void BM_ForwardInference(benchmark::State& state) {
  PairFixture pair;
  mrgnn::MrGnnModel model(bench_config(static_cast<int>(state.range(0))), 1);
  for (auto _ : state) {
    mrgnn::Tape tape(mrgnn::TapeOptions{.recording = false});
    mrgnn::ForwardResult out = model.forward(tape, mrgnn::GraphInput{&pair.a, &pair.fa},
                                             mrgnn::GraphInput{&pair.b, &pair.fb});
    benchmark::DoNotOptimize(out.trace.probabilities);
  }
}
BENCHMARK(BM_ForwardInference)->Arg(32)->Arg(128);

void BM_ForwardRecording(benchmark::State& state) {
  PairFixture pair;
  mrgnn::MrGnnModel model(bench_config(static_cast<int>(state.range(0))), 1);
  for (auto _ : state) {
    mrgnn::Tape tape;
    mrgnn::ForwardResult out = model.forward(tape, mrgnn::GraphInput{&pair.a, &pair.fa},
                                             mrgnn::GraphInput{&pair.b, &pair.fb});
    benchmark::DoNotOptimize(out.trace.probabilities);
  }
}
BENCHMARK(BM_ForwardRecording)->Arg(32)->Arg(128);

void BM_ForwardBackward(benchmark::State& state) {
  PairFixture pair;
  mrgnn::MrGnnModel model(bench_config(static_cast<int>(state.range(0))), 1);
  mrgnn::Tensor target(1, 2);
  target.at(0, 1) = 1.0;
  for (auto _ : state) {
    mrgnn::Tape tape;
    mrgnn::ForwardResult out = model.forward(tape, mrgnn::GraphInput{&pair.a, &pair.fa},
                                             mrgnn::GraphInput{&pair.b, &pair.fb});
    mrgnn::Var loss = mrgnn::cross_entropy(out.probabilities, target);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(out.logits.id()).at(0, 0));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(128);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  mrgnn::Rng rng(99);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = rng.chance(0.5) ? 1 : 0;
  }
  labels[0] = 0;
  labels[n - 1] = 1;
  for (auto _ : state) {
    double auc = mrgnn::roc_auc(scores, labels);
    benchmark::DoNotOptimize(auc);
  }
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
