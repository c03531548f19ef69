#include <doctest.h>

#include <fstream>
#include <string>

#include "mrgnn/checkpoint.hpp"
#include "mrgnn/errors.hpp"
#include "mrgnn/model.hpp"
#include "mrgnn/rng.hpp"
#include "test_util.hpp"

using mrgnn::Checkpoint;
using mrgnn::FeaturizerConfig;
using mrgnn::ModelConfig;
using mrgnn::MrGnnModel;
using mrgnn::Tensor;

namespace {

ModelConfig small_config() {
  ModelConfig config;
  config.feature_dim = 35;
  config.conv_widths = {6, 5};
  config.gather_width = 4;
  config.hidden_width = 5;
  config.degree_cap = 4;
  return config;
}

std::string read_bytes(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  REQUIRE(file.good());
  return std::string(std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>());
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("snapshot copies every parameter in store order") {
  MrGnnModel model(small_config(), 3);
  FeaturizerConfig feat;
  feat.output_dim = 35;

  Checkpoint ck = mrgnn::snapshot(model, feat, R"({"note":"x"})");
  REQUIRE(ck.tensors.size() == model.parameters().count());
  for (std::size_t i = 0; i < ck.tensors.size(); ++i) {
    CHECK(ck.tensors[i].first == model.parameters().name_at(i));
    CHECK(ck.tensors[i].second == model.parameters().tensor_at(i));
  }
  CHECK(ck.extra_json == R"({"note":"x"})");

  // snapshot is a copy, not a view
  model.parameters().tensor_at(0).fill(123.0);
  CHECK_FALSE(ck.tensors[0].second == model.parameters().tensor_at(0));
}

TEST_CASE("file round trip is bit exact") {
  testutil::TempDir dir;
  MrGnnModel model(small_config(), 7);
  FeaturizerConfig feat;
  feat.output_dim = 35;

  Checkpoint ck = mrgnn::snapshot(model, feat, R"({"labels":["a","b"],"threshold":900})");
  std::string path = dir.file("model.bin");
  mrgnn::save_checkpoint(path, ck);
  Checkpoint back = mrgnn::load_checkpoint(path);

  CHECK(back.model.feature_dim == ck.model.feature_dim);
  CHECK(back.model.conv_widths == ck.model.conv_widths);
  CHECK(back.model.gather_width == ck.model.gather_width);
  CHECK(back.model.hidden_width == ck.model.hidden_width);
  CHECK(back.model.num_labels == ck.model.num_labels);
  CHECK(back.model.degree_cap == ck.model.degree_cap);
  CHECK(back.model.ablation.use_summary_lstm == ck.model.ablation.use_summary_lstm);
  CHECK(back.model.ablation.use_pair_lstm == ck.model.ablation.use_pair_lstm);
  CHECK(back.model.ablation.weighted_conv == ck.model.ablation.weighted_conv);
  CHECK(back.model.conv_activation == ck.model.conv_activation);
  CHECK(back.featurizer == ck.featurizer);

  REQUIRE(back.tensors.size() == ck.tensors.size());
  for (std::size_t i = 0; i < ck.tensors.size(); ++i) {
    CHECK(back.tensors[i].first == ck.tensors[i].first);
    CHECK(back.tensors[i].second == ck.tensors[i].second);  // exact doubles
  }

  // extra metadata survives verbatim
  CHECK(back.extra_json.find("threshold") != std::string::npos);

  // saving the reloaded checkpoint reproduces the file byte for byte
  std::string path2 = dir.file("model2.bin");
  mrgnn::save_checkpoint(path2, back);
  CHECK(testutil::files_identical(path, path2));
}

TEST_CASE("restore rebuilds a model that predicts identically") {
  testutil::TempDir dir;
  mrgnn::Rng rng(19);
  ModelConfig config = small_config();
  config.feature_dim = 6;
  MrGnnModel model(config, 11);

  mrgnn::MolecularGraph a = testutil::random_graph(rng, 3, 6);
  mrgnn::MolecularGraph b = testutil::random_graph(rng, 3, 6);
  Tensor fa = testutil::random_features(rng, a.atom_count(), 6);
  Tensor fb = testutil::random_features(rng, b.atom_count(), 6);

  FeaturizerConfig feat;
  std::string path = dir.file("model.bin");
  mrgnn::save_checkpoint(path, mrgnn::snapshot(model, feat));
  MrGnnModel restored = mrgnn::restore_model(mrgnn::load_checkpoint(path));

  mrgnn::Tape t1(mrgnn::TapeOptions{.recording = false, .check_finite = false});
  mrgnn::Tape t2(mrgnn::TapeOptions{.recording = false, .check_finite = false});
  Tensor p1 = model.forward(t1, {&a, &fa}, {&b, &fb}).probabilities.value();
  Tensor p2 = restored.forward(t2, {&a, &fa}, {&b, &fb}).probabilities.value();
  CHECK(p1 == p2);
}

TEST_CASE("restore rejects mismatched tensors") {
  MrGnnModel model(small_config(), 2);
  FeaturizerConfig feat;
  feat.output_dim = 35;

  Checkpoint missing = mrgnn::snapshot(model, feat);
  missing.tensors.pop_back();
  CHECK_THROWS_AS(mrgnn::restore_model(missing), mrgnn::DataError);

  Checkpoint renamed = mrgnn::snapshot(model, feat);
  renamed.tensors[0].first = "no.such.parameter";
  CHECK_THROWS_AS(mrgnn::restore_model(renamed), mrgnn::DataError);

  Checkpoint reshaped = mrgnn::snapshot(model, feat);
  reshaped.tensors[0].second = Tensor(1, 1);
  try {
    mrgnn::restore_model(reshaped);
    FAIL("expected a shape complaint");
  } catch (const mrgnn::DataError& e) {
    // names the parameter and both shapes
    CHECK(std::string(e.what()).find(reshaped.tensors[0].first) != std::string::npos);
    CHECK(std::string(e.what()).find("1x1") != std::string::npos);
  }
}

TEST_CASE("loader rejects non-checkpoint bytes") {
  testutil::TempDir dir;

  std::string garbage = dir.file("garbage.bin");
  write_bytes(garbage, "these are not the bytes you are looking for");
  try {
    mrgnn::load_checkpoint(garbage);
    FAIL("expected rejection");
  } catch (const mrgnn::DataError& e) {
    CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
  }

  CHECK_THROWS_AS(mrgnn::load_checkpoint(dir.file("does-not-exist.bin")), mrgnn::IoError);
}

TEST_CASE("loader rejects truncation anywhere in the file") {
  testutil::TempDir dir;
  MrGnnModel model(small_config(), 5);
  FeaturizerConfig feat;
  feat.output_dim = 35;
  std::string path = dir.file("model.bin");
  mrgnn::save_checkpoint(path, mrgnn::snapshot(model, feat));

  std::string bytes = read_bytes(path);
  // probe a spread of cut points: inside the magic, the manifest, the tensor
  // table and the float payload
  for (std::size_t keep : {4ul, 12ul, bytes.size() / 2, bytes.size() - 9, bytes.size() - 1}) {
    CAPTURE(keep);
    std::string cut = dir.file("cut.bin");
    write_bytes(cut, bytes.substr(0, keep));
    CHECK_THROWS_AS(mrgnn::load_checkpoint(cut), mrgnn::DataError);
  }

  // trailing junk is also an error, not silently ignored
  std::string padded = dir.file("padded.bin");
  write_bytes(padded, bytes + "x");
  CHECK_THROWS_AS(mrgnn::load_checkpoint(padded), mrgnn::DataError);
}

TEST_CASE("config json codecs round trip and tolerate partial objects") {
  ModelConfig config = small_config();
  config.ablation.use_pair_lstm = false;
  config.conv_activation = false;
  ModelConfig back = mrgnn::model_config_from_json(mrgnn::model_config_to_json(config));
  CHECK(back.feature_dim == config.feature_dim);
  CHECK(back.conv_widths == config.conv_widths);
  CHECK(back.ablation.use_pair_lstm == false);
  CHECK(back.conv_activation == false);

  // partial object: unknown-free subset overrides, rest stays default
  ModelConfig partial = mrgnn::model_config_from_json(R"({"gather_width": 9})");
  CHECK(partial.gather_width == 9);
  CHECK(partial.feature_dim == ModelConfig{}.feature_dim);

  CHECK_THROWS_AS(mrgnn::model_config_from_json("[1,2]"), mrgnn::DataError);
  CHECK_THROWS_AS(mrgnn::model_config_from_json("{"), mrgnn::DataError);

  FeaturizerConfig feat;
  feat.max_degree = 9;
  FeaturizerConfig feat_back =
      mrgnn::featurizer_config_from_json(mrgnn::featurizer_config_to_json(feat));
  CHECK(feat_back == feat);
}
