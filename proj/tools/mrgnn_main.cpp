// Command line front end: dataset generation, featurization, training,
// evaluation, prediction and hyperparameter sweeps over SMILES pair files.
//
// Exit codes are a scripting contract: 0 success, 1 usage/config problems,
// 2 data problems (files, parsing, incompatible checkpoints), 3 numeric
// failures (non-finite loss).

#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrgnn/checkpoint.hpp"
#include "mrgnn/dataset.hpp"
#include "mrgnn/errors.hpp"
#include "mrgnn/feature_cache.hpp"
#include "mrgnn/metrics.hpp"
#include "mrgnn/model.hpp"
#include "mrgnn/rng.hpp"
#include "mrgnn/smiles.hpp"
#include "mrgnn/synthetic.hpp"
#include "mrgnn/train.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Fully resolved run settings. Precedence: CLI flag > config file > default.
struct Options {
  std::string data;
  std::string task = "binary";
  int threshold = 900;
  std::uint64_t seed = 0;
  std::string ablation;  // empty = full model
  bool linear_conv = false;
  std::string out_dir = "mrgnn-out";
  bool balance = false;
  std::string cache_dir;

  double learning_rate = 1e-4;
  int epochs = 100;
  int batch_size = 32;
  int patience = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::string split_mode = "9:1";  // 9:1 | 60/20/20 | custom
  double train_frac = 0.0;
  double val_frac = 0.0;
  double test_frac = 0.0;

  std::vector<int> conv_widths = {384, 384, 384};
  int gather_width = 128;
  int hidden_width = 64;
  int degree_cap = 10;
  int feature_dim = 75;
};

std::string fmt_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string now_utc() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw mrgnn::IoError("cannot open " + path);
  std::ostringstream buf;
  buf << file.rdbuf();
  std::uint64_t h = mrgnn::fnv1a64(buf.str());
  std::ostringstream hex;
  hex << std::hex;
  for (int i = 15; i >= 0; --i) hex << ((h >> (4 * i)) & 0xf);
  return hex.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw mrgnn::IoError("cannot open " + path + " for writing");
  file << content;
  file.flush();
  if (!file) throw mrgnn::IoError("write failed for " + path);
}

// --- config file -------------------------------------------------------------

void apply_config_file(Options& o, const std::string& path) {
  std::ifstream file(path);
  if (!file) throw mrgnn::IoError("cannot open config file " + path);
  json j;
  try {
    file >> j;
  } catch (const json::exception& e) {
    throw mrgnn::ConfigError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw mrgnn::ConfigError("config file " + path + ": not a JSON object");

  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "task") {
        o.task = value.get<std::string>();
      } else if (key == "threshold") {
        o.threshold = value.get<int>();
      } else if (key == "seed") {
        o.seed = value.get<std::uint64_t>();
      } else if (key == "ablation") {
        o.ablation = value.get<std::string>();
      } else if (key == "linear_conv") {
        o.linear_conv = value.get<bool>();
      } else if (key == "balance") {
        o.balance = value.get<bool>();
      } else if (key == "learning_rate") {
        o.learning_rate = value.get<double>();
      } else if (key == "epochs") {
        o.epochs = value.get<int>();
      } else if (key == "batch_size") {
        o.batch_size = value.get<int>();
      } else if (key == "patience") {
        o.patience = value.get<int>();
      } else if (key == "beta1") {
        o.beta1 = value.get<double>();
      } else if (key == "beta2") {
        o.beta2 = value.get<double>();
      } else if (key == "epsilon") {
        o.epsilon = value.get<double>();
      } else if (key == "split_mode") {
        o.split_mode = value.get<std::string>();
      } else if (key == "train_frac") {
        o.train_frac = value.get<double>();
      } else if (key == "val_frac") {
        o.val_frac = value.get<double>();
      } else if (key == "test_frac") {
        o.test_frac = value.get<double>();
      } else if (key == "conv_widths") {
        o.conv_widths = value.get<std::vector<int>>();
      } else if (key == "gather_width") {
        o.gather_width = value.get<int>();
      } else if (key == "hidden_width") {
        o.hidden_width = value.get<int>();
      } else if (key == "degree_cap") {
        o.degree_cap = value.get<int>();
      } else if (key == "feature_dim") {
        o.feature_dim = value.get<int>();
      } else {
        throw mrgnn::ConfigError("config file " + path + ": unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw mrgnn::ConfigError("config file " + path + ": " + e.what());
  }
}

json options_to_json(const Options& o) {
  return json{{"data", o.data},
              {"task", o.task},
              {"threshold", o.threshold},
              {"seed", o.seed},
              {"ablation", o.ablation},
              {"linear_conv", o.linear_conv},
              {"out_dir", o.out_dir},
              {"balance", o.balance},
              {"cache_dir", o.cache_dir},
              {"learning_rate", o.learning_rate},
              {"epochs", o.epochs},
              {"batch_size", o.batch_size},
              {"patience", o.patience},
              {"beta1", o.beta1},
              {"beta2", o.beta2},
              {"epsilon", o.epsilon},
              {"split_mode", o.split_mode},
              {"train_frac", o.train_frac},
              {"val_frac", o.val_frac},
              {"test_frac", o.test_frac},
              {"conv_widths", o.conv_widths},
              {"gather_width", o.gather_width},
              {"hidden_width", o.hidden_width},
              {"degree_cap", o.degree_cap},
              {"feature_dim", o.feature_dim}};
}

// --- resolved pieces ---------------------------------------------------------

mrgnn::AblationFlags parse_ablation(const std::string& name) {
  mrgnn::AblationFlags flags;
  if (name.empty()) return flags;
  if (name == "no-ilstm") {
    flags.use_pair_lstm = false;
  } else if (name == "no-slstm") {
    flags.use_summary_lstm = false;
  } else if (name == "no-wgcl") {
    flags.weighted_conv = false;
  } else if (name == "no-lstms") {
    flags.use_pair_lstm = false;
    flags.use_summary_lstm = false;
  } else {
    throw mrgnn::ConfigError(
        "unknown ablation '" + name + "' (expected no-ilstm, no-slstm, no-wgcl or no-lstms)");
  }
  return flags;
}

mrgnn::SplitSpec make_split_spec(const Options& o) {
  mrgnn::SplitSpec spec;
  if (o.split_mode == "9:1") {
    spec.mode = mrgnn::SplitMode::TenthTestFifthVal;
  } else if (o.split_mode == "60/20/20") {
    spec.mode = mrgnn::SplitMode::Fractions602020;
  } else if (o.split_mode == "custom") {
    spec.mode = mrgnn::SplitMode::Custom;
    spec.train_frac = o.train_frac;
    spec.val_frac = o.val_frac;
    spec.test_frac = o.test_frac;
  } else {
    throw mrgnn::ConfigError("unknown split mode '" + o.split_mode +
                             "' (expected 9:1, 60/20/20 or custom)");
  }
  spec.seed = mrgnn::mix_seed(o.seed, 1);
  return spec;
}

mrgnn::FeaturizerConfig make_featurizer(const Options& o) {
  mrgnn::FeaturizerConfig config;
  config.output_dim = o.feature_dim;
  config.check();
  return config;
}

mrgnn::ModelConfig make_model_config(const Options& o, int num_labels) {
  mrgnn::ModelConfig config;
  config.feature_dim = o.feature_dim;
  config.conv_widths = o.conv_widths;
  config.gather_width = o.gather_width;
  config.hidden_width = o.hidden_width;
  config.num_labels = num_labels;
  config.degree_cap = o.degree_cap;
  config.ablation = parse_ablation(o.ablation);
  config.conv_activation = !o.linear_conv;
  config.check();
  return config;
}

mrgnn::TrainConfig make_train_config(const Options& o) {
  mrgnn::TrainConfig config;
  config.learning_rate = o.learning_rate;
  config.epochs = o.epochs;
  config.batch_size = o.batch_size;
  config.seed = mrgnn::mix_seed(o.seed, 4);
  config.beta1 = o.beta1;
  config.beta2 = o.beta2;
  config.epsilon = o.epsilon;
  config.patience = o.patience;
  config.split = make_split_spec(o);
  config.check();
  return config;
}

mrgnn::LabeledPairDataset load_dataset(const Options& o) {
  if (o.data.empty()) throw mrgnn::ConfigError("--data is required");
  mrgnn::LabeledPairDataset data;
  if (o.task == "binary") {
    data = mrgnn::load_cci(o.data, o.threshold);
  } else if (o.task == "multiclass") {
    data = mrgnn::load_ddi(o.data);
  } else {
    throw mrgnn::ConfigError("unknown task '" + o.task + "' (expected binary or multiclass)");
  }
  if (o.balance) data = mrgnn::balance_downsample(data, mrgnn::mix_seed(o.seed, 3));
  return data;
}

json dataset_summary(const mrgnn::LabeledPairDataset& data) {
  return json{{"records", data.records.size()},
              {"labels", data.num_labels},
              {"rows_read", data.provenance.rows_read},
              {"skipped_unparseable", data.provenance.skipped_unparseable},
              {"discarded_midrange", data.provenance.discarded_midrange}};
}

// Shared by train and sweep: everything from raw file to a trained model plus
// its test-set report.
struct RunOutput {
  mrgnn::TrainResult training;
  mrgnn::EvalResult test;
  int head_input_width = 0;
};

RunOutput run_training(const Options& o, const mrgnn::PreparedDataset& prepared,
                       const mrgnn::IndexSplit& split, mrgnn::MrGnnModel& model) {
  RunOutput out;
  out.training = mrgnn::train_model(model, prepared, split.train, split.val,
                                    make_train_config(o));
  out.test = mrgnn::evaluate_model(model, prepared, split.test);
  out.head_input_width = model.head_input_width();
  return out;
}

std::string checkpoint_extra(const Options& o, const mrgnn::LabeledPairDataset& data,
                             const mrgnn::MrGnnModel& model) {
  return json{{"task", o.task},
              {"threshold", o.threshold},
              {"seed", o.seed},
              {"labels", data.label_names},
              {"head_input_width", model.head_input_width()}}
      .dump();
}

// --- subcommands -------------------------------------------------------------

int cmd_gen_synthetic(const Options& o, int pairs, const std::string& out_path) {
  mrgnn::SyntheticSpec spec;
  spec.n_pairs = pairs;
  spec.seed = o.seed;
  mrgnn::LabeledPairDataset data = mrgnn::generate_synthetic(spec);
  mrgnn::write_pair_file(out_path, mrgnn::synthetic_rows(data));

  std::size_t positives = 0;
  for (const auto& rec : data.records) positives += rec.label == 1 ? 1 : 0;
  std::cout << json{{"file", out_path},
                    {"pairs", data.records.size()},
                    {"positives", positives}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_featurize(const Options& o) {
  mrgnn::LabeledPairDataset data = load_dataset(o);
  mrgnn::FeaturizerConfig featurizer = make_featurizer(o);
  std::string cache_dir = o.cache_dir.empty() ? o.out_dir + "/feature_cache" : o.cache_dir;
  mrgnn::FeatureCache cache(cache_dir, featurizer);
  mrgnn::PreparedDataset prepared = mrgnn::prepare_dataset(data, featurizer, &cache);

  json stats{{"cache_dir", cache_dir},
             {"records", data.records.size()},
             {"unique_molecules", prepared.graphs.size()},
             {"cache_hits", cache.hit_count()},
             {"cache_misses", cache.miss_count()},
             {"warnings", cache.warnings()}};
  for (const std::string& w : cache.warnings()) std::cerr << "warning: " << w << "\n";
  std::cout << stats.dump(2) << "\n";
  return 0;
}

int cmd_train(const Options& o, const std::string& resume_path) {
  mrgnn::LabeledPairDataset data = load_dataset(o);
  mrgnn::FeaturizerConfig featurizer = make_featurizer(o);
  fs::create_directories(o.out_dir);

  std::optional<mrgnn::FeatureCache> cache;
  if (!o.cache_dir.empty()) cache.emplace(o.cache_dir, featurizer);
  mrgnn::PreparedDataset prepared =
      mrgnn::prepare_dataset(data, featurizer, cache ? &*cache : nullptr);

  mrgnn::IndexSplit split =
      mrgnn::split_indices(static_cast<int>(prepared.pairs.size()), make_split_spec(o));

  json manifest{{"command", "train"},
                {"started_at", now_utc()},
                {"seed", o.seed},
                {"config", options_to_json(o)},
                {"data",
                 {{"path", o.data},
                  {"content_hash", file_hash_hex(o.data)},
                  {"summary", dataset_summary(data)},
                  {"split",
                   {{"train", split.train.size()},
                    {"val", split.val.size()},
                    {"test", split.test.size()}}}}},
                {"resume_from", resume_path}};
  write_text_file(o.out_dir + "/manifest.json", manifest.dump(2) + "\n");

  mrgnn::MrGnnModel model = resume_path.empty()
                                ? mrgnn::MrGnnModel(make_model_config(o, prepared.num_labels),
                                                    mrgnn::mix_seed(o.seed, 2))
                                : mrgnn::restore_model(mrgnn::load_checkpoint(resume_path));
  if (model.config().num_labels != prepared.num_labels) {
    throw mrgnn::DataError("data has k=" + std::to_string(prepared.num_labels) +
                           " labels but the model expects k=" +
                           std::to_string(model.config().num_labels));
  }

  RunOutput run = run_training(o, prepared, split, model);

  write_text_file(o.out_dir + "/epochs.jsonl", mrgnn::epoch_logs_to_jsonl(run.training.epochs));
  write_text_file(o.out_dir + "/metrics.json", run.test.report.to_json() + "\n");
  write_text_file(o.out_dir + "/metrics.csv",
                  run.test.report.csv_header() + "\n" + run.test.report.csv_row() + "\n");
  if (!data.label_names.empty()) {
    write_text_file(o.out_dir + "/label_map.json", mrgnn::label_map_to_json(data.label_names));
  }
  mrgnn::save_checkpoint(o.out_dir + "/checkpoint.bin",
                         mrgnn::snapshot(model, featurizer, checkpoint_extra(o, data, model)));

  json summary{{"out_dir", o.out_dir},
               {"epochs_run", run.training.epochs.size()},
               {"best_epoch", run.training.best_epoch},
               {"early_stopped", run.training.early_stopped},
               {"test_loss", run.test.mean_loss},
               {"head_input_width", run.head_input_width},
               {"metrics", json::parse(run.test.report.to_json())}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_evaluate(const Options& o, const std::string& checkpoint_path, bool task_given,
                 bool threshold_given, bool out_dir_given) {
  mrgnn::Checkpoint ck = mrgnn::load_checkpoint(checkpoint_path);
  mrgnn::MrGnnModel model = mrgnn::restore_model(ck);

  // Data interpretation defaults to how the checkpoint was trained.
  Options data_opts = o;
  json extra = json::parse(ck.extra_json);
  if (!task_given && extra.contains("task")) data_opts.task = extra["task"].get<std::string>();
  if (!threshold_given && extra.contains("threshold")) {
    data_opts.threshold = extra["threshold"].get<int>();
  }

  mrgnn::LabeledPairDataset data = load_dataset(data_opts);
  if (data.num_labels != model.config().num_labels) {
    throw mrgnn::DataError("data has k=" + std::to_string(data.num_labels) +
                           " labels but the checkpoint expects k=" +
                           std::to_string(model.config().num_labels));
  }

  mrgnn::PreparedDataset prepared = mrgnn::prepare_dataset(data, ck.featurizer);
  std::vector<int> all(prepared.pairs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  mrgnn::EvalResult result = mrgnn::evaluate_model(model, prepared, all);

  std::cout << result.report.to_json() << "\n";
  if (out_dir_given) {
    fs::create_directories(o.out_dir);
    write_text_file(o.out_dir + "/metrics.json", result.report.to_json() + "\n");
    write_text_file(o.out_dir + "/metrics.csv",
                    result.report.csv_header() + "\n" + result.report.csv_row() + "\n");
  }
  return 0;
}

int cmd_predict(const std::string& checkpoint_path, const std::string& smiles_a,
                const std::string& smiles_b) {
  mrgnn::Checkpoint ck = mrgnn::load_checkpoint(checkpoint_path);
  mrgnn::MrGnnModel model = mrgnn::restore_model(ck);

  mrgnn::MolecularGraph a = mrgnn::parse_smiles(smiles_a);
  mrgnn::MolecularGraph b = mrgnn::parse_smiles(smiles_b);
  mrgnn::Tensor fa = mrgnn::featurize(a, ck.featurizer);
  mrgnn::Tensor fb = mrgnn::featurize(b, ck.featurizer);
  mrgnn::Tensor probs = mrgnn::predict_pair(model, a, fa, b, fb);

  int label = 0;
  for (int c = 1; c < probs.cols(); ++c) {
    if (probs.at(0, c) > probs.at(0, label)) label = c;
  }
  std::vector<double> row(probs.values().begin(), probs.values().end());
  json out{{"label", label}, {"probabilities", row}};
  json extra = json::parse(ck.extra_json);
  if (extra.contains("labels")) {
    auto names = extra["labels"].get<std::vector<std::string>>();
    if (label < static_cast<int>(names.size())) out["label_name"] = names[static_cast<std::size_t>(label)];
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const Options& o, const std::string& param, const std::vector<double>& values) {
  const std::vector<std::string> known{"represent_size", "conv_size", "hidden_size",
                                       "learning_rate"};
  if (std::find(known.begin(), known.end(), param) == known.end()) {
    throw mrgnn::ConfigError("unknown sweep parameter '" + param +
                             "' (expected represent_size, conv_size, hidden_size or "
                             "learning_rate)");
  }
  if (values.empty()) throw mrgnn::ConfigError("sweep: --values must not be empty");

  mrgnn::LabeledPairDataset data = load_dataset(o);
  mrgnn::FeaturizerConfig featurizer = make_featurizer(o);
  fs::create_directories(o.out_dir);
  mrgnn::PreparedDataset prepared = mrgnn::prepare_dataset(data, featurizer);
  mrgnn::IndexSplit split =
      mrgnn::split_indices(static_cast<int>(prepared.pairs.size()), make_split_spec(o));

  json manifest{{"command", "sweep"},
                {"started_at", now_utc()},
                {"seed", o.seed},
                {"param", param},
                {"values", values},
                {"config", options_to_json(o)},
                {"data",
                 {{"path", o.data},
                  {"content_hash", file_hash_hex(o.data)},
                  {"summary", dataset_summary(data)}}}};
  write_text_file(o.out_dir + "/manifest.json", manifest.dump(2) + "\n");

  std::string csv;
  for (double value : values) {
    Options point = o;
    if (param == "represent_size") {
      point.gather_width = static_cast<int>(value);
    } else if (param == "conv_size") {
      point.conv_widths.assign(point.conv_widths.size(), static_cast<int>(value));
    } else if (param == "hidden_size") {
      point.hidden_width = static_cast<int>(value);
    } else {
      point.learning_rate = value;
    }

    mrgnn::MrGnnModel model(make_model_config(point, prepared.num_labels),
                            mrgnn::mix_seed(point.seed, 2));
    RunOutput run = run_training(point, prepared, split, model);
    if (csv.empty()) csv = "param,value," + run.test.report.csv_header() + "\n";
    std::string value_text =
        param == "learning_rate" ? fmt_double(value) : std::to_string(static_cast<int>(value));
    csv += param + "," + value_text + "," + run.test.report.csv_row() + "\n";
    std::cerr << "sweep point " << param << "=" << value_text << " done\n";
  }

  write_text_file(o.out_dir + "/sweep.csv", csv);
  std::cout << csv;
  return 0;
}

// Pre-scan for --config so file values are loaded before flags overwrite them.
std::optional<std::string> find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;

  try {
    if (auto config_path = find_config_arg(argc, argv)) apply_config_file(o, *config_path);
  } catch (const mrgnn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mrgnn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }

  CLI::App app{"train and evaluate graph pair interaction models"};
  app.require_subcommand(1);
  std::string config_path;  // consumed above; registered so CLI11 accepts it

  auto add_shared = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flags override it)");
    sub->add_option("--seed", o.seed, "base seed for every random choice");
    sub->add_option("--out-dir", o.out_dir, "artifact directory");
  };
  auto add_data = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--data", o.data, "pair TSV: smiles, smiles, score/label");
    if (required) opt->required();
    sub->add_option("--task", o.task, "binary | multiclass");
    sub->add_option("--threshold", o.threshold, "binary positive-score threshold");
    sub->add_flag("--balance", o.balance, "downsample every class to the minority size");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--ablation", o.ablation, "no-ilstm | no-slstm | no-wgcl | no-lstms");
    sub->add_flag("--linear-conv", o.linear_conv, "drop the conv nonlinearity");
    sub->add_option("--conv-widths", o.conv_widths, "conv layer widths")->delimiter(',');
    sub->add_option("--gather-width", o.gather_width, "graph state width");
    sub->add_option("--hidden-width", o.hidden_width, "readout hidden width");
    sub->add_option("--degree-cap", o.degree_cap, "degree bucket cap");
    sub->add_option("--feature-dim", o.feature_dim, "atom feature width (padded)");
  };
  auto add_training = [&](CLI::App* sub) {
    sub->add_option("--learning-rate", o.learning_rate, "optimizer step size");
    sub->add_option("--epochs", o.epochs, "maximum epochs");
    sub->add_option("--batch-size", o.batch_size, "minibatch size");
    sub->add_option("--patience", o.patience, "early-stop patience in epochs");
    sub->add_option("--split", o.split_mode, "9:1 | 60/20/20 | custom");
    sub->add_option("--train-frac", o.train_frac, "custom split: train fraction");
    sub->add_option("--val-frac", o.val_frac, "custom split: validation fraction");
    sub->add_option("--test-frac", o.test_frac, "custom split: test fraction");
    sub->add_option("--cache-dir", o.cache_dir, "feature cache directory (off when empty)");
  };

  int gen_pairs = 0;
  std::string gen_out = "synthetic.tsv";
  CLI::App* gen = app.add_subcommand("gen-synthetic", "write a labeled synthetic pair TSV");
  add_shared(gen);
  gen->add_option("--pairs", gen_pairs, "number of pairs")->required();
  gen->add_option("--out", gen_out, "output TSV path");

  CLI::App* feat = app.add_subcommand("featurize", "fill the feature cache for a dataset");
  add_shared(feat);
  add_data(feat, /*required=*/true);
  feat->add_option("--cache-dir", o.cache_dir, "cache directory (default out-dir/feature_cache)");
  // The cache keys on the featurizer fingerprint, so the width must be
  // settable here to prefill for a non-default model.
  feat->add_option("--feature-dim", o.feature_dim, "atom feature width (padded)");

  std::string resume_path;
  CLI::App* train = app.add_subcommand("train", "split, train, evaluate, write artifacts");
  add_shared(train);
  add_data(train, /*required=*/true);
  add_model(train);
  add_training(train);
  train->add_option("--resume", resume_path, "checkpoint to continue from (fresh optimizer)");

  std::string eval_checkpoint;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
  add_shared(evaluate);
  add_data(evaluate, /*required=*/true);
  evaluate->add_option("--checkpoint", eval_checkpoint, "trained model file")->required();

  std::string pred_checkpoint;
  std::string pred_a;
  std::string pred_b;
  CLI::App* predict = app.add_subcommand("predict", "classify one SMILES pair");
  predict->add_option("--checkpoint", pred_checkpoint, "trained model file")->required();
  predict->add_option("smiles_a", pred_a, "first molecule")->required();
  predict->add_option("smiles_b", pred_b, "second molecule")->required();

  std::string sweep_param;
  std::vector<double> sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "train/evaluate across one parameter grid");
  add_shared(sweep);
  add_data(sweep, /*required=*/true);
  add_model(sweep);
  add_training(sweep);
  sweep->add_option("--param", sweep_param,
                    "represent_size | conv_size | hidden_size | learning_rate")
      ->required();
  sweep->add_option("--values", sweep_values, "grid values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand(gen)) return cmd_gen_synthetic(o, gen_pairs, gen_out);
    if (app.got_subcommand(feat)) return cmd_featurize(o);
    if (app.got_subcommand(train)) return cmd_train(o, resume_path);
    if (app.got_subcommand(evaluate)) {
      return cmd_evaluate(o, eval_checkpoint, evaluate->count("--task") > 0,
                          evaluate->count("--threshold") > 0,
                          evaluate->count("--out-dir") > 0);
    }
    if (app.got_subcommand(predict)) return cmd_predict(pred_checkpoint, pred_a, pred_b);
    if (app.got_subcommand(sweep)) return cmd_sweep(o, sweep_param, sweep_values);
  } catch (const mrgnn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mrgnn::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const mrgnn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
