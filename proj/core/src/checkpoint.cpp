#include "mrgnn/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "byte_io.hpp"
#include "mrgnn/errors.hpp"

namespace mrgnn {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'M', 'R', 'G', 'N', 'N', 'C', 'K', '1'};
constexpr int kVersion = 1;

json ablation_to_json(const AblationFlags& a) {
  return json{{"summary_lstm", a.use_summary_lstm},
              {"pair_lstm", a.use_pair_lstm},
              {"weighted_conv", a.weighted_conv}};
}

json model_to_json_obj(const ModelConfig& c) {
  return json{{"feature_dim", c.feature_dim},
              {"conv_widths", c.conv_widths},
              {"gather_width", c.gather_width},
              {"hidden_width", c.hidden_width},
              {"num_labels", c.num_labels},
              {"degree_cap", c.degree_cap},
              {"ablation", ablation_to_json(c.ablation)},
              {"conv_activation", c.conv_activation}};
}

json featurizer_to_json_obj(const FeaturizerConfig& c) {
  return json{{"elements", c.element_vocabulary}, {"max_degree", c.max_degree},
              {"charge_min", c.charge_min},       {"charge_max", c.charge_max},
              {"max_h_count", c.max_h_count},     {"output_dim", c.output_dim}};
}

template <typename T>
void pick(const json& obj, const char* key, T& into) {
  if (auto it = obj.find(key); it != obj.end()) into = it->get<T>();
}

ModelConfig model_from_json_obj(const json& obj) {
  // find() on a non-object silently matches nothing, which would turn
  // garbage into a default config.
  if (!obj.is_object()) throw DataError("model config: expected a JSON object");
  ModelConfig c;
  pick(obj, "feature_dim", c.feature_dim);
  pick(obj, "conv_widths", c.conv_widths);
  pick(obj, "gather_width", c.gather_width);
  pick(obj, "hidden_width", c.hidden_width);
  pick(obj, "num_labels", c.num_labels);
  pick(obj, "degree_cap", c.degree_cap);
  pick(obj, "conv_activation", c.conv_activation);
  if (auto it = obj.find("ablation"); it != obj.end()) {
    pick(*it, "summary_lstm", c.ablation.use_summary_lstm);
    pick(*it, "pair_lstm", c.ablation.use_pair_lstm);
    pick(*it, "weighted_conv", c.ablation.weighted_conv);
  }
  return c;
}

FeaturizerConfig featurizer_from_json_obj(const json& obj) {
  if (!obj.is_object()) throw DataError("featurizer config: expected a JSON object");
  FeaturizerConfig c;
  pick(obj, "elements", c.element_vocabulary);
  pick(obj, "max_degree", c.max_degree);
  pick(obj, "charge_min", c.charge_min);
  pick(obj, "charge_max", c.charge_max);
  pick(obj, "max_h_count", c.max_h_count);
  pick(obj, "output_dim", c.output_dim);
  return c;
}

json parse_json(const std::string& text, const char* what) {
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) {
    throw DataError(std::string("invalid JSON in ") + what);
  }
  return parsed;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& config) {
  return model_to_json_obj(config).dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  try {
    return model_from_json_obj(parse_json(text, "model config"));
  } catch (const json::exception& e) {
    throw DataError(std::string("model config: ") + e.what());
  }
}

std::string featurizer_config_to_json(const FeaturizerConfig& config) {
  return featurizer_to_json_obj(config).dump();
}

FeaturizerConfig featurizer_config_from_json(const std::string& text) {
  try {
    return featurizer_from_json_obj(parse_json(text, "featurizer config"));
  } catch (const json::exception& e) {
    throw DataError(std::string("featurizer config: ") + e.what());
  }
}

Checkpoint snapshot(const MrGnnModel& model, const FeaturizerConfig& featurizer,
                    std::string extra_json) {
  Checkpoint ck;
  ck.model = model.config();
  ck.featurizer = featurizer;
  ck.extra_json = std::move(extra_json);
  model.parameters().for_each(
      [&](const std::string& name, const Tensor& t) { ck.tensors.emplace_back(name, t); });
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  json manifest{{"format", "mrgnn-checkpoint"},
                {"version", kVersion},
                {"model", model_to_json_obj(checkpoint.model)},
                {"featurizer", featurizer_to_json_obj(checkpoint.featurizer)},
                {"extra", parse_json(checkpoint.extra_json, "checkpoint metadata")}};
  std::string manifest_text = manifest.dump();

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  detail::append_u64(out, manifest_text.size());
  out += manifest_text;
  detail::append_u64(out, checkpoint.tensors.size());
  for (const auto& [name, tensor] : checkpoint.tensors) {
    detail::append_u64(out, name.size());
    out += name;
    detail::append_u64(out, static_cast<std::uint64_t>(tensor.rows()));
    detail::append_u64(out, static_cast<std::uint64_t>(tensor.cols()));
    for (double v : tensor.values()) detail::append_f64(out, v);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  file.flush();
  if (!file) throw IoError("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << file.rdbuf();
  std::string bytes = buf.str();

  if (bytes.size() < sizeof(kMagic) ||
      bytes.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path + " is not a checkpoint file (bad magic)");
  }

  std::string body = bytes.substr(sizeof(kMagic));
  detail::ByteCursor cur(body, "checkpoint " + path);
  std::uint64_t manifest_len = cur.u64("manifest length");
  std::string manifest_text = cur.str(manifest_len, "manifest");

  Checkpoint ck;
  try {
    json manifest = parse_json(manifest_text, "checkpoint manifest");
    if (manifest.value("version", 0) != kVersion) {
      throw DataError("unsupported checkpoint version " +
                      std::to_string(manifest.value("version", 0)));
    }
    ck.model = model_from_json_obj(manifest.at("model"));
    ck.featurizer = featurizer_from_json_obj(manifest.at("featurizer"));
    ck.extra_json = manifest.value("extra", json::object()).dump();
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint manifest: ") + e.what());
  }

  std::uint64_t count = cur.u64("tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = cur.str(cur.u64("name length"), "tensor name");
    auto rows = static_cast<std::int64_t>(cur.u64("tensor rows"));
    auto cols = static_cast<std::int64_t>(cur.u64("tensor cols"));
    if (rows <= 0 || cols <= 0 || rows > (1 << 24) || cols > (1 << 24)) {
      throw DataError("checkpoint tensor " + name + " has implausible shape " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(rows * cols));
    for (std::int64_t k = 0; k < rows * cols; ++k) data.push_back(cur.f64("tensor data"));
    ck.tensors.emplace_back(std::move(name), Tensor(static_cast<int>(rows),
                                                    static_cast<int>(cols),
                                                    std::move(data)));
  }
  if (!cur.exhausted()) throw DataError("trailing bytes after checkpoint payload");
  return ck;
}

MrGnnModel restore_model(const Checkpoint& checkpoint) {
  MrGnnModel model(checkpoint.model, /*seed=*/0);
  ParameterStore& params = model.parameters();
  if (checkpoint.tensors.size() != params.count()) {
    throw DataError("checkpoint has " + std::to_string(checkpoint.tensors.size()) +
                    " tensors but the model has " + std::to_string(params.count()) +
                    " parameters");
  }
  for (const auto& [name, tensor] : checkpoint.tensors) {
    if (!params.contains(name)) {
      throw DataError("checkpoint tensor " + name + " matches no model parameter");
    }
    Tensor& dest = params.get(name);
    if (!dest.same_shape(tensor)) {
      throw DataError("checkpoint tensor " + name + " is " + tensor.shape_str() +
                      " but the model expects " + dest.shape_str());
    }
    bool track = dest.requires_grad;
    dest = tensor;
    dest.requires_grad = track;
  }
  return model;
}

}  // namespace mrgnn
