#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mrgnn/featurize.hpp"
#include "mrgnn/model.hpp"
#include "mrgnn/tensor.hpp"

namespace mrgnn {

// One trained model on disk: a JSON manifest (model + featurizer config plus
// free-form metadata) followed by every parameter tensor by name. The float64
// payloads round-trip bit-exactly; the byte layout is little-endian and
// versioned by the leading magic.
struct Checkpoint {
  ModelConfig model;
  FeaturizerConfig featurizer;
  std::string extra_json = "{}";  // JSON object: label maps, provenance, ...
  std::vector<std::pair<std::string, Tensor>> tensors;  // store order
};

// Captures the model's current parameters (copies, store order).
Checkpoint snapshot(const MrGnnModel& model, const FeaturizerConfig& featurizer,
                    std::string extra_json = "{}");

// Throws IoError on filesystem failures, DataError on malformed content.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

// Builds a model from the checkpoint config and overwrites its parameters.
// Every tensor must match an existing parameter's shape and the name sets
// must coincide; mismatches throw DataError naming the parameter.
MrGnnModel restore_model(const Checkpoint& checkpoint);

// JSON codecs shared with the CLI config loader. The from-variants start from
// defaults and override any key present, so partial objects are valid input.
std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);
std::string featurizer_config_to_json(const FeaturizerConfig& config);
FeaturizerConfig featurizer_config_from_json(const std::string& text);

}  // namespace mrgnn
