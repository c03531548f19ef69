#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrgnn/featurize.hpp"
#include "mrgnn/tensor.hpp"

namespace mrgnn {

// On-disk store of featurized molecules, one file per (SMILES, featurizer
// config) pair, content-addressed by hash. Entries verify their key on read,
// so hash collisions and corrupt files degrade to misses (the caller
// re-featurizes and the store overwrites), never to wrong features. A changed
// featurizer config changes every address, forcing a full rebuild.
class FeatureCache {
 public:
  // Creates `directory` when missing.
  FeatureCache(std::string directory, const FeaturizerConfig& config);

  // Returns the cached matrix, or nullopt on miss. Corrupt entries count as
  // misses and leave a note in warnings().
  std::optional<Tensor> lookup(const std::string& smiles);
  void store(const std::string& smiles, const Tensor& features);

  std::size_t hit_count() const { return hits_; }
  std::size_t miss_count() const { return misses_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::string entry_path(const std::string& smiles) const;

 private:
  std::string dir_;
  std::string fingerprint_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
  std::vector<std::string> warnings_;
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace mrgnn
