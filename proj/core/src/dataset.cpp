#include "mrgnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "mrgnn/errors.hpp"
#include "mrgnn/feature_cache.hpp"
#include "mrgnn/rng.hpp"
#include "mrgnn/smiles.hpp"

namespace mrgnn {

namespace {

bool parses(const std::string& smiles) {
  try {
    parse_smiles(smiles);
    return true;
  } catch (const SmilesError&) {
    return false;
  }
}

}  // namespace

std::vector<PairFileRow> read_pair_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open " + path);

  std::vector<PairFileRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    PairFileRow row;
    row.line = line_no;
    std::size_t tab1 = line.find('\t');
    std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        line.find('\t', tab2 + 1) != std::string::npos) {
      throw DataError(path + ": expected 3 tab-separated columns", line_no);
    }
    row.smiles_a = line.substr(0, tab1);
    row.smiles_b = line.substr(tab1 + 1, tab2 - tab1 - 1);
    std::string third = line.substr(tab2 + 1);
    auto [end, ec] = std::from_chars(third.data(), third.data() + third.size(), row.value);
    if (ec != std::errc() || end != third.data() + third.size()) {
      throw DataError(path + ": third column '" + third + "' is not an integer", line_no);
    }
    if (row.smiles_a.empty() || row.smiles_b.empty()) {
      throw DataError(path + ": empty SMILES column", line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_pair_file(const std::string& path, const std::vector<PairFileRow>& rows) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  for (const PairFileRow& row : rows) {
    file << row.smiles_a << '\t' << row.smiles_b << '\t' << row.value << '\n';
  }
  file.flush();
  if (!file) throw IoError("write failed for " + path);
}

LabeledPairDataset load_cci(const std::string& path, int threshold) {
  if (threshold < 1 || threshold > 999) {
    throw ConfigError("score threshold " + std::to_string(threshold) +
                      " outside 1..999");
  }
  LabeledPairDataset data;
  data.num_labels = 2;
  data.provenance.source = path;
  data.provenance.threshold = threshold;

  for (PairFileRow& row : read_pair_file(path)) {
    ++data.provenance.rows_read;
    if (row.value < 0 || row.value > 999) {
      throw DataError(path + ": score " + std::to_string(row.value) + " outside 0..999",
                      row.line);
    }
    int label;
    if (row.value >= threshold) {
      label = 1;
    } else if (row.value == 0) {
      label = 0;
    } else {
      ++data.provenance.discarded_midrange;
      continue;
    }
    if (!parses(row.smiles_a) || !parses(row.smiles_b)) {
      ++data.provenance.skipped_unparseable;
      continue;
    }
    data.records.push_back({std::move(row.smiles_a), std::move(row.smiles_b), label});
  }
  if (data.records.empty()) throw DataError(path + ": no usable records");
  return data;
}

LabeledPairDataset load_ddi(const std::string& path) {
  LabeledPairDataset data;
  data.provenance.source = path;

  std::unordered_map<long long, int> dense;
  for (PairFileRow& row : read_pair_file(path)) {
    ++data.provenance.rows_read;
    if (row.value < 0) {
      throw DataError(path + ": negative label " + std::to_string(row.value), row.line);
    }
    if (!parses(row.smiles_a) || !parses(row.smiles_b)) {
      ++data.provenance.skipped_unparseable;
      continue;
    }
    auto [it, inserted] = dense.emplace(row.value, static_cast<int>(data.label_names.size()));
    if (inserted) data.label_names.push_back(std::to_string(row.value));
    data.records.push_back({std::move(row.smiles_a), std::move(row.smiles_b), it->second});
  }
  if (data.records.empty()) throw DataError(path + ": no usable records");
  data.num_labels = static_cast<int>(data.label_names.size());
  if (data.num_labels < 2) {
    throw DataError(path + ": only one distinct label, need at least 2");
  }
  return data;
}

LabeledPairDataset balance_downsample(const LabeledPairDataset& data, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_label(static_cast<std::size_t>(data.num_labels));
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    by_label[static_cast<std::size_t>(data.records[i].label)].push_back(i);
  }
  std::size_t minority = data.records.size();
  for (const auto& group : by_label) {
    if (!group.empty()) minority = std::min(minority, group.size());
  }

  Rng rng(mix_seed(seed, 0xba1a));
  std::vector<bool> keep(data.records.size(), false);
  for (auto& group : by_label) {
    rng.shuffle(group);
    for (std::size_t i = 0; i < std::min(minority, group.size()); ++i) keep[group[i]] = true;
  }

  LabeledPairDataset out;
  out.num_labels = data.num_labels;
  out.label_names = data.label_names;
  out.provenance = data.provenance;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    if (keep[i]) out.records.push_back(data.records[i]);
  }
  return out;
}

std::string label_map_to_json(const std::vector<std::string>& label_names) {
  return nlohmann::json{{"labels", label_names}}.dump(2);
}

std::vector<std::string> label_map_from_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text).at("labels").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("label map: ") + e.what());
  }
}

PreparedDataset prepare_dataset(const LabeledPairDataset& data,
                                const FeaturizerConfig& featurizer, FeatureCache* cache) {
  featurizer.check();
  PreparedDataset out;
  out.num_labels = data.num_labels;

  std::unordered_map<std::string, int> index;
  auto intern = [&](const std::string& smiles) {
    if (auto it = index.find(smiles); it != index.end()) return it->second;
    int id = static_cast<int>(out.graphs.size());
    out.graphs.push_back(parse_smiles(smiles));
    if (cache) {
      if (auto hit = cache->lookup(smiles)) {
        out.features.push_back(std::move(*hit));
      } else {
        Tensor f = featurize(out.graphs.back(), featurizer);
        cache->store(smiles, f);
        out.features.push_back(std::move(f));
      }
    } else {
      out.features.push_back(featurize(out.graphs.back(), featurizer));
    }
    index.emplace(smiles, id);
    return id;
  };

  for (const PairRecord& rec : data.records) {
    PreparedPair pair;
    pair.graph_a = intern(rec.smiles_a);
    pair.graph_b = intern(rec.smiles_b);
    pair.label = rec.label;
    out.pairs.push_back(pair);
  }
  return out;
}

}  // namespace mrgnn
