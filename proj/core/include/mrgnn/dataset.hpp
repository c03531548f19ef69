#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrgnn/featurize.hpp"
#include "mrgnn/graph.hpp"
#include "mrgnn/tensor.hpp"

namespace mrgnn {

class FeatureCache;

struct PairRecord {
  std::string smiles_a;
  std::string smiles_b;
  int label = 0;  // 0..num_labels-1
};

// Where a dataset came from and what was dropped on the way in. The counts
// satisfy rows_read == records + skipped_unparseable + discarded_midrange.
struct DatasetProvenance {
  std::string source;
  int threshold = 0;  // binary score threshold; 0 when not applicable
  std::size_t rows_read = 0;
  std::size_t skipped_unparseable = 0;
  std::size_t discarded_midrange = 0;
};

struct LabeledPairDataset {
  std::vector<PairRecord> records;
  int num_labels = 2;
  // Original label ids by dense index, for multiclass files (empty for
  // binary). Persist next to checkpoints so predictions map back.
  std::vector<std::string> label_names;
  DatasetProvenance provenance;
};

// One raw TSV line: smiles_a <TAB> smiles_b <TAB> integer.
struct PairFileRow {
  std::string smiles_a;
  std::string smiles_b;
  long long value = 0;
  std::size_t line = 0;  // 1-based
};

// Strict 3-column TSV. Malformed rows (column count, non-integer third
// column) throw DataError carrying the line number. Blank lines are skipped.
std::vector<PairFileRow> read_pair_file(const std::string& path);

void write_pair_file(const std::string& path, const std::vector<PairFileRow>& rows);

// Interaction scores to binary labels: score >= threshold -> 1, score == 0 ->
// 0, anything in between is discarded. Rows whose SMILES do not parse are
// skipped and counted. Scores outside 0..999 throw DataError with the line.
LabeledPairDataset load_cci(const std::string& path, int threshold);

// Multiclass labels re-indexed densely 0..k-1 in order of first appearance;
// the original ids are kept in label_names. Unparseable SMILES skipped.
LabeledPairDataset load_ddi(const std::string& path);

// Downsamples every class to the minority class size, keeping record order.
LabeledPairDataset balance_downsample(const LabeledPairDataset& data, std::uint64_t seed);

// Serializes a label map as JSON ({"labels":[...]}) for the sidecar file.
std::string label_map_to_json(const std::vector<std::string>& label_names);
std::vector<std::string> label_map_from_json(const std::string& text);

// Dataset with every distinct SMILES parsed and featurized once.
struct PreparedPair {
  int graph_a = 0;  // indices into graphs/features
  int graph_b = 0;
  int label = 0;
};

struct PreparedDataset {
  std::vector<MolecularGraph> graphs;
  std::vector<Tensor> features;  // parallel to graphs
  std::vector<PreparedPair> pairs;
  int num_labels = 2;
};

// Parses and featurizes each distinct SMILES once (records are pre-screened
// by the loaders, so parse failures here are internal errors and propagate).
// With a cache, feature matrices are reused/stored per (SMILES, featurizer).
PreparedDataset prepare_dataset(const LabeledPairDataset& data,
                                const FeaturizerConfig& featurizer,
                                FeatureCache* cache = nullptr);

}  // namespace mrgnn
