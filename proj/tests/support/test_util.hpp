#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mrgnn/graph.hpp"
#include "mrgnn/model.hpp"
#include "mrgnn/rng.hpp"
#include "mrgnn/tensor.hpp"

namespace testutil {

// Self-deleting scratch directory for file round-trip tests.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Connected random molecular graph: random spanning tree plus a few extra
// edges, elements drawn from {C, N, O, S}. Degrees stay below the default
// featurizer cap.
mrgnn::MolecularGraph random_graph(mrgnn::Rng& rng, int min_nodes, int max_nodes);

// I.i.d. uniform features in [-1, 1]. Continuous values keep the max pools
// away from exact ties, which finite differences cannot handle.
mrgnn::Tensor random_features(mrgnn::Rng& rng, int nodes, int dim);

struct GradCheckReport {
  double max_rel_err = 0.0;
  long long checked = 0;
  std::string worst_param;
  int worst_row = 0;
  int worst_col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central-difference check of d(cross entropy)/d(theta) for every parameter
// element against the tape gradient on one pair. Relative error uses a
// denominator floor so near-zero gradients compare absolutely.
GradCheckReport finite_difference_check(mrgnn::MrGnnModel& model,
                                        const mrgnn::MolecularGraph& a, const mrgnn::Tensor& fa,
                                        const mrgnn::MolecularGraph& b, const mrgnn::Tensor& fb,
                                        int label, double eps = 1e-5);

// Pair-counting AUC: mean over (positive, negative) pairs of
// [score_p > score_n] + 0.5 [score_p == score_n]. Quadratic and obviously
// correct; the production implementation must agree exactly.
double auc_bruteforce(std::span<const double> scores, std::span<const int> labels);

// The whole paired forward pass redone with plain loops over std::vector,
// no tape, reading the same parameter store. Returns the probability row.
std::vector<double> straightline_forward(const mrgnn::MrGnnModel& model,
                                         const mrgnn::MolecularGraph& a, const mrgnn::Tensor& fa,
                                         const mrgnn::MolecularGraph& b, const mrgnn::Tensor& fb);

// Motif predicates redone by direct search, independent of the generator's
// helpers. Cycle membership comes from edge-deletion reachability.
bool oracle_has_carboxyl(const mrgnn::MolecularGraph& g);
bool oracle_has_ring_hydroxyl(const mrgnn::MolecularGraph& g);

// True if the two byte streams are identical (used for determinism checks).
bool files_identical(const std::string& path_a, const std::string& path_b);

}  // namespace testutil
