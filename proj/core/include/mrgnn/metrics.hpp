#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrgnn/tensor.hpp"

namespace mrgnn {

enum class TaskKind { Binary, Multiclass };

// Evaluation summary for one dataset pass. Binary tasks fill the first metric
// block, multiclass tasks the second; the confusion matrix is always present.
// Serializes to JSON and to a one-row CSV whose column order follows the
// conventional result-table layout for each task.
struct MetricsReport {
  TaskKind task = TaskKind::Binary;
  int num_labels = 2;
  std::int64_t sample_count = 0;
  // confusion[t][p]: samples with true label t predicted as p.
  std::vector<std::vector<std::int64_t>> confusion;

  // Binary (positive class = label 1).
  double auc = 0.0;
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;

  // Multiclass.
  double micro_avg = 0.0;
  double macro_recall = 0.0;
  double macro_precision = 0.0;
  double macro_f1 = 0.0;
  double auprc = 0.0;
  std::vector<int> auprc_skipped;  // classes absent from labels, excluded

  std::string to_json() const;
  std::string csv_header() const;
  std::string csv_row() const;
};

// Probability that a uniformly random positive outscores a uniformly random
// negative, ties counted 1/2 (rank formulation). Exact: every intermediate is
// a sum of half-integers. Throws MetricError unless both classes appear.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Confusion matrix plus micro/macro aggregates. Per-class precision or recall
// with an empty denominator counts as 0; per-class F1 is 0 when precision and
// recall are both 0; macro values are unweighted means over all k classes.
// Binary fields are filled when k == 2. Throws ValidationError on labels or
// predictions outside 0..k-1.
MetricsReport confusion_and_aggregates(std::span<const int> predictions,
                                       std::span<const int> labels, int k);

// Average precision of one ranked list: sum of (R_n - R_{n-1}) * P_n over the
// list sorted by score descending (ties kept in input order). Throws
// MetricError when no positive is present.
double average_precision(std::span<const double> scores, std::span<const int> labels);

// Macro average precision over the classes present in `labels`, scoring class
// c by column c of `scores` (q x k). Absent classes are excluded and reported
// through `skipped` when given. Throws MetricError if no class is present.
double auprc_macro(const Tensor& scores, std::span<const int> labels,
                   std::vector<int>* skipped = nullptr);

// Assembles the full report for a binary task; `positive_scores` are the
// predicted probabilities of class 1.
MetricsReport evaluate_binary(std::span<const double> positive_scores,
                              std::span<const int> predictions,
                              std::span<const int> labels);

// Assembles the full report for a k-class task from per-class scores (q x k).
MetricsReport evaluate_multiclass(const Tensor& scores, std::span<const int> predictions,
                                  std::span<const int> labels, int k);

}  // namespace mrgnn
