#include "mrgnn/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include <json.hpp>

#include "mrgnn/errors.hpp"

namespace mrgnn {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": got " + std::to_string(a) + " scores for " +
                     std::to_string(b) + " labels");
  }
}

// Per-class one-vs-rest counts derived from a confusion matrix.
struct ClassCounts {
  std::int64_t tp = 0;
  std::int64_t actual = 0;     // row sum
  std::int64_t predicted = 0;  // column sum
};

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_same_size(scores.size(), labels.size(), "roc_auc");
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++n_pos;
    } else if (labels[i] == 0) {
      ++n_neg;
    } else {
      throw ValidationError("roc_auc: label " + std::to_string(labels[i]) + " at index " +
                            std::to_string(i) + " is not 0/1");
    }
  }
  if (n_pos == 0 || n_neg == 0) {
    throw MetricError("roc_auc: undefined, only one class present (" +
                      std::to_string(n_pos) + " positives, " + std::to_string(n_neg) +
                      " negatives)");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average rank within each tie group; every term is a half-integer, so the
  // sums below are exact and match the pair-counting oracle bit for bit.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) positive_rank_sum += avg_rank;
    }
    i = j;
  }
  double numer = positive_rank_sum -
                 static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return numer / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MetricsReport confusion_and_aggregates(std::span<const int> predictions,
                                       std::span<const int> labels, int k) {
  if (k < 2) throw ValidationError("confusion_and_aggregates: k must be at least 2");
  check_same_size(predictions.size(), labels.size(), "confusion_and_aggregates");
  if (labels.empty()) throw MetricError("confusion_and_aggregates: no samples");

  MetricsReport report;
  report.task = (k == 2) ? TaskKind::Binary : TaskKind::Multiclass;
  report.num_labels = k;
  report.sample_count = static_cast<std::int64_t>(labels.size());
  report.confusion.assign(static_cast<std::size_t>(k),
                          std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));

  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto in_range = [k](int v) { return v >= 0 && v < k; };
    if (!in_range(labels[i])) {
      throw ValidationError("label " + std::to_string(labels[i]) + " at index " +
                            std::to_string(i) + " outside 0.." + std::to_string(k - 1));
    }
    if (!in_range(predictions[i])) {
      throw ValidationError("prediction " + std::to_string(predictions[i]) + " at index " +
                            std::to_string(i) + " outside 0.." + std::to_string(k - 1));
    }
    ++report.confusion[static_cast<std::size_t>(labels[i])]
                      [static_cast<std::size_t>(predictions[i])];
  }

  std::vector<ClassCounts> counts(static_cast<std::size_t>(k));
  std::int64_t correct = 0;
  for (int t = 0; t < k; ++t) {
    for (int p = 0; p < k; ++p) {
      std::int64_t n = report.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
      counts[static_cast<std::size_t>(t)].actual += n;
      counts[static_cast<std::size_t>(p)].predicted += n;
      if (t == p) {
        counts[static_cast<std::size_t>(t)].tp = n;
        correct += n;
      }
    }
  }

  auto class_recall = [&](int c) {
    const auto& cc = counts[static_cast<std::size_t>(c)];
    return cc.actual > 0 ? static_cast<double>(cc.tp) / static_cast<double>(cc.actual) : 0.0;
  };
  auto class_precision = [&](int c) {
    const auto& cc = counts[static_cast<std::size_t>(c)];
    return cc.predicted > 0 ? static_cast<double>(cc.tp) / static_cast<double>(cc.predicted)
                            : 0.0;
  };
  auto class_f1 = [&](int c) {
    double p = class_precision(c);
    double r = class_recall(c);
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  };

  report.micro_avg = static_cast<double>(correct) / static_cast<double>(labels.size());
  double sum_r = 0.0;
  double sum_p = 0.0;
  double sum_f = 0.0;
  for (int c = 0; c < k; ++c) {
    sum_r += class_recall(c);
    sum_p += class_precision(c);
    sum_f += class_f1(c);
  }
  report.macro_recall = sum_r / k;
  report.macro_precision = sum_p / k;
  report.macro_f1 = sum_f / k;

  if (k == 2) {
    report.accuracy = report.micro_avg;
    report.recall = class_recall(1);
    report.precision = class_precision(1);
    report.f1 = class_f1(1);
  }
  return report;
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_same_size(scores.size(), labels.size(), "average_precision");
  std::int64_t n_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ValidationError("average_precision: label at index " + std::to_string(i) +
                            " is not 0/1");
    }
    n_pos += labels[i];
  }
  if (n_pos == 0) throw MetricError("average_precision: no positives");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Step sum over recall increments: each positive hit contributes the
  // precision at its rank, weighted 1/n_pos.
  double ap = 0.0;
  std::int64_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 1) {
      ++tp;
      ap += static_cast<double>(tp) / static_cast<double>(rank + 1) /
            static_cast<double>(n_pos);
    }
  }
  return ap;
}

double auprc_macro(const Tensor& scores, std::span<const int> labels,
                   std::vector<int>* skipped) {
  if (static_cast<std::size_t>(scores.rows()) != labels.size()) {
    throw ShapeError("auprc: score matrix has " + std::to_string(scores.rows()) +
                     " rows for " + std::to_string(labels.size()) + " labels");
  }
  int k = scores.cols();
  std::vector<std::int64_t> present(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      throw ValidationError("auprc: label " + std::to_string(labels[i]) + " at index " +
                            std::to_string(i) + " outside 0.." + std::to_string(k - 1));
    }
    ++present[static_cast<std::size_t>(labels[i])];
  }

  double sum = 0.0;
  int used = 0;
  for (int c = 0; c < k; ++c) {
    if (present[static_cast<std::size_t>(c)] == 0) {
      if (skipped) skipped->push_back(c);
      continue;
    }
    std::vector<double> column(labels.size());
    std::vector<int> one_vs_rest(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      column[i] = scores.at(static_cast<int>(i), c);
      one_vs_rest[i] = labels[i] == c ? 1 : 0;
    }
    sum += average_precision(column, one_vs_rest);
    ++used;
  }
  if (used == 0) throw MetricError("auprc: no class present in labels");
  return sum / used;
}

MetricsReport evaluate_binary(std::span<const double> positive_scores,
                              std::span<const int> predictions,
                              std::span<const int> labels) {
  MetricsReport report = confusion_and_aggregates(predictions, labels, 2);
  report.task = TaskKind::Binary;
  report.auc = roc_auc(positive_scores, labels);
  return report;
}

MetricsReport evaluate_multiclass(const Tensor& scores, std::span<const int> predictions,
                                  std::span<const int> labels, int k) {
  MetricsReport report = confusion_and_aggregates(predictions, labels, k);
  report.task = TaskKind::Multiclass;
  report.auprc = auprc_macro(scores, labels, &report.auprc_skipped);
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["task"] = task == TaskKind::Binary ? "binary" : "multiclass";
  j["num_labels"] = num_labels;
  j["sample_count"] = sample_count;
  j["confusion"] = confusion;
  if (task == TaskKind::Binary) {
    j["auc"] = auc;
    j["accuracy"] = accuracy;
    j["recall"] = recall;
    j["precision"] = precision;
    j["f1"] = f1;
  } else {
    j["micro_avg"] = micro_avg;
    j["macro_recall"] = macro_recall;
    j["macro_precision"] = macro_precision;
    j["macro_f1"] = macro_f1;
    j["auprc"] = auprc;
    j["auprc_skipped_classes"] = auprc_skipped;
  }
  return j.dump(2);
}

std::string MetricsReport::csv_header() const {
  return task == TaskKind::Binary ? "auc,accuracy,recall,f1"
                                  : "micro_avg,macro_recall,macro_precision,macro_f1,auprc";
}

std::string MetricsReport::csv_row() const {
  if (task == TaskKind::Binary) {
    return format_double(auc) + "," + format_double(accuracy) + "," + format_double(recall) +
           "," + format_double(f1);
  }
  return format_double(micro_avg) + "," + format_double(macro_recall) + "," +
         format_double(macro_precision) + "," + format_double(macro_f1) + "," +
         format_double(auprc);
}

}  // namespace mrgnn
