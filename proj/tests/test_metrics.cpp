#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "mrgnn/errors.hpp"
#include "mrgnn/metrics.hpp"
#include "mrgnn/rng.hpp"
#include "test_util.hpp"

using mrgnn::MetricsReport;
using mrgnn::Tensor;

namespace {

std::vector<double> d(std::initializer_list<double> xs) { return xs; }
std::vector<int> l(std::initializer_list<int> xs) { return xs; }

}  // namespace

TEST_CASE("roc auc on hand fixtures") {
  CHECK(mrgnn::roc_auc(d({0.9, 0.8, 0.3, 0.1}), l({1, 1, 0, 0})) == 1.0);
  CHECK(mrgnn::roc_auc(d({0.9, 0.8, 0.3, 0.1}), l({0, 0, 1, 1})) == 0.0);
  CHECK(mrgnn::roc_auc(d({0.9, 0.8, 0.3, 0.1}), l({1, 0, 0, 1})) == 0.5);
  CHECK(mrgnn::roc_auc(d({0.9, 0.8, 0.7}), l({1, 0, 1})) == 0.5);
  // all scores equal: pure coin flip
  CHECK(mrgnn::roc_auc(d({0.4, 0.4, 0.4, 0.4}), l({1, 0, 1, 0})) == 0.5);
  // tie between one positive and one negative counts half
  CHECK(mrgnn::roc_auc(d({0.7, 0.7}), l({1, 0})) == 0.5);
}

TEST_CASE("roc auc input validation") {
  CHECK_THROWS_AS(mrgnn::roc_auc(d({0.5, 0.6}), l({1, 1})), mrgnn::MetricError);
  CHECK_THROWS_AS(mrgnn::roc_auc(d({0.5, 0.6}), l({0, 0})), mrgnn::MetricError);
  CHECK_THROWS_AS(mrgnn::roc_auc(d({}), l({})), mrgnn::MetricError);
  CHECK_THROWS_AS(mrgnn::roc_auc(d({0.5, 0.6}), l({0, 2})), mrgnn::ValidationError);
  CHECK_THROWS_AS(mrgnn::roc_auc(d({0.5}), l({0, 1})), mrgnn::ShapeError);
}

TEST_CASE("roc auc equals the pair-counting oracle, bit for bit") {
  mrgnn::Rng rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    int n = static_cast<int>(rng.range(2, 40));
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<int> labels(static_cast<std::size_t>(n));
    bool discrete = trial % 2 == 0;  // alternate heavy ties / continuous
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] =
          discrete ? static_cast<double>(rng.below(5)) * 0.25 : rng.uniform();
      labels[static_cast<std::size_t>(i)] = rng.chance(0.5) ? 1 : 0;
    }
    bool has_pos = false;
    bool has_neg = false;
    for (int lab : labels) (lab == 1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) continue;

    CAPTURE(trial);
    CHECK(mrgnn::roc_auc(scores, labels) == testutil::auc_bruteforce(scores, labels));
  }
}

TEST_CASE("roc auc is invariant under strictly monotone transforms") {
  mrgnn::Rng rng(77);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    scores.push_back(static_cast<double>(rng.below(8)));  // plenty of ties
    labels.push_back(rng.chance(0.4) ? 1 : 0);
  }
  labels[0] = 1;
  labels[1] = 0;

  double base = mrgnn::roc_auc(scores, labels);

  std::vector<double> affine = scores;
  for (double& s : affine) s = 3.0 * s + 11.0;
  CHECK(mrgnn::roc_auc(affine, labels) == base);

  std::vector<double> squashed = scores;
  for (double& s : squashed) s = 1.0 / (1.0 + std::exp(-s));
  CHECK(mrgnn::roc_auc(squashed, labels) == base);
}

TEST_CASE("swapping the classes complements the auc") {
  mrgnn::Rng rng(99);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(i % 3 == 0 ? 1 : 0);
  }
  std::vector<int> flipped = labels;
  for (int& lab : flipped) lab = 1 - lab;

  double a = mrgnn::roc_auc(scores, labels);
  double b = mrgnn::roc_auc(scores, flipped);
  CHECK(a + b == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("average precision fixtures") {
  // ranked: pos, neg, pos -> (1/1 + 2/3) / 2 = 5/6
  CHECK(mrgnn::average_precision(d({0.9, 0.8, 0.7}), l({1, 0, 1})) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(mrgnn::average_precision(d({0.9, 0.8, 0.7}), l({1, 1, 1})) == 1.0);
  CHECK(mrgnn::average_precision(d({0.9, 0.8}), l({0, 1})) == 0.5);
  // perfect ranking
  CHECK(mrgnn::average_precision(d({0.9, 0.8, 0.2, 0.1}), l({1, 1, 0, 0})) == 1.0);
  // worst ranking of one positive among four
  CHECK(mrgnn::average_precision(d({0.9, 0.8, 0.7, 0.1}), l({0, 0, 0, 1})) == 0.25);

  CHECK_THROWS_AS(mrgnn::average_precision(d({0.5}), l({0})), mrgnn::MetricError);
}

TEST_CASE("average precision handles score ties by input order") {
  // equal scores: stable sort keeps input order, so the positive at index 0
  // stays ranked first
  CHECK(mrgnn::average_precision(d({0.5, 0.5}), l({1, 0})) == 1.0);
  CHECK(mrgnn::average_precision(d({0.5, 0.5}), l({0, 1})) == 0.5);
}

TEST_CASE("confusion matrix and aggregates on the three-class fixture") {
  // true:      0 0 1 1 2 2
  // predicted: 0 0 1 2 0 2
  std::vector<int> labels = {0, 0, 1, 1, 2, 2};
  std::vector<int> preds = {0, 0, 1, 2, 0, 2};
  MetricsReport report = mrgnn::confusion_and_aggregates(preds, labels, 3);

  REQUIRE(report.confusion.size() == 3);
  CHECK(report.confusion[0] == std::vector<std::int64_t>{2, 0, 0});
  CHECK(report.confusion[1] == std::vector<std::int64_t>{0, 1, 1});
  CHECK(report.confusion[2] == std::vector<std::int64_t>{1, 0, 1});

  CHECK(report.micro_avg == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  CHECK(report.macro_recall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // precisions: 2/3, 1/1, 1/2 -> macro 13/18
  CHECK(report.macro_precision == doctest::Approx(13.0 / 18.0).epsilon(1e-15));
  CHECK(report.sample_count == 6);
  CHECK(report.task == mrgnn::TaskKind::Multiclass);
}

TEST_CASE("binary aggregates and zero-denominator conventions") {
  // tp=2 fn=1 fp=1 tn=2
  std::vector<int> labels = {1, 1, 1, 0, 0, 0};
  std::vector<int> preds = {1, 1, 0, 1, 0, 0};
  MetricsReport report = mrgnn::confusion_and_aggregates(preds, labels, 2);
  CHECK(report.accuracy == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  CHECK(report.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(report.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(report.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(report.task == mrgnn::TaskKind::Binary);

  // nothing predicted positive: precision, recall, f1 all 0 rather than NaN
  std::vector<int> all_neg = {0, 0, 0, 0};
  std::vector<int> mixed = {1, 1, 0, 0};
  MetricsReport degenerate = mrgnn::confusion_and_aggregates(all_neg, mixed, 2);
  CHECK(degenerate.precision == 0.0);
  CHECK(degenerate.recall == 0.0);
  CHECK(degenerate.f1 == 0.0);

  CHECK_THROWS_AS(mrgnn::confusion_and_aggregates(l({}), l({}), 2), mrgnn::MetricError);
  CHECK_THROWS_AS(mrgnn::confusion_and_aggregates(l({2}), l({0}), 2), mrgnn::ValidationError);
  CHECK_THROWS_AS(mrgnn::confusion_and_aggregates(l({0}), l({-1}), 2), mrgnn::ValidationError);
}

TEST_CASE("macro averages count empty classes as zero") {
  // class 2 never appears in labels or predictions
  std::vector<int> labels = {0, 1, 0, 1};
  std::vector<int> preds = {0, 1, 0, 1};
  MetricsReport report = mrgnn::confusion_and_aggregates(preds, labels, 3);
  CHECK(report.macro_recall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(report.macro_precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("macro auprc skips absent classes and reports them") {
  Tensor scores = Tensor::from_rows({
      {0.8, 0.1, 0.1},
      {0.2, 0.7, 0.1},
      {0.6, 0.3, 0.1},
      {0.1, 0.8, 0.1},
  });
  std::vector<int> labels = {0, 1, 0, 1};  // class 2 absent
  std::vector<int> skipped;
  double value = mrgnn::auprc_macro(scores, labels, &skipped);
  CHECK(skipped == std::vector<int>{2});

  // hand check: class 0 ranking by column 0: labels (1,0,0,1) by score desc ->
  // 0.8(pos),0.6(pos),0.2(neg),0.1(neg): ap=1; class 1 by column 1:
  // 0.8(pos),0.7(pos),0.3(neg),0.1(neg): ap=1
  CHECK(value == 1.0);

  std::vector<int> no_classes;
  Tensor one = Tensor::from_rows({{0.5, 0.5}});
  CHECK_THROWS_AS(mrgnn::auprc_macro(one, no_classes, nullptr), mrgnn::ShapeError);
}

TEST_CASE("binary report serialization") {
  std::vector<double> scores = {0.9, 0.7, 0.4, 0.2};
  std::vector<int> preds = {1, 1, 0, 0};
  std::vector<int> labels = {1, 0, 0, 1};
  MetricsReport report = mrgnn::evaluate_binary(scores, preds, labels);

  CHECK(report.auc == 0.5);
  CHECK(report.accuracy == 0.5);

  nlohmann::json parsed = nlohmann::json::parse(report.to_json());
  CHECK(parsed.at("task") == "binary");
  CHECK(parsed.at("auc") == report.auc);
  CHECK(parsed.at("accuracy") == report.accuracy);
  CHECK(parsed.contains("confusion"));
  CHECK_FALSE(parsed.contains("macro_f1"));

  // header and row have the same number of columns
  std::string header = report.csv_header();
  std::string row = report.csv_row();
  CHECK(std::count(header.begin(), header.end(), ',') ==
        std::count(row.begin(), row.end(), ','));
  CHECK(header == "auc,accuracy,recall,f1");
}

TEST_CASE("multiclass report serialization") {
  Tensor scores = Tensor::from_rows({
      {0.8, 0.1, 0.1},
      {0.2, 0.7, 0.1},
      {0.3, 0.2, 0.5},
      {0.1, 0.8, 0.1},
  });
  std::vector<int> preds = {0, 1, 2, 1};
  std::vector<int> labels = {0, 1, 2, 2};
  MetricsReport report = mrgnn::evaluate_multiclass(scores, preds, labels, 3);

  CHECK(report.task == mrgnn::TaskKind::Multiclass);
  CHECK(report.micro_avg == doctest::Approx(0.75).epsilon(1e-15));

  nlohmann::json parsed = nlohmann::json::parse(report.to_json());
  CHECK(parsed.at("task") == "multiclass");
  CHECK(parsed.contains("micro_avg"));
  CHECK(parsed.contains("auprc"));
  CHECK_FALSE(parsed.contains("auc"));
  CHECK(report.csv_header() == "micro_avg,macro_recall,macro_precision,macro_f1,auprc");

  // csv row round-trips through double parsing exactly
  std::istringstream row(report.csv_row());
  std::string cell;
  std::vector<double> cells;
  while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
  REQUIRE(cells.size() == 5);
  CHECK(cells[0] == report.micro_avg);
  CHECK(cells[1] == report.macro_recall);
  CHECK(cells[4] == report.auprc);
}
