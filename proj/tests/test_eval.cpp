#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "samplecnn/eval/auc.hpp"
#include "samplecnn/eval/predict.hpp"

using namespace samplecnn;

TEST_CASE("auc hand case and trivial orderings") {
  const std::vector<double> scores = {0.1, 0.4, 0.35, 0.8};
  const std::vector<std::uint8_t> labels = {0, 0, 1, 1};
  const auto auc = auc_per_tag(scores, labels);
  REQUIRE(auc.has_value());
  CHECK(*auc == doctest::Approx(0.75).epsilon(1e-12));

  // perfect separation
  CHECK(*auc_per_tag({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
  // all ties
  CHECK(*auc_per_tag({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
  // single class is undefined
  CHECK_FALSE(auc_per_tag({0.1, 0.2}, {1, 1}).has_value());
}

TEST_CASE("rank-based auc equals the pair-count oracle on ties") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> score_level(0, 9); // coarse grid forces ties
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 60);
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
    bool pos = false, neg = false;
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = score_level(rng) / 10.0;
      labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(coin(rng));
      (labels[static_cast<std::size_t>(i)] ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    const auto fast = auc_per_tag(scores, labels);
    REQUIRE(fast.has_value());
    CHECK(*fast == oracles::pair_count_auc(scores, labels)); // exact
  }
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 20;
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = u(rng);
      labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i % 2);
    }
    std::vector<double> warped(n);
    for (int i = 0; i < n; ++i)
      warped[static_cast<std::size_t>(i)] = std::exp(3.0 * scores[static_cast<std::size_t>(i)]);
    CHECK(*auc_per_tag(scores, labels) == *auc_per_tag(warped, labels));
  }
}

TEST_CASE("auc complement identity for tie-free scores") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 31;
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n), flipped(n);
  for (int i = 0; i < n; ++i) {
    scores[static_cast<std::size_t>(i)] = u(rng); // continuous, ties have measure zero
    labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i % 3 == 0);
    flipped[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)] ? 0 : 1;
  }
  CHECK(*auc_per_tag(scores, labels) + *auc_per_tag(scores, flipped) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mean_auc averages valid tags and excludes single-class ones") {
  PredictionTable table;
  table.clip_ids = {"a", "b", "c", "d"};
  table.scores.resize(3, 4);
  table.scores << 0.1, 0.2, 0.8, 0.9,   // perfectly separating
      0.9, 0.8, 0.2, 0.1,               // perfectly wrong -> 0.0
      0.5, 0.5, 0.5, 0.5;               // single class, excluded
  table.labels.resize(3, 4);
  table.labels << 0, 0, 1, 1,
      0, 0, 1, 1,
      1, 1, 1, 1;
  const auto report = mean_auc(table);
  CHECK(report.n_valid_tags == 2);
  CHECK(report.per_tag[0].value() == 1.0);
  CHECK(report.per_tag[1].value() == 0.0);
  CHECK_FALSE(report.per_tag[2].has_value());
  CHECK(report.mean == doctest::Approx(0.5));

  // two tags with AUC 1.0 and 0.5
  PredictionTable t2;
  t2.scores.resize(2, 4);
  t2.scores << 0.1, 0.2, 0.8, 0.9, 0.5, 0.5, 0.5, 0.5;
  t2.labels.resize(2, 4);
  t2.labels << 0, 0, 1, 1, 0, 1, 0, 1;
  CHECK(mean_auc(t2).mean == doctest::Approx(0.75));

  // all single-class is an eval error
  PredictionTable bad;
  bad.scores = Matrix<double>::Constant(1, 3, 0.5);
  bad.labels = Matrix<double>::Ones(1, 3);
  CHECK_THROWS_AS(mean_auc(bad), EvalError);
}

TEST_CASE("label permutation drives mean auc to chance") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n_clips = 400, n_tags = 5;
  PredictionTable table;
  table.scores.resize(n_tags, n_clips);
  table.labels.resize(n_tags, n_clips);
  for (Index c = 0; c < n_clips; ++c)
    for (Index t = 0; t < n_tags; ++t) {
      table.scores(t, c) = u(rng);
      table.labels(t, c) = (rng() % 2) ? 1.0 : 0.0; // labels independent of scores
    }
  const auto report = mean_auc(table);
  CHECK(report.mean == doctest::Approx(0.5).epsilon(0.05 / 0.5));

  // global pooled variant sits at chance too
  CHECK(global_auc(table) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("prediction csv has the declared header and row shape") {
  PredictionTable table;
  table.clip_ids = {"x.wav", "y.wav"};
  table.scores.resize(2, 2);
  table.scores << 0.25, 0.75, 0.5, 0.125;
  table.labels.resize(2, 2);
  table.labels << 1, 0, 0, 1;
  const auto path = (std::filesystem::temp_directory_path() / "pred.csv").string();
  write_prediction_csv(table, path);
  std::ifstream in(path);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header == "clip_id,score_0,score_1,label_0,label_1");
  CHECK(row1 == "x.wav,0.25,0.5,1,0");
  CHECK(row2 == "y.wav,0.75,0.125,0,1");

  const auto auc_path = (std::filesystem::temp_directory_path() / "auc.csv").string();
  write_auc_csv(mean_auc(table), auc_path);
  std::ifstream ain(auc_path);
  std::string aheader;
  std::getline(ain, aheader);
  CHECK(aheader == "tag,auc");
  std::string line, last;
  while (std::getline(ain, line))
    if (!line.empty()) last = line;
  CHECK(last.rfind("mean,", 0) == 0);
}
