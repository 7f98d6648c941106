#ifndef SAMPLECNN_EVAL_AUC_HPP
#define SAMPLECNN_EVAL_AUC_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

/// Per-clip scores and ground-truth bits for one evaluation split.
struct PredictionTable {
  std::vector<std::string> clip_ids;
  Matrix<double> scores;        // n_tags x n_clips, in [0,1]
  Matrix<double> labels;        // n_tags x n_clips, 0/1

  Index n_tags() const { return scores.rows(); }
  Index n_clips() const { return scores.cols(); }
};

/// Mann-Whitney AUC: probability that a random positive outranks a
/// random negative, ties counted 1/2. Rank-based, O(n log n). Returns
/// nullopt when only one class is present.
inline std::optional<double> auc_per_tag(const std::vector<double>& scores,
                                         const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size())
    throw ShapeError("auc_per_tag: score/label length mismatch");
  const std::size_t n = scores.size();
  long long n_pos = 0;
  for (auto b : labels) n_pos += b ? 1 : 0;
  const long long n_neg = static_cast<long long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks across tie groups; rank sums stay exact in doubles.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]]) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) *
                                      (static_cast<double>(n_pos) + 1.0);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct AucReport {
  std::vector<std::optional<double>> per_tag; // nullopt = single-class, excluded
  double mean = 0.0;
  int n_valid_tags = 0;
};

/// Unweighted mean of per-tag AUCs over tags with both classes present.
inline AucReport mean_auc(const PredictionTable& table) {
  if (table.n_clips() == 0) throw EvalError("mean_auc: empty prediction table");
  AucReport report;
  report.per_tag.resize(static_cast<std::size_t>(table.n_tags()));
  double sum = 0.0;
  for (Index t = 0; t < table.n_tags(); ++t) {
    std::vector<double> scores(static_cast<std::size_t>(table.n_clips()));
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(table.n_clips()));
    for (Index c = 0; c < table.n_clips(); ++c) {
      scores[static_cast<std::size_t>(c)] = table.scores(t, c);
      labels[static_cast<std::size_t>(c)] = table.labels(t, c) > 0.5 ? 1 : 0;
    }
    const auto auc = auc_per_tag(scores, labels);
    report.per_tag[static_cast<std::size_t>(t)] = auc;
    if (auc) {
      sum += *auc;
      ++report.n_valid_tags;
    }
  }
  if (report.n_valid_tags == 0)
    throw EvalError("mean_auc: no tag has both positive and negative examples");
  report.mean = sum / report.n_valid_tags;
  return report;
}

/// Micro/global alternative: every (clip, tag) pair pooled into one
/// binary problem.
inline double global_auc(const PredictionTable& table) {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  scores.reserve(static_cast<std::size_t>(table.scores.size()));
  labels.reserve(static_cast<std::size_t>(table.scores.size()));
  for (Index c = 0; c < table.n_clips(); ++c)
    for (Index t = 0; t < table.n_tags(); ++t) {
      scores.push_back(table.scores(t, c));
      labels.push_back(table.labels(t, c) > 0.5 ? 1 : 0);
    }
  const auto auc = auc_per_tag(scores, labels);
  if (!auc) throw EvalError("global_auc: pooled labels are single-class");
  return *auc;
}

} // namespace samplecnn

#endif
