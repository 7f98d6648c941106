#ifndef SAMPLECNN_EVAL_PREDICT_HPP
#define SAMPLECNN_EVAL_PREDICT_HPP

#include <fstream>
#include <string>

#include "samplecnn/eval/auc.hpp"
#include "samplecnn/train/trainer.hpp"

namespace samplecnn {

/// Tile-averaged song predictions for a whole split.
template <typename Scalar>
PredictionTable predict_songs(const std::vector<LayerSpec>& layers, ParamSet<Scalar>& params,
                              const TaggedData<Scalar>& data, Index input_len,
                              int threads = 1) {
  const Matrix<Scalar> pred = predict_clips(layers, params, data, input_len, threads);
  PredictionTable table;
  table.clip_ids = data.names;
  if (table.clip_ids.empty()) {
    table.clip_ids.resize(static_cast<std::size_t>(pred.cols()));
    for (Index c = 0; c < pred.cols(); ++c)
      table.clip_ids[static_cast<std::size_t>(c)] = "clip_" + std::to_string(c);
  }
  table.scores = pred.template cast<double>();
  table.labels = data.labels.template cast<double>();
  return table;
}

/// CSV export: clip_id,score_0..score_{n-1},label_0..label_{n-1}.
inline void write_prediction_csv(const PredictionTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("write_prediction_csv: cannot open " + path);
  os << "clip_id";
  for (Index t = 0; t < table.n_tags(); ++t) os << ",score_" << t;
  for (Index t = 0; t < table.n_tags(); ++t) os << ",label_" << t;
  os << '\n';
  os.precision(9);
  for (Index c = 0; c < table.n_clips(); ++c) {
    os << table.clip_ids[static_cast<std::size_t>(c)];
    for (Index t = 0; t < table.n_tags(); ++t) os << ',' << table.scores(t, c);
    for (Index t = 0; t < table.n_tags(); ++t) os << ',' << static_cast<int>(table.labels(t, c));
    os << '\n';
  }
  if (!os) throw DataError("write_prediction_csv: write failed for " + path);
}

/// CSV report: one `tag,auc` row per tag (blank auc for excluded tags)
/// and a final `mean,<value>` row.
inline void write_auc_csv(const AucReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("write_auc_csv: cannot open " + path);
  os << "tag,auc\n";
  os.precision(9);
  for (std::size_t t = 0; t < report.per_tag.size(); ++t) {
    os << t << ',';
    if (report.per_tag[t]) os << *report.per_tag[t];
    os << '\n';
  }
  os << "mean," << report.mean << '\n';
  if (!os) throw DataError("write_auc_csv: write failed for " + path);
}

} // namespace samplecnn

#endif
