#ifndef SAMPLECNN_TRAIN_TRAINER_HPP
#define SAMPLECNN_TRAIN_TRAINER_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "samplecnn/core/rng.hpp"
#include "samplecnn/model/network.hpp"
#include "samplecnn/train/sampler.hpp"
#include "samplecnn/train/schedule.hpp"

namespace samplecnn {

/// In-memory split: one (channels x time) map per clip plus the
/// (n_tags x n_clips) label matrix.
template <typename Scalar>
struct TaggedData {
  std::vector<FeatureMap<Scalar>> inputs;
  Matrix<Scalar> labels;
  std::vector<std::string> names;

  int n_clips() const { return static_cast<int>(inputs.size()); }
  std::vector<Index> lengths() const {
    std::vector<Index> lens;
    lens.reserve(inputs.size());
    for (const auto& x : inputs) lens.push_back(x.cols());
    return lens;
  }
};

/// One pass over the training split: a random segment per clip, shuffled
/// into batches, forward/BCE/backward/Nesterov per batch. Returns the
/// item-weighted mean train loss. A non-finite batch loss aborts with a
/// diagnostic naming the batch.
template <typename Scalar>
double train_epoch(const std::vector<LayerSpec>& layers, ParamSet<Scalar>& params,
                   Velocities<Scalar>& vel, const TaggedData<Scalar>& train,
                   Index input_len, double lr, double dropout_rate,
                   const TrainConfig& cfg, int epoch) {
  auto seg_rng = make_rng(cfg.seed, static_cast<std::uint64_t>(epoch), 0x5e6);
  const auto segments =
      sample_train_segments(train.lengths(), input_len, seg_rng, &train.names);

  double loss_sum = 0.0;
  long item_count = 0;
  const int n_batches =
      (static_cast<int>(segments.size()) + cfg.batch_size - 1) / cfg.batch_size;
  for (int b = 0; b < n_batches; ++b) {
    const int lo = b * cfg.batch_size;
    const int hi = std::min<int>(lo + cfg.batch_size, static_cast<int>(segments.size()));
    std::vector<FeatureMap<Scalar>> batch;
    Matrix<Scalar> targets(train.labels.rows(), hi - lo);
    batch.reserve(static_cast<std::size_t>(hi - lo));
    for (int j = lo; j < hi; ++j) {
      const Segment& s = segments[static_cast<std::size_t>(j)];
      batch.push_back(
          train.inputs[static_cast<std::size_t>(s.clip_index)].middleCols(s.start, input_len));
      targets.col(j - lo) = train.labels.col(s.clip_index);
    }

    auto drop_rng = make_rng(cfg.seed, static_cast<std::uint64_t>(epoch),
                             0xd0b0 + static_cast<std::uint64_t>(b));
    ForwardCache<Scalar> cache;
    const auto probs = forward(layers, params, batch, Mode::Train, &cache, &drop_rng,
                               dropout_rate, cfg.threads);
    Matrix<Scalar> pred(targets.rows(), targets.cols());
    for (Index i = 0; i < pred.cols(); ++i) pred.col(i) = probs[static_cast<std::size_t>(i)];

    const auto bce = bce_loss(pred, targets);
    if (!std::isfinite(bce.loss))
      throw NumericError("train_epoch: non-finite loss in epoch " + std::to_string(epoch) +
                         ", batch " + std::to_string(b));
    loss_sum += bce.loss * static_cast<double>(hi - lo);
    item_count += hi - lo;

    std::vector<Vector<Scalar>> dlogits(static_cast<std::size_t>(hi - lo));
    for (Index i = 0; i < bce.dlogits.cols(); ++i)
      dlogits[static_cast<std::size_t>(i)] = bce.dlogits.col(i);
    const auto grads = backward(layers, params, cache, dlogits, nullptr, cfg.threads);
    apply_update(params, grads, vel, static_cast<Scalar>(lr),
                 static_cast<Scalar>(cfg.momentum));
  }
  return loss_sum / static_cast<double>(item_count);
}

/// Per-clip probabilities: mean of infer-mode predictions over the
/// deterministic non-overlapping tiling.
template <typename Scalar>
Matrix<Scalar> predict_clips(const std::vector<LayerSpec>& layers, ParamSet<Scalar>& params,
                             const TaggedData<Scalar>& data, Index input_len,
                             int threads = 1) {
  if (data.n_clips() == 0) throw ConfigError("predict_clips: empty split");
  Matrix<Scalar> pred(data.labels.rows(), data.n_clips());
  for (int c = 0; c < data.n_clips(); ++c) {
    const auto& x = data.inputs[static_cast<std::size_t>(c)];
    const auto starts = eval_tile_starts(x.cols(), input_len);
    std::vector<FeatureMap<Scalar>> tiles;
    tiles.reserve(starts.size());
    for (Index s : starts) tiles.push_back(x.middleCols(s, input_len));
    const auto probs =
        forward(layers, params, tiles, Mode::Infer, nullptr, nullptr, 0.0, threads);
    Vector<Scalar> mean = Vector<Scalar>::Zero(pred.rows());
    for (const auto& p : probs) mean += p;
    pred.col(c) = mean / static_cast<Scalar>(probs.size());
  }
  return pred;
}

/// Mean BCE of tile-averaged predictions against the clip tags.
template <typename Scalar>
double validate(const std::vector<LayerSpec>& layers, ParamSet<Scalar>& params,
                const TaggedData<Scalar>& data, Index input_len, int threads = 1) {
  const Matrix<Scalar> pred = predict_clips(layers, params, data, input_len, threads);
  return bce_loss(pred, data.labels).loss;
}

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  int decays = 0;
};

template <typename Scalar>
struct FitResult {
  ParamSet<Scalar> best_params;
  double best_val_loss = 0.0;
  std::vector<EpochMetrics> history;
  ScheduleState schedule;
  int epochs_run = 0;
};

/// Full training loop: epochs until the schedule stops or max_epochs is
/// reached. best_params snapshots the lowest-validation-loss state.
template <typename Scalar>
FitResult<Scalar> fit(const std::vector<LayerSpec>& layers, ParamSet<Scalar>& params,
                      const TaggedData<Scalar>& train, const TaggedData<Scalar>& valid,
                      Index input_len, double dropout_rate, const TrainConfig& cfg,
                      std::function<void(const EpochMetrics&)> on_epoch = nullptr) {
  validate_train_config(cfg);
  if (valid.n_clips() == 0) throw ConfigError("fit: empty validation set");
  Velocities<Scalar> vel = Velocities<Scalar>::zeros_like(params);
  FitResult<Scalar> result;
  result.best_params = params;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = result.schedule.current_lr(cfg);
    const double train_loss =
        train_epoch(layers, params, vel, train, input_len, lr, dropout_rate, cfg, epoch);
    const double val_loss = validate(layers, params, valid, input_len, cfg.threads);

    EpochMetrics m{epoch, train_loss, val_loss, lr, result.schedule.decays_done};
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
    ++result.epochs_run;

    const auto step = schedule_step(result.schedule, val_loss, cfg);
    if (step.improved) {
      result.best_params = params;
      result.best_val_loss = val_loss;
    }
    if (step.action == ScheduleAction::Stop) break;
  }
  return result;
}

} // namespace samplecnn

#endif
