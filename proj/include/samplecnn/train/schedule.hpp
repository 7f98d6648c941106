#ifndef SAMPLECNN_TRAIN_SCHEDULE_HPP
#define SAMPLECNN_TRAIN_SCHEDULE_HPP

#include <cstdint>
#include <limits>

#include "samplecnn/core/error.hpp"

namespace samplecnn {

struct TrainConfig {
  double lr0 = 0.01;
  double momentum = 0.9;
  double lr_factor = 5.0;
  int patience_epochs = 3;
  int max_decays = 4;
  int batch_size = 23;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  int max_epochs = 1000;
  int threads = 1;
};

inline void validate_train_config(const TrainConfig& c) {
  if (!(c.lr0 > 0)) throw ConfigError("TrainConfig: lr0 must be > 0");
  if (!(c.lr_factor > 1)) throw ConfigError("TrainConfig: lr_factor must be > 1");
  if (c.patience_epochs < 1) throw ConfigError("TrainConfig: patience must be >= 1");
  if (c.max_decays < 0) throw ConfigError("TrainConfig: max_decays must be >= 0");
  if (c.batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (!(c.momentum >= 0 && c.momentum < 1))
    throw ConfigError("TrainConfig: momentum must be in [0, 1)");
  if (c.dropout < 0 || c.dropout >= 1) throw ConfigError("TrainConfig: dropout in [0, 1)");
  if (c.max_epochs < 1) throw ConfigError("TrainConfig: max_epochs must be >= 1");
}

/// Learning-rate bookkeeping. The rate is always recomputed as
/// lr0 / lr_factor^decays_done so the trajectory carries no accumulated
/// rounding (0.01 after four factor-5 decays is exactly 0.01/625).
struct ScheduleState {
  int decays_done = 0;
  int epochs_since_improve = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();

  double current_lr(const TrainConfig& cfg) const {
    double denom = 1.0;
    for (int i = 0; i < decays_done; ++i) denom *= cfg.lr_factor;
    return cfg.lr0 / denom;
  }
};

enum class ScheduleAction { Continue, Decay, Stop };

struct ScheduleStep {
  ScheduleAction action = ScheduleAction::Continue;
  bool improved = false; // caller should checkpoint when set
};

/// Strict-improvement early-stopping schedule: a stall of
/// patience_epochs triggers a factor decay; once max_decays are spent
/// the next exhausted stall stops training. Ties count as stalls.
inline ScheduleStep schedule_step(ScheduleState& st, double val_loss,
                                  const TrainConfig& cfg) {
  if (!std::isfinite(val_loss)) throw NumericError("schedule_step: non-finite validation loss");
  ScheduleStep out;
  if (val_loss < st.best_val_loss) {
    st.best_val_loss = val_loss;
    st.epochs_since_improve = 0;
    out.improved = true;
    return out;
  }
  ++st.epochs_since_improve;
  if (st.epochs_since_improve >= cfg.patience_epochs) {
    if (st.decays_done >= cfg.max_decays) {
      out.action = ScheduleAction::Stop;
      return out;
    }
    ++st.decays_done;
    st.epochs_since_improve = 0;
    out.action = ScheduleAction::Decay;
  }
  return out;
}

} // namespace samplecnn

#endif
