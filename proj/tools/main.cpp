// samplecnn: sample-level 1D CNN music tagger - prepare / train / eval / viz.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "samplecnn/audio/resample.hpp"
#include "samplecnn/audio/synth.hpp"
#include "samplecnn/audio/wav.hpp"
#include "samplecnn/cli/config.hpp"
#include "samplecnn/eval/predict.hpp"
#include "samplecnn/model/checkpoint.hpp"
#include "samplecnn/train/data.hpp"
#include "samplecnn/train/trainer.hpp"
#include "samplecnn/viz/gradient_ascent.hpp"

namespace fs = std::filesystem;
using namespace samplecnn;

namespace {

std::string manifest_path(const RunConfig& rc) {
  return rc.manifest.empty() ? rc.data_dir + "/manifest.csv" : rc.manifest;
}

std::string format_lr(double lr) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << lr;
  return os.str();
}

std::string format_loss(double v) {
  std::ostringstream os;
  os << std::setprecision(9) << v;
  return os.str();
}

void require_dir(const std::string& path, const std::string& what) {
  if (!fs::is_directory(path))
    throw ConfigError(what + " directory does not exist: " + path);
}

int cmd_prepare(const RunConfig& rc) {
  fs::create_directories(rc.data_dir);
  std::vector<ManifestEntry> manifest;

  if (rc.synthetic) {
    SynthSpec spec;
    spec.n_clips = rc.synth_clips;
    spec.clip_seconds =
        rc.synth_clip_seconds > 0 ? rc.synth_clip_seconds : rc.clip_seconds;
    spec.sample_rate_hz = rc.sample_rate_hz;
    spec.n_bands = rc.synth_bands;
    spec.noise_level = rc.synth_noise;
    spec.seed = rc.synth_seed;
    auto [clips, entries] = generate_synthetic(spec);
    for (std::size_t i = 0; i < clips.size(); ++i) {
      const std::string path = rc.data_dir + "/" + entries[i].clip_path;
      if (!fs::exists(path)) save_wav(path, clips[i]); // cache hit otherwise
    }
    manifest = std::move(entries);
  } else {
    // Source manifest names raw inputs; cache the resampled/trimmed clips.
    const auto src_entries = read_manifest(manifest_path(rc),
                                           static_cast<std::size_t>(rc.model.n_tags));
    const std::string cache_dir = rc.data_dir + "/processed";
    fs::create_directories(cache_dir);
    const TrimPolicy policy = parse_trim_policy(rc.trim);
    for (const auto& e : src_entries) {
      ManifestEntry out = e;
      out.clip_path = "processed/" + fs::path(e.clip_path).filename().string();
      const std::string dst = rc.data_dir + "/" + out.clip_path;
      if (!fs::exists(dst)) {
        AudioClip clip = load_wav(e.clip_path);
        clip = resample(clip, rc.sample_rate_hz);
        clip = trim_or_pad(clip, rc.clip_seconds, policy);
        save_wav(dst, clip);
      }
      manifest.push_back(std::move(out));
    }
  }

  const std::string out_manifest = rc.data_dir + "/manifest.csv";
  write_manifest(manifest, out_manifest);
  int counts[3] = {0, 0, 0};
  for (const auto& e : manifest) ++counts[static_cast<int>(e.split)];
  std::cout << "prepared " << manifest.size() << " clips -> " << out_manifest << "\n"
            << "  train: " << counts[0] << "\n  valid: " << counts[1]
            << "\n  test:  " << counts[2] << "\n";
  return 0;
}

StftConfig stft_of(const RunConfig& rc) {
  StftConfig cfg;
  cfg.fft_size = rc.fft_size;
  cfg.hop = rc.hop;
  return cfg;
}

int cmd_train(const RunConfig& rc) {
  require_dir(rc.data_dir, "data");
  const ModelSpec spec = resolve_spec(rc.model);
  const auto entries =
      read_manifest(rc.data_dir + "/manifest.csv", static_cast<std::size_t>(spec.n_tags));
  auto data = load_splits(entries, rc.data_dir, spec, stft_of(rc), rc.mel_C);
  if (data.train.n_clips() == 0) throw DataError("train split is empty");
  if (data.valid.n_clips() == 0) throw DataError("valid split is empty");

  const auto layers = build_mn(spec);
  auto params = init_params<float>(spec, rc.train.seed);

  fs::create_directories(rc.log_dir);
  fs::create_directories(rc.checkpoint_dir);
  const std::string metrics_path = rc.log_dir + "/metrics.csv";
  std::ofstream metrics(metrics_path);
  if (!metrics) throw DataError("cannot open " + metrics_path);
  metrics << "epoch,train_loss,val_loss,lr,decays\n";

  TrainConfig cfg = rc.train;
  cfg.threads = rc.threads;
  const auto result =
      fit(layers, params, data.train, data.valid, spec.input_len, spec.dropout, cfg,
          [&](const EpochMetrics& m) {
            metrics << m.epoch << ',' << format_loss(m.train_loss) << ','
                    << format_loss(m.val_loss) << ',' << format_lr(m.lr) << ','
                    << m.decays << '\n';
            metrics.flush();
            std::cout << "epoch " << m.epoch << " train " << format_loss(m.train_loss)
                      << " val " << format_loss(m.val_loss) << " lr " << format_lr(m.lr)
                      << "\n";
          });

  CheckpointState state;
  state.epoch = result.epochs_run;
  state.decays_done = result.schedule.decays_done;
  state.epochs_since_improve = result.schedule.epochs_since_improve;
  state.best_val_loss = result.best_val_loss;
  const std::string ckpt_path = rc.checkpoint_dir + "/best.ckpt";
  save_checkpoint(ckpt_path, spec, result.best_params, state);
  std::cout << "best validation loss " << format_loss(result.best_val_loss) << " after "
            << result.epochs_run << " epochs\ncheckpoint -> " << ckpt_path
            << "\nmetrics -> " << metrics_path << "\n";
  return 0;
}

Checkpoint load_ckpt(const RunConfig& rc, const std::string& path, bool model_configured) {
  if (!fs::exists(path)) throw DataError("checkpoint not found: " + path);
  if (model_configured) {
    const ModelSpec expected = resolve_spec(rc.model);
    return load_checkpoint(path, &expected);
  }
  return load_checkpoint(path);
}

int cmd_eval(const RunConfig& rc, const std::string& ckpt_path, bool model_configured) {
  require_dir(rc.data_dir, "data");
  auto ckpt = load_ckpt(rc, ckpt_path, model_configured);
  const ModelSpec spec = resolve_spec(ckpt.spec);
  const auto entries =
      read_manifest(rc.data_dir + "/manifest.csv", static_cast<std::size_t>(spec.n_tags));
  auto data = load_splits(entries, rc.data_dir, spec, stft_of(rc), rc.mel_C);
  if (data.test.n_clips() == 0) throw DataError("test split is empty");

  const auto layers = build_mn(spec);
  const auto table =
      predict_songs(layers, ckpt.params, data.test, spec.input_len, rc.threads);

  fs::create_directories(rc.log_dir);
  write_prediction_csv(table, rc.log_dir + "/predictions.csv");
  if (rc.eval_macro) {
    const auto report = mean_auc(table);
    write_auc_csv(report, rc.log_dir + "/auc.csv");
    for (std::size_t t = 0; t < report.per_tag.size(); ++t) {
      std::cout << "tag " << t << ": ";
      if (report.per_tag[t])
        std::cout << format_loss(*report.per_tag[t]) << "\n";
      else
        std::cout << "excluded (single class)\n";
    }
    std::cout << "mean AUC: " << format_loss(report.mean) << " over "
              << report.n_valid_tags << " tags\n";
  } else {
    std::cout << "global AUC: " << format_loss(global_auc(table)) << "\n";
  }
  std::cout << "predictions -> " << rc.log_dir << "/predictions.csv\n";
  return 0;
}

int cmd_viz(const RunConfig& rc, const std::string& ckpt_path, bool model_configured,
            bool dump_waveforms) {
  auto ckpt = load_ckpt(rc, ckpt_path, model_configured);
  const ModelSpec spec = resolve_spec(ckpt.spec);
  const auto layers = build_mn(spec);

  const auto estimates = layer_spectra(layers, ckpt.params, rc.viz, rc.threads);
  fs::create_directories(rc.log_dir);
  const std::string csv = rc.log_dir + "/spectra.csv";
  const std::string meta = rc.log_dir + "/spectra.meta.json";
  export_spectra(estimates, rc.viz, csv, meta);
  if (dump_waveforms) export_waveforms(estimates, rc.log_dir);
  int degenerate = 0;
  for (const auto& e : estimates) degenerate += e.degenerate ? 1 : 0;
  std::cout << "estimated " << estimates.size() << " filters at layer "
            << rc.viz.layer_index << " (" << degenerate << " degenerate)\nspectra -> "
            << csv << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"sample-level 1D CNN music auto-tagger"};
  app.require_subcommand(1);
  app.fallthrough(); // let --threads/-c appear after the subcommand too

  std::string config_path;
  int threads = 0;
  app.add_option("-c,--config", config_path, "INI config file");
  app.add_option("--threads", threads, "worker threads (default 1, reproducible)");

  // flag overrides, applied on top of the config file
  std::string model_shorthand, family, channels, trim;
  int input_len = 0, n_tags = 0, epochs = 0, batch = 0, sample_rate = 0;
  int synth_clips = 0, synth_bands = 0;
  long seed = -1;
  double clip_seconds = 0, dropout = -1, synth_noise = -1;
  bool synthetic = false;
  std::string data_dir, checkpoint_dir, log_dir, ckpt_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--data-dir", data_dir, "dataset directory");
    cmd->add_option("--log-dir", log_dir, "output/log directory");
  };
  auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_shorthand, "m^n shorthand, e.g. 3^9");
    cmd->add_option("--family", family, "mel_frame | raw_frame | raw_sample");
    cmd->add_option("--input", input_len, "network input length (samples or frames)");
    cmd->add_option("--channels", channels, "comma-separated module channels");
    cmd->add_option("--tags", n_tags, "tag vocabulary size");
    cmd->add_option("--dropout", dropout, "dropout rate on the final conv output");
  };

  auto* prepare = app.add_subcommand("prepare", "decode/resample/trim clips or "
                                                "generate the synthetic dataset");
  add_common(prepare);
  prepare->add_flag("--synthetic", synthetic, "generate the synthetic tone dataset");
  prepare->add_option("--clips", synth_clips, "synthetic clip count");
  prepare->add_option("--bands", synth_bands, "synthetic band/tag count");
  prepare->add_option("--noise", synth_noise, "synthetic noise level");
  prepare->add_option("--sample-rate", sample_rate, "target sample rate (Hz)");
  prepare->add_option("--clip-seconds", clip_seconds, "clip length in seconds");
  prepare->add_option("--seed", seed, "synthetic generator seed");
  prepare->add_option("--trim", trim, "trim policy: center | head | tail");

  auto* train = app.add_subcommand("train", "train a model to the stop condition");
  add_common(train);
  add_model_flags(train);
  train->add_option("--epochs", epochs, "max epochs");
  train->add_option("--batch", batch, "batch size");
  train->add_option("--seed", seed, "training seed");
  train->add_option("--checkpoint-dir", checkpoint_dir, "checkpoint directory");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint (per-tag + mean AUC)");
  add_common(eval);
  add_model_flags(eval);
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file");
  bool eval_global = false;
  eval->add_flag("--global", eval_global, "pooled (clip x tag) AUC instead of macro");

  auto* viz = app.add_subcommand("viz", "gradient-ascent filter spectra");
  add_common(viz);
  add_model_flags(viz);
  viz->add_option("--checkpoint", ckpt_path, "checkpoint file");
  int viz_layer = -1, viz_steps = 0, viz_input = 0;
  double viz_step_size = 0;
  std::string viz_filters;
  bool dump_waveforms = false;
  viz->add_option("--layer", viz_layer, "layer index to visualize");
  viz->add_option("--steps", viz_steps, "ascent steps");
  viz->add_option("--step-size", viz_step_size, "ascent step size");
  viz->add_option("--viz-input", viz_input, "estimate length in samples");
  viz->add_option("--filters", viz_filters, "comma-separated filter indices");
  viz->add_option("--seed", seed, "ascent seed");
  viz->add_flag("--dump-waveforms", dump_waveforms,
                "also write each estimate as a float32 binary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1; // usage errors are exit 1
  }

  try {
    ConfigDoc doc;
    if (!config_path.empty()) doc = parse_config_file(config_path);
    RunConfig rc = config_from_doc(doc);
    const bool model_configured =
        doc.count("model") > 0 || !model_shorthand.empty() || input_len > 0;

    // flags override file values
    if (threads > 0) rc.threads = threads;
    if (!data_dir.empty()) rc.data_dir = data_dir;
    if (!log_dir.empty()) rc.log_dir = log_dir;
    if (!checkpoint_dir.empty()) rc.checkpoint_dir = checkpoint_dir;
    if (!model_shorthand.empty()) {
      const auto [m, n] = parse_model_shorthand(model_shorthand);
      rc.model.m = m;
      rc.model.n = n;
      rc.model.first_stride = 0; // re-derive from the new grammar
      rc.model.first_filter_len = 0;
      rc.model.channel_schedule.clear();
      rc.model.first_channels = 0;
    }
    if (!family.empty()) rc.model.family = parse_family(family);
    if (input_len > 0) rc.model.input_len = input_len;
    if (!channels.empty())
      rc.model.channel_schedule = detail::to_int_list(channels, "--channels");
    if (n_tags > 0) rc.model.n_tags = n_tags;
    if (dropout >= 0) rc.model.dropout = dropout;
    if (epochs > 0) rc.train.max_epochs = epochs;
    if (batch > 0) rc.train.batch_size = batch;
    if (sample_rate > 0) rc.sample_rate_hz = sample_rate;
    if (clip_seconds > 0) rc.clip_seconds = clip_seconds;
    if (synthetic) rc.synthetic = true;
    if (synth_clips > 0) rc.synth_clips = synth_clips;
    if (synth_bands > 0) {
      rc.synth_bands = synth_bands;
      if (rc.synthetic) rc.model.n_tags = synth_bands;
    }
    if (synth_noise >= 0) rc.synth_noise = synth_noise;
    if (!trim.empty()) rc.trim = trim;
    if (viz_layer >= 0) rc.viz.layer_index = viz_layer;
    if (viz_steps > 0) rc.viz.steps = viz_steps;
    if (viz_step_size > 0) rc.viz.step_size = viz_step_size;
    if (viz_input > 0) rc.viz.input_len = viz_input;
    if (!viz_filters.empty())
      rc.viz.filters = detail::to_int_list(viz_filters, "--filters");
    if (seed >= 0) {
      rc.train.seed = static_cast<std::uint64_t>(seed);
      rc.synth_seed = static_cast<std::uint64_t>(seed);
      rc.viz.seed = static_cast<std::uint64_t>(seed);
    }
    if (ckpt_path.empty()) ckpt_path = rc.checkpoint_dir + "/best.ckpt";
    if (eval_global) rc.eval_macro = false;

    if (prepare->parsed()) return cmd_prepare(rc);
    if (train->parsed()) return cmd_train(rc);
    if (eval->parsed()) return cmd_eval(rc, ckpt_path, model_configured);
    if (viz->parsed()) return cmd_viz(rc, ckpt_path, model_configured, dump_waveforms);
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
