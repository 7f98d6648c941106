#ifndef SAMPLECNN_CLI_CONFIG_HPP
#define SAMPLECNN_CLI_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "samplecnn/audio/clip.hpp"
#include "samplecnn/core/error.hpp"
#include "samplecnn/model/spec.hpp"
#include "samplecnn/train/schedule.hpp"
#include "samplecnn/viz/gradient_ascent.hpp"

namespace samplecnn {

/// INI-style document: [section] headers over key = value lines.
/// Sections and keys are kept sorted, so parse -> serialize -> parse is
/// the identity on the parsed form.
using ConfigDoc = std::map<std::string, std::map<std::string, std::string>>;

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline ConfigDoc parse_config(std::istream& in) {
  ConfigDoc doc;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(t.substr(1, t.size() - 2));
      doc[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    doc[section][key] = trim(t.substr(eq + 1));
  }
  return doc;
}

inline ConfigDoc parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

inline std::string serialize_config(const ConfigDoc& doc) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [section, entries] : doc) {
    if (!first) os << '\n';
    first = false;
    os << '[' << section << "]\n";
    for (const auto& [key, value] : entries) os << key << " = " << value << '\n';
  }
  return os.str();
}

namespace detail {

inline int to_int(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected an integer, got '" + v + "'");
  }
}

inline double to_double(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a number, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& v, const std::string& what) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(what + ": expected a boolean, got '" + v + "'");
}

inline std::vector<int> to_int_list(const std::string& v, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(to_int(trim(cell), what));
  return out;
}

} // namespace detail

/// Per-command configuration assembled from the config file plus CLI
/// flag overrides (flags win).
struct RunConfig {
  // [data]
  std::string data_dir = "data";
  std::string manifest = "";           // defaults to <data_dir>/manifest.csv
  int sample_rate_hz = 22050;
  double clip_seconds = 29.1;
  std::string trim = "center";         // center | head | tail
  bool synthetic = false;
  int synth_clips = 100;
  int synth_bands = 8;
  double synth_noise = 0.0;
  std::uint64_t synth_seed = 42;
  double synth_clip_seconds = 0.0;     // 0 -> clip_seconds

  // [model]
  ModelSpec model;
  int fft_size = 729; // mel frontend window
  int hop = 729;
  double mel_C = 10.0;

  // [train]
  TrainConfig train;

  // [eval]
  bool eval_macro = true;

  // [viz]
  VizConfig viz;

  // [paths]
  std::string checkpoint_dir = "runs";
  std::string log_dir = "runs";

  int threads = 1;
};

/// `m^n` shorthand, e.g. "3^9".
inline std::pair<int, int> parse_model_shorthand(const std::string& s) {
  const auto caret = s.find('^');
  if (caret == std::string::npos || caret == 0 || caret + 1 >= s.size())
    throw ConfigError("model shorthand must look like m^n, got '" + s + "'");
  return {detail::to_int(s.substr(0, caret), "model m"),
          detail::to_int(s.substr(caret + 1), "model n")};
}

inline TrimPolicy parse_trim_policy(const std::string& s) {
  if (s == "center") return TrimPolicy::Center;
  if (s == "head") return TrimPolicy::Head;
  if (s == "tail") return TrimPolicy::Tail;
  throw ConfigError("unknown trim policy '" + s + "'");
}

inline RunConfig config_from_doc(const ConfigDoc& doc) {
  RunConfig rc;
  using detail::to_bool;
  using detail::to_double;
  using detail::to_int;
  using detail::to_int_list;

  auto get = [&](const char* section, const char* key) -> const std::string* {
    const auto s = doc.find(section);
    if (s == doc.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  };

  if (const auto* v = get("data", "dir")) rc.data_dir = *v;
  if (const auto* v = get("data", "manifest")) rc.manifest = *v;
  if (const auto* v = get("data", "sample_rate")) rc.sample_rate_hz = to_int(*v, "data.sample_rate");
  if (const auto* v = get("data", "clip_seconds")) rc.clip_seconds = to_double(*v, "data.clip_seconds");
  if (const auto* v = get("data", "trim")) rc.trim = *v;
  if (const auto* v = get("data", "synthetic")) rc.synthetic = to_bool(*v, "data.synthetic");
  if (const auto* v = get("data", "synth_clips")) rc.synth_clips = to_int(*v, "data.synth_clips");
  if (const auto* v = get("data", "synth_bands")) rc.synth_bands = to_int(*v, "data.synth_bands");
  if (const auto* v = get("data", "synth_noise")) rc.synth_noise = to_double(*v, "data.synth_noise");
  if (const auto* v = get("data", "synth_seed"))
    rc.synth_seed = static_cast<std::uint64_t>(to_int(*v, "data.synth_seed"));
  if (const auto* v = get("data", "synth_clip_seconds"))
    rc.synth_clip_seconds = to_double(*v, "data.synth_clip_seconds");

  if (const auto* v = get("model", "family")) rc.model.family = parse_family(*v);
  if (const auto* v = get("model", "m")) rc.model.m = to_int(*v, "model.m");
  if (const auto* v = get("model", "n")) rc.model.n = to_int(*v, "model.n");
  if (const auto* v = get("model", "input_len")) rc.model.input_len = to_int(*v, "model.input_len");
  if (const auto* v = get("model", "first_filter_len"))
    rc.model.first_filter_len = to_int(*v, "model.first_filter_len");
  if (const auto* v = get("model", "first_stride"))
    rc.model.first_stride = to_int(*v, "model.first_stride");
  if (const auto* v = get("model", "first_channels"))
    rc.model.first_channels = to_int(*v, "model.first_channels");
  if (const auto* v = get("model", "channels"))
    rc.model.channel_schedule = to_int_list(*v, "model.channels");
  if (const auto* v = get("model", "mel_bands")) rc.model.mel_bands = to_int(*v, "model.mel_bands");
  if (const auto* v = get("model", "n_tags")) rc.model.n_tags = to_int(*v, "model.n_tags");
  if (const auto* v = get("model", "dropout")) rc.model.dropout = to_double(*v, "model.dropout");
  if (const auto* v = get("model", "fft_size")) rc.fft_size = to_int(*v, "model.fft_size");
  if (const auto* v = get("model", "hop")) rc.hop = to_int(*v, "model.hop");
  if (const auto* v = get("model", "mel_c")) rc.mel_C = to_double(*v, "model.mel_c");

  if (const auto* v = get("train", "lr0")) rc.train.lr0 = to_double(*v, "train.lr0");
  if (const auto* v = get("train", "momentum")) rc.train.momentum = to_double(*v, "train.momentum");
  if (const auto* v = get("train", "lr_factor")) rc.train.lr_factor = to_double(*v, "train.lr_factor");
  if (const auto* v = get("train", "patience")) rc.train.patience_epochs = to_int(*v, "train.patience");
  if (const auto* v = get("train", "max_decays")) rc.train.max_decays = to_int(*v, "train.max_decays");
  if (const auto* v = get("train", "batch_size")) rc.train.batch_size = to_int(*v, "train.batch_size");
  if (const auto* v = get("train", "dropout")) rc.train.dropout = to_double(*v, "train.dropout");
  if (const auto* v = get("train", "seed"))
    rc.train.seed = static_cast<std::uint64_t>(to_int(*v, "train.seed"));
  if (const auto* v = get("train", "max_epochs")) rc.train.max_epochs = to_int(*v, "train.max_epochs");

  if (const auto* v = get("eval", "macro")) rc.eval_macro = to_bool(*v, "eval.macro");

  if (const auto* v = get("viz", "layer")) rc.viz.layer_index = to_int(*v, "viz.layer");
  if (const auto* v = get("viz", "filters")) rc.viz.filters = to_int_list(*v, "viz.filters");
  if (const auto* v = get("viz", "input_len")) rc.viz.input_len = to_int(*v, "viz.input_len");
  if (const auto* v = get("viz", "steps")) rc.viz.steps = to_int(*v, "viz.steps");
  if (const auto* v = get("viz", "step_size")) rc.viz.step_size = to_double(*v, "viz.step_size");
  if (const auto* v = get("viz", "step_decay")) rc.viz.step_decay = to_double(*v, "viz.step_decay");
  if (const auto* v = get("viz", "seed"))
    rc.viz.seed = static_cast<std::uint64_t>(to_int(*v, "viz.seed"));
  if (const auto* v = get("viz", "backtrack")) rc.viz.backtrack = to_bool(*v, "viz.backtrack");

  if (const auto* v = get("paths", "checkpoint_dir")) rc.checkpoint_dir = *v;
  if (const auto* v = get("paths", "log_dir")) rc.log_dir = *v;

  // dropout lives on the model; the train section may override it
  if (get("train", "dropout")) rc.model.dropout = rc.train.dropout;
  return rc;
}

} // namespace samplecnn

#endif
