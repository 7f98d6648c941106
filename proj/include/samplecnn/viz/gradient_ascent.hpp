#ifndef SAMPLECNN_VIZ_GRADIENT_ASCENT_HPP
#define SAMPLECNN_VIZ_GRADIENT_ASCENT_HPP

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "samplecnn/core/parallel.hpp"
#include "samplecnn/core/rng.hpp"
#include "samplecnn/dsp/fft.hpp"
#include "samplecnn/model/network.hpp"

namespace samplecnn {

struct VizConfig {
  int layer_index = 0;
  std::vector<int> filters; // empty = every filter in the layer
  int input_len = 729;      // samples; kept near one analysis frame
  int steps = 100;
  double step_size = 0.1;
  double step_decay = 1.0;  // per-step multiplier on step_size
  std::uint64_t seed = 0;
  bool backtrack = false;   // halve the step whenever the objective drops
};

template <typename Scalar>
struct FilterEstimate {
  int filter_index = 0;
  Vector<Scalar> waveform;
  std::vector<double> trace;  // objective after init and after each step
  Vector<double> spectrum;    // one-sided DFT magnitude of waveform
  int peak_bin = 0;
  bool degenerate = false;    // ascent never found a usable gradient
};

namespace detail {

/// Truncated forward through layers [0, last] in infer-BN mode with just
/// enough cached state for the input-gradient pass. The objective is the
/// time-mean of the target filter's map at the stage output (post pool).
template <typename Scalar>
struct AscentPass {
  double objective = 0.0;
  std::vector<FeatureMap<Scalar>> conv_in;
  std::vector<FeatureMap<Scalar>> relu_out; // pre-pool, the ReLU mask source
  std::vector<IndexMatrix> pool_idx;
  std::vector<Index> pre_pool_time;
  FeatureMap<Scalar> stage_out;
};

template <typename Scalar>
AscentPass<Scalar> ascent_forward(const std::vector<LayerSpec>& layers,
                                  const ParamSet<Scalar>& params, int last,
                                  const Vector<Scalar>& input, int filter) {
  AscentPass<Scalar> pass;
  FeatureMap<Scalar> act = input.transpose();
  for (int li = 0; li <= last; ++li) {
    const LayerSpec& l = layers[static_cast<std::size_t>(li)];
    const LayerParams<Scalar>& lp = params.layers[static_cast<std::size_t>(li)];
    pass.conv_in.push_back(act);
    act = conv1d_forward(act, lp.conv);
    if (lp.bn) act = batchnorm_forward_infer(act, *lp.bn);
    if (l.kind != LayerKind::OutputDense) act = relu(act);
    pass.relu_out.push_back(act);
    if (l.pool_len > 1) {
      pass.pre_pool_time.push_back(act.cols());
      auto pr = maxpool1d_forward(act, l.pool_len);
      pass.pool_idx.push_back(std::move(pr.argmax));
      act = std::move(pr.out);
    } else {
      pass.pre_pool_time.push_back(0);
      pass.pool_idx.emplace_back();
    }
  }
  if (filter < 0 || filter >= act.rows())
    throw ConfigError("gradient_ascent: filter index " + std::to_string(filter) +
                      " out of range for layer with " + std::to_string(act.rows()) +
                      " filters");
  pass.objective = act.row(filter).template cast<double>().mean();
  pass.stage_out = std::move(act);
  return pass;
}

template <typename Scalar>
Vector<Scalar> ascent_input_grad(const std::vector<LayerSpec>& layers,
                                 const ParamSet<Scalar>& params, int last,
                                 const AscentPass<Scalar>& pass, int filter) {
  FeatureMap<Scalar> up =
      FeatureMap<Scalar>::Zero(pass.stage_out.rows(), pass.stage_out.cols());
  up.row(filter).setConstant(static_cast<Scalar>(1.0 / pass.stage_out.cols()));
  for (int li = last; li >= 0; --li) {
    const LayerSpec& l = layers[static_cast<std::size_t>(li)];
    const LayerParams<Scalar>& lp = params.layers[static_cast<std::size_t>(li)];
    if (l.pool_len > 1)
      up = maxpool1d_backward(pass.pool_idx[static_cast<std::size_t>(li)],
                              pass.pre_pool_time[static_cast<std::size_t>(li)], up);
    if (l.kind != LayerKind::OutputDense)
      up = relu_backward(pass.relu_out[static_cast<std::size_t>(li)], up);
    if (lp.bn) up = batchnorm_backward_infer(*lp.bn, up);
    const auto cg = conv1d_backward(pass.conv_in[static_cast<std::size_t>(li)], lp.conv, up);
    up = cg.dinput;
  }
  return up.row(0).transpose();
}

} // namespace detail

/// Activation maximization: start from unit-variance noise, repeatedly
/// add step_size times the L2-normalized input gradient of the target
/// filter's time-mean activation. BN runs on inference statistics so the
/// objective is deterministic in the input.
template <typename Scalar>
FilterEstimate<Scalar> gradient_ascent(const std::vector<LayerSpec>& layers,
                                       const ParamSet<Scalar>& params, const VizConfig& cfg,
                                       int filter) {
  if (cfg.layer_index < 0 || cfg.layer_index >= static_cast<int>(layers.size()))
    throw ConfigError("gradient_ascent: layer index out of range");
  if (cfg.steps < 0 || cfg.input_len < 1) throw ConfigError("gradient_ascent: bad config");

  if (cfg.input_len < layers.front().filter_len)
    throw ConfigError("gradient_ascent: input_len " + std::to_string(cfg.input_len) +
                      " shorter than the first-layer filter " +
                      std::to_string(layers.front().filter_len));

  FilterEstimate<Scalar> est;
  est.filter_index = filter;
  const int last = cfg.layer_index;

  for (int attempt = 0; attempt < 3; ++attempt) {
    auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(filter),
                        static_cast<std::uint64_t>(attempt));
    std::normal_distribution<double> noise(0.0, 1.0);
    Vector<Scalar> x(cfg.input_len);
    for (Index i = 0; i < x.size(); ++i) x[i] = static_cast<Scalar>(noise(rng));

    auto pass = detail::ascent_forward(layers, params, last, x, filter);
    Vector<Scalar> grad = detail::ascent_input_grad(layers, params, last, pass, filter);
    const double g0 = grad.template cast<double>().norm();
    if (!(g0 > 1e-12)) continue; // dead start, retry with a new seed

    est.trace.clear();
    est.trace.push_back(pass.objective);
    double step = cfg.step_size;
    for (int it = 0; it < cfg.steps; ++it) {
      const double gnorm = grad.template cast<double>().norm();
      if (!(gnorm > 1e-12)) break; // plateau
      const Vector<Scalar> dir = grad / static_cast<Scalar>(gnorm);
      Vector<Scalar> x_next = x + static_cast<Scalar>(step) * dir;
      auto pass_next = detail::ascent_forward(layers, params, last, x_next, filter);
      if (cfg.backtrack) {
        int halvings = 0;
        while (pass_next.objective < pass.objective && halvings < 40) {
          step *= 0.5;
          x_next = x + static_cast<Scalar>(step) * dir;
          pass_next = detail::ascent_forward(layers, params, last, x_next, filter);
          ++halvings;
        }
        if (pass_next.objective < pass.objective) break; // cannot improve
      }
      x = std::move(x_next);
      pass = std::move(pass_next);
      est.trace.push_back(pass.objective);
      grad = detail::ascent_input_grad(layers, params, last, pass, filter);
      step *= cfg.step_decay;
    }
    est.waveform = x;
    est.degenerate = false;
    est.spectrum = magnitude_spectrum(x.template cast<double>().eval());
    Index peak = 0;
    est.spectrum.maxCoeff(&peak);
    est.peak_bin = static_cast<int>(peak);
    return est;
  }

  est.degenerate = true;
  est.waveform = Vector<Scalar>::Zero(cfg.input_len);
  est.trace.assign(1, 0.0);
  est.spectrum = Vector<double>::Zero(onesided_bins(cfg.input_len));
  est.peak_bin = 0;
  return est;
}

/// One estimate per requested filter, sorted ascending by the spectral
/// peak bin of the estimated waveform.
template <typename Scalar>
std::vector<FilterEstimate<Scalar>> layer_spectra(const std::vector<LayerSpec>& layers,
                                                  const ParamSet<Scalar>& params,
                                                  const VizConfig& cfg, int threads = 1) {
  const int n_filters =
      layers[static_cast<std::size_t>(cfg.layer_index)].out_channels;
  std::vector<int> wanted = cfg.filters;
  if (wanted.empty()) {
    wanted.resize(static_cast<std::size_t>(n_filters));
    for (int i = 0; i < n_filters; ++i) wanted[static_cast<std::size_t>(i)] = i;
  }
  std::vector<FilterEstimate<Scalar>> estimates(wanted.size());
  parallel_for(static_cast<int>(wanted.size()), threads, [&](int i) {
    estimates[static_cast<std::size_t>(i)] =
        gradient_ascent(layers, params, cfg, wanted[static_cast<std::size_t>(i)]);
  });
  std::stable_sort(estimates.begin(), estimates.end(),
                   [](const auto& a, const auto& b) { return a.peak_bin < b.peak_bin; });
  return estimates;
}

/// CSV matrix (one row per frequency bin, one column per sorted filter)
/// plus a JSON sidecar with the config and per-filter metadata.
template <typename Scalar>
void export_spectra(const std::vector<FilterEstimate<Scalar>>& estimates,
                    const VizConfig& cfg, const std::string& csv_path,
                    const std::string& meta_path) {
  if (estimates.empty()) throw ConfigError("export_spectra: empty estimate list");
  const Index bins = estimates.front().spectrum.size();
  for (const auto& e : estimates)
    if (e.spectrum.size() != bins)
      throw ShapeError("export_spectra: inconsistent spectrum lengths");

  std::ofstream os(csv_path);
  if (!os) throw DataError("export_spectra: cannot open " + csv_path);
  os.precision(17);
  for (Index b = 0; b < bins; ++b) {
    for (std::size_t f = 0; f < estimates.size(); ++f) {
      if (f) os << ',';
      os << estimates[f].spectrum[b];
    }
    os << '\n';
  }
  if (!os) throw DataError("export_spectra: write failed for " + csv_path);

  nlohmann::json meta;
  meta["layer_index"] = cfg.layer_index;
  meta["objective"] = "time_mean_activation";
  meta["input_len"] = cfg.input_len;
  meta["steps"] = cfg.steps;
  meta["step_size"] = cfg.step_size;
  meta["step_decay"] = cfg.step_decay;
  meta["seed"] = cfg.seed;
  meta["bins"] = bins;
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& e : estimates)
    cols.push_back({{"filter", e.filter_index},
                    {"peak_bin", e.peak_bin},
                    {"degenerate", e.degenerate},
                    {"final_activation", e.trace.empty() ? 0.0 : e.trace.back()}});
  meta["columns"] = cols;
  std::ofstream ms(meta_path);
  if (!ms) throw DataError("export_spectra: cannot open " + meta_path);
  ms << meta.dump(2) << '\n';
}

/// Raw estimate dump: one little-endian float32 file per filter,
/// named filter_<index>.f32 inside dir.
template <typename Scalar>
void export_waveforms(const std::vector<FilterEstimate<Scalar>>& estimates,
                      const std::string& dir) {
  if (estimates.empty()) throw ConfigError("export_waveforms: empty estimate list");
  for (const auto& e : estimates) {
    const std::string path = dir + "/filter_" + std::to_string(e.filter_index) + ".f32";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("export_waveforms: cannot open " + path);
    for (Index i = 0; i < e.waveform.size(); ++i) {
      const float v = static_cast<float>(e.waveform[i]);
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      const unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                                  static_cast<unsigned char>((bits >> 8) & 0xff),
                                  static_cast<unsigned char>((bits >> 16) & 0xff),
                                  static_cast<unsigned char>((bits >> 24) & 0xff)};
      os.write(reinterpret_cast<const char*>(b), 4);
    }
    if (!os) throw DataError("export_waveforms: write failed for " + path);
  }
}

} // namespace samplecnn

#endif
