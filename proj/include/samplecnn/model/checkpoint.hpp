#ifndef SAMPLECNN_MODEL_CHECKPOINT_HPP
#define SAMPLECNN_MODEL_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "samplecnn/core/error.hpp"
#include "samplecnn/model/network.hpp"
#include "samplecnn/train/schedule.hpp"

namespace samplecnn {

/// Serializable training progress stored next to the parameters.
struct CheckpointState {
  int epoch = 0;
  int decays_done = 0;
  int epochs_since_improve = 0;
  double best_val_loss = 0.0;
  std::string rng_state; // mt19937_64 stream state, may be empty
};

namespace detail {

inline nlohmann::json spec_to_json(const ModelSpec& s) {
  return nlohmann::json{{"family", family_name(s.family)},
                        {"m", s.m},
                        {"n", s.n},
                        {"input_len", s.input_len},
                        {"first_filter_len", s.first_filter_len},
                        {"first_stride", s.first_stride},
                        {"first_channels", s.first_channels},
                        {"channel_schedule", s.channel_schedule},
                        {"mel_bands", s.mel_bands},
                        {"n_tags", s.n_tags},
                        {"dropout", s.dropout}};
}

inline ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.family = parse_family(j.at("family").get<std::string>());
  s.m = j.at("m").get<int>();
  s.n = j.at("n").get<int>();
  s.input_len = j.at("input_len").get<int>();
  s.first_filter_len = j.at("first_filter_len").get<int>();
  s.first_stride = j.at("first_stride").get<int>();
  s.first_channels = j.at("first_channels").get<int>();
  s.channel_schedule = j.at("channel_schedule").get<std::vector<int>>();
  s.mel_bands = j.at("mel_bands").get<int>();
  s.n_tags = j.at("n_tags").get<int>();
  s.dropout = j.at("dropout").get<double>();
  return s;
}

inline bool spec_equal(const ModelSpec& a, const ModelSpec& b) {
  return a.family == b.family && a.m == b.m && a.n == b.n && a.input_len == b.input_len &&
         a.first_filter_len == b.first_filter_len && a.first_stride == b.first_stride &&
         a.first_channels == b.first_channels && a.channel_schedule == b.channel_schedule &&
         a.mel_bands == b.mel_bands && a.n_tags == b.n_tags;
}

inline void write_f32(std::ostream& os, const float* data, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &data[i], 4);
    const unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                                static_cast<unsigned char>((bits >> 8) & 0xff),
                                static_cast<unsigned char>((bits >> 16) & 0xff),
                                static_cast<unsigned char>((bits >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
  }
}

inline void read_f32(std::istream& is, float* data, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw CheckpointError("checkpoint: truncated array data");
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                               (static_cast<std::uint32_t>(b[1]) << 8) |
                               (static_cast<std::uint32_t>(b[2]) << 16) |
                               (static_cast<std::uint32_t>(b[3]) << 24);
    std::memcpy(&data[i], &bits, 4);
  }
}

// Canonical (out, in, tap) order regardless of the in-memory layout.
inline std::vector<float> conv_weight_canonical(const ConvParams<float>& c) {
  std::vector<float> flat;
  flat.reserve(static_cast<std::size_t>(c.weight.size()));
  for (int o = 0; o < c.out_channels(); ++o)
    for (int i = 0; i < c.in_channels; ++i)
      for (int k = 0; k < c.filter_len; ++k) flat.push_back(c.w(o, i, k));
  return flat;
}

inline void conv_weight_from_canonical(ConvParams<float>& c, const std::vector<float>& flat) {
  std::size_t idx = 0;
  for (int o = 0; o < c.out_channels(); ++o)
    for (int i = 0; i < c.in_channels; ++i)
      for (int k = 0; k < c.filter_len; ++k) c.w(o, i, k) = flat[idx++];
}

} // namespace detail

/// Checkpoint layout: one line of JSON (format, model spec, train state,
/// array manifest) followed by the declared little-endian float32 arrays
/// in order. Conv weights are stored in (out, in, tap) order.
inline void save_checkpoint(const std::string& path, const ModelSpec& spec,
                            const ParamSet<float>& params, const CheckpointState& state) {
  const ModelSpec s = resolve_spec(spec);
  nlohmann::json header;
  header["format"] = "samplecnn-checkpoint";
  header["version"] = 1;
  header["model"] = detail::spec_to_json(s);
  header["state"] = {{"epoch", state.epoch},
                     {"decays_done", state.decays_done},
                     {"epochs_since_improve", state.epochs_since_improve},
                     {"best_val_loss", state.best_val_loss},
                     {"rng_state", state.rng_state}};
  nlohmann::json arrays = nlohmann::json::array();
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const auto& lp = params.layers[li];
    const std::string prefix = "layer" + std::to_string(li) + ".";
    arrays.push_back({{"name", prefix + "weight"},
                      {"shape", {lp.conv.out_channels(), lp.conv.in_channels, lp.conv.filter_len}}});
    arrays.push_back({{"name", prefix + "bias"}, {"shape", {lp.conv.bias.size()}}});
    if (lp.bn) {
      for (const char* field : {"gamma", "beta", "running_mean", "running_var"})
        arrays.push_back({{"name", prefix + field}, {"shape", {lp.bn->gamma.size()}}});
    }
  }
  header["arrays"] = arrays;

  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("save_checkpoint: cannot open " + path + " for writing");
  os << header.dump() << '\n';
  for (const auto& lp : params.layers) {
    const auto flat = detail::conv_weight_canonical(lp.conv);
    detail::write_f32(os, flat.data(), flat.size());
    detail::write_f32(os, lp.conv.bias.data(), static_cast<std::size_t>(lp.conv.bias.size()));
    if (lp.bn) {
      detail::write_f32(os, lp.bn->gamma.data(), static_cast<std::size_t>(lp.bn->gamma.size()));
      detail::write_f32(os, lp.bn->beta.data(), static_cast<std::size_t>(lp.bn->beta.size()));
      detail::write_f32(os, lp.bn->running_mean.data(),
                        static_cast<std::size_t>(lp.bn->running_mean.size()));
      detail::write_f32(os, lp.bn->running_var.data(),
                        static_cast<std::size_t>(lp.bn->running_var.size()));
    }
  }
  if (!os) throw DataError("save_checkpoint: write failed for " + path);
}

struct Checkpoint {
  ModelSpec spec;
  ParamSet<float> params;
  CheckpointState state;
};

/// Loads and shape-checks a checkpoint; pass expected_spec to enforce a
/// match with the configured model.
inline Checkpoint load_checkpoint(const std::string& path,
                                  const ModelSpec* expected_spec = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("load_checkpoint: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw CheckpointError("load_checkpoint: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("load_checkpoint: bad header: ") + e.what());
  }
  if (header.value("format", "") != "samplecnn-checkpoint")
    throw CheckpointError("load_checkpoint: not a checkpoint file: " + path);
  if (header.value("version", 0) != 1)
    throw CheckpointError("load_checkpoint: unsupported version");

  Checkpoint ckpt;
  try {
    ckpt.spec = detail::spec_from_json(header.at("model"));
    const auto& st = header.at("state");
    ckpt.state.epoch = st.at("epoch").get<int>();
    ckpt.state.decays_done = st.at("decays_done").get<int>();
    ckpt.state.epochs_since_improve = st.at("epochs_since_improve").get<int>();
    ckpt.state.best_val_loss = st.at("best_val_loss").get<double>();
    ckpt.state.rng_state = st.at("rng_state").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("load_checkpoint: bad header fields: ") + e.what());
  }
  if (expected_spec &&
      !detail::spec_equal(resolve_spec(*expected_spec), resolve_spec(ckpt.spec)))
    throw CheckpointError("load_checkpoint: checkpoint model spec does not match the "
                          "configured model");

  // Rebuild the parameter frame from the stored model spec, then fill
  // from the stream.
  ckpt.params = init_params<float>(ckpt.spec, 0);
  const auto& arrays = header.at("arrays");
  std::size_t ai = 0;
  auto expect_shape = [&](const std::vector<long>& want) {
    if (ai >= arrays.size()) throw CheckpointError("load_checkpoint: array manifest too short");
    const auto got = arrays[ai].at("shape").get<std::vector<long>>();
    if (got != want)
      throw CheckpointError("load_checkpoint: shape mismatch for " +
                            arrays[ai].at("name").get<std::string>());
    ++ai;
  };
  for (auto& lp : ckpt.params.layers) {
    expect_shape({lp.conv.out_channels(), lp.conv.in_channels, lp.conv.filter_len});
    std::vector<float> flat(static_cast<std::size_t>(lp.conv.weight.size()));
    detail::read_f32(is, flat.data(), flat.size());
    detail::conv_weight_from_canonical(lp.conv, flat);
    expect_shape({static_cast<long>(lp.conv.bias.size())});
    detail::read_f32(is, lp.conv.bias.data(), static_cast<std::size_t>(lp.conv.bias.size()));
    if (lp.bn) {
      for (auto* vec : {&lp.bn->gamma, &lp.bn->beta, &lp.bn->running_mean, &lp.bn->running_var}) {
        expect_shape({static_cast<long>(vec->size())});
        detail::read_f32(is, vec->data(), static_cast<std::size_t>(vec->size()));
      }
    }
  }
  if (ai != arrays.size())
    throw CheckpointError("load_checkpoint: array manifest has extra entries");
  return ckpt;
}

} // namespace samplecnn

#endif
