#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "samplecnn/model/checkpoint.hpp"
#include "samplecnn/model/network.hpp"
#include "samplecnn/model/spec.hpp"

using namespace samplecnn;

namespace {

ModelSpec table1_spec() {
  ModelSpec s;
  s.family = Family::RawSample;
  s.m = 3;
  s.n = 9;
  s.input_len = 59049;
  s.channel_schedule = {128, 128, 256, 256, 256, 256, 256, 256, 512};
  s.n_tags = 50;
  return s;
}

struct Table2Row {
  int m, n, input, stride;
};

// the small-input column of every m^n block in the comparison grid
const std::vector<Table2Row> kTable2 = {
    {2, 6, 16384, 256},  {2, 7, 16384, 128}, {2, 8, 16384, 64},  {2, 9, 16384, 32},
    {2, 10, 16384, 16},  {2, 11, 16384, 8},  {2, 12, 16384, 4},  {2, 13, 16384, 2},
    {3, 3, 19683, 729},  {3, 4, 19683, 243}, {3, 5, 19683, 81},  {3, 6, 19683, 27},
    {3, 7, 19683, 9},    {3, 8, 19683, 3},   {4, 3, 16384, 256}, {4, 4, 16384, 64},
    {4, 5, 16384, 16},   {4, 6, 16384, 4},   {5, 3, 15625, 125}, {5, 4, 15625, 25},
    {5, 5, 15625, 5}};

// the large-input column rows (structural check only)
const std::vector<Table2Row> kTable2Large = {
    {2, 7, 32768, 256},  {2, 8, 32768, 128}, {2, 9, 32768, 64},  {2, 10, 32768, 32},
    {2, 11, 32768, 16},  {2, 12, 32768, 8},  {2, 13, 32768, 4},  {2, 14, 32768, 2},
    {3, 4, 59049, 729},  {3, 5, 59049, 243}, {3, 6, 59049, 81},  {3, 7, 59049, 27},
    {3, 8, 59049, 9},    {3, 9, 59049, 3},   {4, 4, 65536, 256}, {4, 5, 65536, 64},
    {4, 6, 65536, 16},   {4, 7, 65536, 4},   {5, 4, 78125, 125}, {5, 5, 78125, 25},
    {5, 6, 78125, 5}};

} // namespace

TEST_CASE("build_mn reproduces the reference 3^9 layer table") {
  const auto spec = table1_spec();
  const auto layers = build_mn(spec);
  REQUIRE(layers.size() == 1 + 9 + 1 + 1);
  CHECK(layers[0].kind == LayerKind::StridedConv);
  CHECK(layers[0].filter_len == 3);
  CHECK(layers[0].stride == 3);
  CHECK(layers[0].out_channels == 128);
  CHECK(layers[0].pool_len == 1); // the strided layer has no pooling
  for (int i = 1; i <= 9; ++i) {
    CHECK(layers[static_cast<std::size_t>(i)].kind == LayerKind::ConvBlock);
    CHECK(layers[static_cast<std::size_t>(i)].filter_len == 3);
    CHECK(layers[static_cast<std::size_t>(i)].pool_len == 3);
  }
  CHECK(layers[10].kind == LayerKind::FinalConv);
  CHECK(layers[10].filter_len == 1);
  CHECK(layers[10].out_channels == 512);
  CHECK(layers[11].kind == LayerKind::OutputDense);
  CHECK(layers[11].out_channels == 50);

  const auto shapes = plan_shapes(spec);
  const std::vector<std::pair<int, int>> want = {
      {128, 19683}, {128, 6561}, {128, 2187}, {256, 729}, {256, 243}, {256, 81},
      {256, 27},    {256, 9},    {256, 3},    {512, 1},   {512, 1},   {50, 1}};
  REQUIRE(shapes.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(shapes[i].channels == want[i].first);
    CHECK(shapes[i].time == want[i].second);
  }
}

TEST_CASE("count_params matches the reference table exactly") {
  const auto spec = table1_spec();
  const auto counts = count_params(spec);
  const std::vector<long> want = {512,    49280,  49280,  98560,  196864, 196864,
                                  196864, 196864, 196864, 393728, 262656, 25650};
  REQUIRE(counts.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(counts[i].conv == want[i]);
  CHECK(total_conv_params(spec) == 1863986);

  // single-layer spot checks
  CHECK(counts[0].conv == 512);    // conv 3-128 on 1 channel
  CHECK(counts[4].conv == 196864); // conv 3-256 on 256 channels
}

TEST_CASE("count_params is invariant to input length") {
  ModelSpec a = table1_spec();
  ModelSpec b = table1_spec();
  b.input_len = 19683;
  b.first_stride = 1;
  b.first_filter_len = 3; // parameters depend on the filter, not the stride
  const auto ca = count_params(a);
  const auto cb = count_params(b);
  REQUIRE(ca.size() == cb.size());
  for (std::size_t i = 0; i < ca.size(); ++i) CHECK(ca[i].conv == cb[i].conv);
}

TEST_CASE("every comparison-grid config builds with the right first stride") {
  for (const auto& row : kTable2) {
    CAPTURE(row.m);
    CAPTURE(row.n);
    ModelSpec s;
    s.family = Family::RawSample;
    s.m = row.m;
    s.n = row.n;
    s.input_len = row.input;
    const auto resolved = resolve_spec(s);
    CHECK(resolved.first_stride == row.stride);
    CHECK(resolved.first_filter_len == row.stride);
    const auto shapes = plan_shapes(s);
    CHECK(shapes[shapes.size() - 3].time == 1); // entering the final conv
    CHECK(shapes.back().channels == 50);
  }
  for (const auto& row : kTable2Large) {
    ModelSpec s;
    s.family = Family::RawSample;
    s.m = row.m;
    s.n = row.n;
    s.input_len = row.input;
    CHECK(resolve_spec(s).first_stride == row.stride);
    CHECK(plan_shapes(s).back().channels == 50);
  }
}

TEST_CASE("2^13 temporal halving sequence") {
  ModelSpec s;
  s.family = Family::RawSample;
  s.m = 2;
  s.n = 13;
  s.input_len = 16384;
  const auto shapes = plan_shapes(s);
  CHECK(resolve_spec(s).first_stride == 2);
  int t = 8192;
  CHECK(shapes[0].time == t);
  for (int i = 1; i <= 13; ++i) {
    t /= 2;
    CHECK(shapes[static_cast<std::size_t>(i)].time == t);
  }
  CHECK(shapes[13].time == 1);
}

TEST_CASE("divisibility violations are config errors naming both values") {
  ModelSpec s = table1_spec();
  s.input_len = 59050;
  try {
    resolve_spec(s);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("59050") != std::string::npos);
  }

  // mel family: frames must equal m^n
  ModelSpec mel;
  mel.family = Family::MelFrame;
  mel.m = 3;
  mel.n = 6;
  mel.input_len = 728;
  CHECK_THROWS_AS(resolve_spec(mel), ConfigError);
}

TEST_CASE("raw_frame family supports filter length above stride") {
  ModelSpec s;
  s.family = Family::RawFrame;
  s.m = 3;
  s.n = 5;
  s.input_len = 59049;
  s.first_filter_len = 729;
  s.first_stride = 243;
  s.mel_bands = 128;
  const auto shapes = plan_shapes(s);
  CHECK(shapes[0].time == 243); // frame count set by the stride alone
  CHECK(shapes[shapes.size() - 3].time == 1);

  // and the padded forward pass agrees
  auto params = init_params<float>(s, 1);
  const auto layers = build_mn(s);
  std::vector<FeatureMap<float>> batch{FeatureMap<float>::Random(1, 59049)};
  const auto probs = forward(layers, params, batch, Mode::Infer, nullptr, nullptr, 0.0);
  CHECK(probs[0].size() == 50);
}

TEST_CASE("mel family omits the strided layer and takes band channels") {
  ModelSpec s;
  s.family = Family::MelFrame;
  s.m = 3;
  s.n = 6;
  s.input_len = 729;
  s.mel_bands = 128;
  s.channel_schedule = {32, 32, 32, 64, 64, 64};
  s.n_tags = 10;
  const auto layers = build_mn(s);
  CHECK(layers.front().kind == LayerKind::ConvBlock);
  REQUIRE(layers.size() == 6 + 2);
  const auto counts = count_params(s);
  CHECK(counts[0].conv == 32L * 128 * 3 + 32); // first block sees 128 input bands

  auto params = init_params<float>(s, 3);
  std::vector<FeatureMap<float>> batch{FeatureMap<float>::Random(128, 729)};
  const auto probs = forward(layers, params, batch, Mode::Infer, nullptr, nullptr, 0.0);
  CHECK(probs[0].size() == 10);
}

TEST_CASE("init_params is deterministic and Glorot-scaled") {
  const auto spec = table1_spec();
  const auto a = init_params<float>(spec, 42);
  const auto b = init_params<float>(spec, 42);
  REQUIRE(a.layers.size() == b.layers.size());
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    CHECK(a.layers[i].conv.weight == b.layers[i].conv.weight);
    CHECK(a.layers[i].conv.bias.isZero(0.0f));
    if (a.layers[i].bn) {
      CHECK((a.layers[i].bn->gamma.array() == 1.0f).all());
      CHECK(a.layers[i].bn->beta.isZero(0.0f));
      CHECK(a.layers[i].bn->running_mean.isZero(0.0f));
      CHECK((a.layers[i].bn->running_var.array() == 1.0f).all());
    }
  }
  const auto c = init_params<float>(spec, 43);
  CHECK(a.layers[0].conv.weight != c.layers[0].conv.weight);

  // sample variance of a big layer within 20% of 2/(fan_in+fan_out)
  const auto& w = a.layers[4].conv.weight; // 256x(256*3), ~197k weights
  REQUIRE(w.size() >= 10000);
  const double mean = w.template cast<double>().mean();
  const double var = w.template cast<double>().array().square().mean() - mean * mean;
  const double fan_in = 256.0 * 3, fan_out = 256.0 * 3;
  const double want = 2.0 / (fan_in + fan_out);
  CHECK(std::abs(var - want) / want < 0.2);
}

TEST_CASE("forward emits probabilities and the reference shape trace") {
  ModelSpec s = table1_spec();
  auto params = init_params<float>(s, 7);
  const auto layers = build_mn(s);

  // shapes at every layer via the cache of a train-mode pass
  std::vector<FeatureMap<float>> batch{FeatureMap<float>::Random(1, 59049)};
  ForwardCache<float> cache;
  std::mt19937_64 rng(1);
  const auto probs = forward(layers, params, batch, Mode::Train, &cache, &rng, s.dropout);
  REQUIRE(probs.size() == 1);
  CHECK(probs[0].size() == 50);
  CHECK((probs[0].array() > 0.0f).all());
  CHECK((probs[0].array() < 1.0f).all());

  const auto shapes = plan_shapes(s);
  // conv_in of layer i+1 is the output of layer i
  for (std::size_t i = 1; i < layers.size(); ++i) {
    CHECK(cache.layers[i].conv_in[0].rows() == shapes[i - 1].channels);
    CHECK(cache.layers[i].conv_in[0].cols() == shapes[i - 1].time);
  }
}

TEST_CASE("zero input with identity stats sees only the output bias") {
  ModelSpec s;
  s.family = Family::RawSample;
  s.m = 3;
  s.n = 2;
  s.input_len = 27;
  s.channel_schedule = {4, 4};
  s.n_tags = 5;
  s.dropout = 0.0;
  auto params = init_params<float>(s, 11);
  params.layers.back().conv.bias.setConstant(0.3f);
  const auto layers = build_mn(s);
  std::vector<FeatureMap<float>> batch{FeatureMap<float>::Zero(1, 27)};
  const auto probs = forward(layers, params, batch, Mode::Infer, nullptr, nullptr, 0.0);
  const float want = 1.0f / (1.0f + std::exp(-0.3f));
  for (Index t = 0; t < 5; ++t)
    CHECK(probs[0][t] == doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("input length mismatch raises a shape error") {
  ModelSpec s;
  s.family = Family::RawSample;
  s.m = 3;
  s.n = 2;
  s.input_len = 27;
  s.channel_schedule = {4, 4};
  auto params = init_params<float>(s, 1);
  const auto layers = build_mn(s);
  std::vector<FeatureMap<float>> batch{FeatureMap<float>::Random(1, 28)};
  CHECK_THROWS_AS(forward(layers, params, batch, Mode::Infer, nullptr, nullptr, 0.0),
                  Error);
}

TEST_CASE("end-to-end gradients of a tiny 3^2 model match finite differences") {
  ModelSpec s;
  s.family = Family::RawSample;
  s.m = 3;
  s.n = 2;
  s.input_len = 27;
  s.channel_schedule = {4, 4};
  s.n_tags = 3;
  s.dropout = 0.0; // keep the loss deterministic for differencing
  const auto layers = build_mn(s);

  std::mt19937_64 data_rng(21);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    auto params = init_params<double>(s, 100 + static_cast<std::uint64_t>(trial));
    std::vector<FeatureMap<double>> batch(2);
    for (auto& x : batch) {
      x.resize(1, 27);
      for (Index t = 0; t < 27; ++t) x(0, t) = g(data_rng);
    }
    Matrix<double> targets(3, 2);
    for (Index c = 0; c < 2; ++c)
      for (Index r = 0; r < 3; ++r) targets(r, c) = (data_rng() % 2) ? 1.0 : 0.0;

    auto loss_of = [&](ParamSet<double>& p) {
      auto pc = p; // running stats mutate in train mode
      const auto probs =
          forward(layers, pc, batch, Mode::Train, nullptr, nullptr, 0.0);
      Matrix<double> pred(3, 2);
      for (Index c = 0; c < 2; ++c) pred.col(c) = probs[static_cast<std::size_t>(c)];
      return bce_loss(pred, targets).loss;
    };

    ForwardCache<double> cache;
    auto pf = params;
    const auto probs = forward(layers, pf, batch, Mode::Train, &cache, nullptr, 0.0);
    Matrix<double> pred(3, 2);
    for (Index c = 0; c < 2; ++c) pred.col(c) = probs[static_cast<std::size_t>(c)];
    const auto bce = bce_loss(pred, targets);
    std::vector<Vector<double>> dlogits{bce.dlogits.col(0), bce.dlogits.col(1)};
    const auto grads = backward(layers, params, cache, dlogits);

    // spot-check a sample of parameters in every layer
    std::mt19937_64 pick(static_cast<std::uint64_t>(trial));
    for (std::size_t li = 0; li < layers.size(); ++li) {
      auto& lp = params.layers[li];
      const auto& lg = grads.layers[li];
      for (int rep = 0; rep < 6; ++rep) {
        const Index r = static_cast<Index>(pick() % static_cast<std::uint64_t>(lp.conv.weight.rows()));
        const Index c = static_cast<Index>(pick() % static_cast<std::uint64_t>(lp.conv.weight.cols()));
        const double save = lp.conv.weight(r, c);
        const double num = oracles::central_diff(
            [&](double v) {
              lp.conv.weight(r, c) = v;
              const double l = loss_of(params);
              lp.conv.weight(r, c) = save;
              return l;
            },
            save, 1e-5);
        CHECK(oracles::grad_close(lg.dweight(r, c), num, 1e-4));
      }
      {
        const Index r = static_cast<Index>(pick() % static_cast<std::uint64_t>(lp.conv.bias.size()));
        const double save = lp.conv.bias[r];
        const double num = oracles::central_diff(
            [&](double v) {
              lp.conv.bias[r] = v;
              const double l = loss_of(params);
              lp.conv.bias[r] = save;
              return l;
            },
            save, 1e-5);
        CHECK(oracles::grad_close(lg.dbias[r], num, 1e-4));
      }
      if (lp.bn) {
        const Index r = static_cast<Index>(pick() % static_cast<std::uint64_t>(lp.bn->gamma.size()));
        const double save_g = lp.bn->gamma[r];
        const double num_g = oracles::central_diff(
            [&](double v) {
              lp.bn->gamma[r] = v;
              const double l = loss_of(params);
              lp.bn->gamma[r] = save_g;
              return l;
            },
            save_g, 1e-5);
        CHECK(oracles::grad_close(lg.dgamma[r], num_g, 1e-4));
        const double save_b = lp.bn->beta[r];
        const double num_b = oracles::central_diff(
            [&](double v) {
              lp.bn->beta[r] = v;
              const double l = loss_of(params);
              lp.bn->beta[r] = save_b;
              return l;
            },
            save_b, 1e-5);
        CHECK(oracles::grad_close(lg.dbeta[r], num_b, 1e-4));
      }
    }

    // zero loss gradient -> zero parameter gradients
    std::vector<Vector<double>> zeros{Vector<double>::Zero(3), Vector<double>::Zero(3)};
    const auto gz = backward(layers, params, cache, zeros);
    for (const auto& lg : gz.layers) {
      CHECK(lg.dweight.isZero(0.0));
      CHECK(lg.dbias.isZero(0.0));
    }
  }
}

TEST_CASE("gradient shapes mirror parameter shapes across the grid") {
  for (const auto& row : kTable2) {
    if (row.n > 8) continue; // keep the structural check cheap
    ModelSpec s;
    s.family = Family::RawSample;
    s.m = row.m;
    s.n = row.n;
    s.input_len = row.input;
    s.n_tags = 7;
    s.dropout = 0.0;
    // tiny channels for speed
    s.channel_schedule.assign(static_cast<std::size_t>(row.n), 2);
    s.first_channels = 2;
    const auto layers = build_mn(s);
    auto params = init_params<float>(s, 2);
    std::vector<FeatureMap<float>> batch{FeatureMap<float>::Random(1, row.input)};
    ForwardCache<float> cache;
    const auto probs = forward(layers, params, batch, Mode::Train, &cache, nullptr, 0.0);
    std::vector<Vector<float>> dlogits{Vector<float>::Random(7)};
    const auto grads = backward(layers, params, cache, dlogits);
    REQUIRE(grads.layers.size() == params.layers.size());
    for (std::size_t i = 0; i < grads.layers.size(); ++i) {
      CHECK(grads.layers[i].dweight.rows() == params.layers[i].conv.weight.rows());
      CHECK(grads.layers[i].dweight.cols() == params.layers[i].conv.weight.cols());
      CHECK(grads.layers[i].dbias.size() == params.layers[i].conv.bias.size());
      if (params.layers[i].bn)
        CHECK(grads.layers[i].dgamma.size() == params.layers[i].bn->gamma.size());
    }
    break; // one spot check per run is enough here; the full grid runs in acceptance
  }
}

TEST_CASE("full 3^9 checkpoint declares every array and sizes add up") {
  const auto spec = table1_spec();
  const auto params = init_params<float>(spec, 3);
  const auto path =
      (std::filesystem::temp_directory_path() / "table1.ckpt").string();
  save_checkpoint(path, spec, params, CheckpointState{});

  // header line + little-endian float32 payload
  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  const auto j = nlohmann::json::parse(header);

  long conv_floats = 0, bn_floats = 0;
  std::size_t arrays = 0;
  for (const auto& lp : params.layers) {
    conv_floats += lp.conv.weight.size() + lp.conv.bias.size();
    arrays += 2;
    if (lp.bn) {
      bn_floats += 4 * lp.bn->gamma.size();
      arrays += 4;
    }
  }
  CHECK(conv_floats == 1863986); // the declared-parameter total
  CHECK(j.at("arrays").size() == arrays);
  const auto file_size = std::filesystem::file_size(path);
  CHECK(static_cast<long>(file_size) ==
        static_cast<long>(header.size()) + 1 + 4 * (conv_floats + bn_floats));
}

TEST_CASE("checkpoint round trip is bit exact") {
  ModelSpec s;
  s.family = Family::RawSample;
  s.m = 3;
  s.n = 2;
  s.input_len = 27;
  s.channel_schedule = {4, 4};
  s.n_tags = 3;
  auto params = init_params<float>(s, 9);
  // make running stats non-trivial
  params.layers[0].bn->running_mean.setConstant(0.25f);
  params.layers[0].bn->running_var.setConstant(1.75f);

  CheckpointState state;
  state.epoch = 12;
  state.decays_done = 2;
  state.epochs_since_improve = 1;
  state.best_val_loss = 0.123456789012345;
  state.rng_state = "12345 678";

  const auto path =
      (std::filesystem::temp_directory_path() / "model_roundtrip.ckpt").string();
  save_checkpoint(path, s, params, state);
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.state.epoch == 12);
  CHECK(loaded.state.decays_done == 2);
  CHECK(loaded.state.best_val_loss == 0.123456789012345);
  CHECK(loaded.state.rng_state == "12345 678");
  REQUIRE(loaded.params.layers.size() == params.layers.size());
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    CHECK(loaded.params.layers[i].conv.weight == params.layers[i].conv.weight);
    CHECK(loaded.params.layers[i].conv.bias == params.layers[i].conv.bias);
    if (params.layers[i].bn) {
      CHECK(loaded.params.layers[i].bn->gamma == params.layers[i].bn->gamma);
      CHECK(loaded.params.layers[i].bn->running_var == params.layers[i].bn->running_var);
    }
  }

  // mismatched spec on load is a checkpoint error
  ModelSpec other = s;
  other.channel_schedule = {4, 8};
  CHECK_THROWS_AS(load_checkpoint(path, &other), CheckpointError);

  // mangled header is rejected
  const auto bad = (std::filesystem::temp_directory_path() / "bad.ckpt").string();
  std::ofstream(bad) << "not json\n";
  CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);
}
