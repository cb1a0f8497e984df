#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ferrosyn/error.hpp"
#include "ferrosyn/snn.hpp"
#include "ferrosyn/vdsp.hpp"

using namespace ferrosyn;
using namespace ferrosyn::snn;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorCode::Io;
}

// Class k lights rows 2k+4 and 2k+5 (56 pixels).
std::vector<std::uint8_t> block_image(int k, std::uint8_t level = 255) {
  std::vector<std::uint8_t> px(kInputs, 0);
  for (int r = 2 * k + 4; r < 2 * k + 6; ++r) {
    for (int c = 0; c < 28; ++c) px[static_cast<std::size_t>(r * 28 + c)] = level;
  }
  return px;
}

Dataset block_dataset(int repeats) {
  Dataset d;
  for (int rep = 0; rep < repeats; ++rep) {
    for (int k = 0; k < 10; ++k) d.push_back(block_image(k), static_cast<std::uint8_t>(k));
  }
  return d;
}

Network hardwired(const SnnConfig& cfg) {
  Network net = make_network(cfg, 1);
  std::fill(net.weights.begin(), net.weights.end(), 0.0);
  for (int k = 0; k < 10; ++k) {
    const auto img = block_image(k);
    for (std::size_t i = 0; i < kInputs; ++i) {
      if (img[i]) net.weights[i * cfg.n_outputs + static_cast<std::size_t>(k)] = 1.0;
    }
  }
  return net;
}

double variance(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

}  // namespace

TEST(LifConfig, Validation) {
  LifConfig c = SnnConfig::default_input_lif();
  EXPECT_NO_THROW(c.validate());
  c.dt = 0.02;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidParameter);
  c = SnnConfig::default_input_lif();
  c.v_reset = 1.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidParameter);
  c = SnnConfig::default_output_lif();
  c.tau_mem = 0.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidParameter);
}

TEST(Defaults, DocumentedValues) {
  const SnnConfig cfg;
  EXPECT_EQ(cfg.input.tau_mem, 0.1);
  EXPECT_EQ(cfg.output.tau_mem, 0.15);
  EXPECT_EQ(cfg.output.v_thresh, 1.0);
  EXPECT_EQ(cfg.output.v_reset, 0.0);
  EXPECT_EQ(cfg.output.refractory, 5e-3);
  EXPECT_EQ(cfg.output.dt, 1e-3);
  const TrainConfig t;
  EXPECT_EQ(t.presentation_time, 0.35);
  EXPECT_EQ(t.rest_time, 0.1);
  EXPECT_EQ(TrainConfig::for_network_size(200).sf, (vdsp::ScalingFactors{1.0725, 1.375}));
}

TEST(Encode, ZeroImageIsSilent) {
  const std::vector<std::uint8_t> blank(kInputs, 0);
  const auto trains = encode_image(blank, SnnConfig::default_input_lif(), 4.0, 0.35);
  for (const auto& t : trains) EXPECT_TRUE(t.empty());
}

TEST(Encode, RateGrowsWithIntensity) {
  std::vector<std::uint8_t> px(kInputs, 0);
  px[0] = 60;
  px[1] = 120;
  px[2] = 240;
  const auto trains = encode_image(px, SnnConfig::default_input_lif(), 4.0, 1.0);
  EXPECT_LT(trains[0].size(), trains[1].size());
  EXPECT_LT(trains[1].size(), trains[2].size());
}

TEST(Encode, InterSpikeIntervalMatchesClosedForm) {
  const LifConfig cfg = SnnConfig::default_input_lif();
  for (double gain : {1.0, 2.0, 4.0, 8.0}) {
    std::vector<std::uint8_t> px(kInputs, 0);
    px[5] = 255;
    const auto t = encode_image(px, cfg, gain, 2.0)[5];
    ASSERT_GE(t.size(), 3u) << gain;
    const double v_inf = cfg.v_rest + gain;
    const double charge = cfg.tau_mem * std::log((v_inf - cfg.v_reset) / (v_inf - cfg.v_thresh));
    const double expected = cfg.refractory + charge;
    for (std::size_t k = 1; k < t.size(); ++k) EXPECT_NEAR(t[k] - t[k - 1], expected, cfg.dt + 1e-12) << gain;
  }
}

TEST(Encode, Deterministic) {
  const auto img = block_image(3, 180);
  const auto cfg = SnnConfig::default_input_lif();
  EXPECT_EQ(encode_image(img, cfg, 4.0, 0.35), encode_image(img, cfg, 4.0, 0.35));
}

TEST(Encode, BadShape) {
  const std::vector<std::uint8_t> px(100, 0);
  EXPECT_EQ(code_of([&] { encode_image(px, SnnConfig::default_input_lif(), 4.0, 0.35); }), ErrorCode::BadShape);
}

TEST(MakeNetwork, SeededUniformInit) {
  const SnnConfig cfg;
  const auto a = make_network(cfg, 3);
  const auto b = make_network(cfg, 3);
  const auto c = make_network(cfg, 4);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.weights, c.weights);
  EXPECT_EQ(a.weights.size(), kInputs * cfg.n_outputs);
  for (double w : a.weights) {
    EXPECT_GE(w, 0.3);
    EXPECT_LT(w, 0.7);
  }
  for (int l : a.labels) EXPECT_EQ(l, kUnassigned);
}

TEST(StepNetwork, NoPostSpikeLeavesWeights) {
  const SnnConfig cfg;
  const TrainConfig t;
  const Network net = make_network(cfg, 1);
  std::vector<std::uint8_t> spikes(kInputs, 0);
  std::vector<double> pots(kInputs, 0.5);
  spikes[0] = 1;
  const auto [next, r] = step_network(net, spikes, pots, cfg, &t);
  EXPECT_FALSE(r.winner.has_value());
  EXPECT_EQ(next.weights, net.weights);
}

TEST(StepNetwork, PostSpikeWithResetPresynapticPotentials) {
  SnnConfig cfg;
  cfg.n_outputs = 1;
  cfg.synaptic_gain = 10.0;
  const TrainConfig t = TrainConfig::for_network_size(1);
  const Network net = make_network(cfg, 9);
  std::vector<std::uint8_t> spikes(kInputs, 0);
  spikes[10] = 1;
  const std::vector<double> pots(kInputs, 0.0);
  const auto [next, r] = step_network(net, spikes, pots, cfg, &t);
  ASSERT_EQ(r.winner, std::optional<std::size_t>(0));
  EXPECT_EQ(vdsp::switching_rate(0.0, t.vdsp).polarity, vdsp::Polarity::Potentiate);
  for (std::size_t i = 0; i < kInputs; ++i) {
    const double w0 = net.weights[i];
    EXPECT_DOUBLE_EQ(next.weights[i], std::clamp(w0 + vdsp::delta_w(0.0, w0, t.vdsp), 0.0, 1.0));
    EXPECT_GT(next.weights[i], w0);
  }
  EXPECT_GT(next.theta[0], 0.0);
}

TEST(StepNetwork, WithoutTrainingWeightsNeverChange) {
  SnnConfig cfg;
  cfg.synaptic_gain = 0.5;
  Network net = make_network(cfg, 2);
  const auto w0 = net.weights;
  InputLayer in(cfg.input);
  in.set_image(block_image(4), 4.0);
  int fired = 0;
  for (int s = 0; s < 300; ++s) {
    in.step();
    if (step_network_inplace(net, in.spikes(), in.potentials(), cfg, nullptr).winner) ++fired;
  }
  EXPECT_GT(fired, 0);
  EXPECT_EQ(net.weights, w0);
}

TEST(StepNetwork, TiesGoToLowestIndex) {
  SnnConfig cfg;
  cfg.n_outputs = 4;
  cfg.synaptic_gain = 2.0;
  Network net = make_network(cfg, 1);
  std::fill(net.weights.begin(), net.weights.end(), 0.6);
  std::vector<std::uint8_t> spikes(kInputs, 0);
  spikes[0] = 1;
  const std::vector<double> pots(kInputs, 0.9);
  const auto r = step_network_inplace(net, spikes, pots, cfg, nullptr);
  EXPECT_EQ(r.winner, std::optional<std::size_t>(0));
  for (double v : net.v_mem) EXPECT_EQ(v, cfg.output.v_reset);
}

TEST(StepNetwork, EarliestCrossingWins) {
  SnnConfig cfg;
  cfg.n_outputs = 3;
  cfg.synaptic_gain = 1.0;
  Network net = make_network(cfg, 1);
  std::fill(net.weights.begin(), net.weights.end(), 0.5);
  net.v_mem = {0.2, 0.8, 0.6};
  std::vector<std::uint8_t> spikes(kInputs, 0);
  spikes[0] = 1;
  const std::vector<double> pots(kInputs, 0.9);
  EXPECT_EQ(step_network_inplace(net, spikes, pots, cfg, nullptr).winner, std::optional<std::size_t>(1));
}

TEST(StepNetwork, RefractoryWinnerSitsOut) {
  SnnConfig cfg;
  cfg.n_outputs = 2;
  cfg.synaptic_gain = 3.0;
  Network net = make_network(cfg, 1);
  std::fill(net.weights.begin(), net.weights.end(), 0.5);
  std::vector<std::uint8_t> spikes(kInputs, 0);
  spikes[0] = 1;
  const std::vector<double> pots(kInputs, 0.9);
  EXPECT_EQ(step_network_inplace(net, spikes, pots, cfg, nullptr).winner, std::optional<std::size_t>(0));
  EXPECT_EQ(step_network_inplace(net, spikes, pots, cfg, nullptr).winner, std::optional<std::size_t>(1));
}

TEST(StepNetwork, DimensionErrors) {
  const SnnConfig cfg;
  Network net = make_network(cfg, 1);
  std::vector<std::uint8_t> spikes(10, 0);
  std::vector<double> pots(10, 0.0);
  EXPECT_EQ(code_of([&] { step_network_inplace(net, spikes, pots, cfg, nullptr); }), ErrorCode::DimensionMismatch);
  SnnConfig other = cfg;
  other.n_outputs = 3;
  std::vector<std::uint8_t> s2(kInputs, 0);
  std::vector<double> p2(kInputs, 0.0);
  EXPECT_EQ(code_of([&] { step_network_inplace(net, s2, p2, other, nullptr); }), ErrorCode::DimensionMismatch);
}

TEST(StepNetwork, BitIdenticalAfterHundredSteps) {
  const SnnConfig cfg;
  const TrainConfig t = TrainConfig::for_network_size(cfg.n_outputs);
  auto run = [&] {
    Network net = make_network(cfg, 17);
    InputLayer in(cfg.input);
    in.set_image(block_image(6), t.input_gain);
    for (int s = 0; s < 100; ++s) {
      in.step();
      step_network_inplace(net, in.spikes(), in.potentials(), cfg, &t);
    }
    return net;
  };
  EXPECT_EQ(run(), run());
}

TEST(Train, EmptyDataset) {
  const SnnConfig cfg;
  EXPECT_EQ(code_of([&] { train(make_network(cfg, 1), Dataset{}, cfg, TrainConfig{}); }), ErrorCode::EmptyDataset);
}

TEST(Train, DeterministicBoundedAndFieldsEmerge) {
  const SnnConfig cfg;
  TrainConfig t = TrainConfig::for_network_size(cfg.n_outputs);
  t.log_every = 20;
  const Dataset data = block_dataset(6);
  const Network init = make_network(cfg, 5);
  std::vector<TrainProgress> log;
  const Network a = train(init, data, cfg, t, [&](const TrainProgress& p) { log.push_back(p); });
  const Network b = train(init, data, cfg, t);
  EXPECT_EQ(a, b);
  for (double w : a.weights) {
    EXPECT_GE(w, 0.0);
    EXPECT_LE(w, 1.0);
  }
  EXPECT_EQ(log.size(), 3u);
  EXPECT_EQ(log.back().image_index, 60u);
  // Per-neuron variance of the weight field grows from the uniform start.
  double var_init = 0.0;
  double var_trained = 0.0;
  for (std::size_t j = 0; j < cfg.n_outputs; ++j) {
    std::vector<double> w0(kInputs);
    std::vector<double> w1(kInputs);
    for (std::size_t i = 0; i < kInputs; ++i) {
      w0[i] = init.weight(i, j);
      w1[i] = a.weight(i, j);
    }
    var_init += variance(w0);
    var_trained += variance(w1);
  }
  EXPECT_GT(var_trained, var_init);
}

TEST(Labels, FromResponses) {
  // Output 0 fires only on class 3; output 1 never fires.
  std::vector<std::vector<int>> resp{{4, 0}, {0, 0}, {5, 0}, {0, 0}};
  std::vector<std::uint8_t> classes{3, 1, 3, 7};
  EXPECT_EQ(labels_from_responses(resp, classes), (std::vector<int>{3, kUnassigned}));
  std::vector<std::vector<int>> shuffled{resp[3], resp[2], resp[1], resp[0]};
  std::vector<std::uint8_t> shuffled_classes{7, 3, 1, 3};
  EXPECT_EQ(labels_from_responses(shuffled, shuffled_classes), labels_from_responses(resp, classes));
}

TEST(Labels, MeanNotTotal) {
  // Class 1 is seen three times with one spike each, class 2 once with two:
  // mean favors class 2.
  std::vector<std::vector<int>> resp{{1}, {1}, {1}, {2}};
  std::vector<std::uint8_t> classes{1, 1, 1, 2};
  EXPECT_EQ(labels_from_responses(resp, classes), std::vector<int>{2});
}

TEST(Evaluate, SilentNetworkAbstains) {
  SnnConfig cfg;
  Network net = make_network(cfg, 1);
  std::fill(net.weights.begin(), net.weights.end(), 0.0);
  net.labels = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto ev = evaluate(net, block_dataset(1), cfg, TrainConfig{});
  EXPECT_EQ(ev.accuracy, 0.0);
  EXPECT_EQ(ev.abstained, 10u);
  EXPECT_EQ(ev.confusion[4][kClasses], 1u);
}

TEST(Evaluate, HardwiredBlocksAreExact) {
  const SnnConfig cfg;
  const TrainConfig t;
  const Dataset data = block_dataset(2);
  Network net = assign_labels(hardwired(cfg), data, cfg, t);
  EXPECT_EQ(net.labels, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  const auto ev = evaluate(net, data, cfg, t);
  EXPECT_EQ(ev.accuracy, 1.0);
  EXPECT_EQ(ev.correct, 20u);
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
  const SnnConfig cfg;
  const TrainConfig t;
  const Dataset data = block_dataset(3);
  const Network net = make_network(cfg, 4);
  EXPECT_EQ(record_responses(net, data, cfg, t, 1), record_responses(net, data, cfg, t, 3));
}

TEST(Predict, AbstainAndTies) {
  const std::vector<int> labels{2, kUnassigned, 5};
  EXPECT_EQ(predict(std::vector<int>{0, 4, 0}, labels), kAbstain);
  EXPECT_EQ(predict(std::vector<int>{3, 0, 3}, labels), 2);
  EXPECT_EQ(predict(std::vector<int>{1, 0, 3}, labels), 5);
}

TEST(Dataset, ShapeChecks) {
  Dataset d;
  EXPECT_EQ(code_of([&] { d.push_back(std::vector<std::uint8_t>(5, 0), 1); }), ErrorCode::BadShape);
}
