#include "ferrosyn/snn.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "ferrosyn/error.hpp"
#include "ferrosyn/random.hpp"

namespace ferrosyn::snn {

void LifConfig::validate() const {
  if (!(tau_mem > 0.0) || !(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "tau_mem and dt must be positive");
  if (dt > tau_mem / 10.0 * (1.0 + 1e-12)) throw Error(ErrorCode::InvalidParameter, "dt must be <= tau_mem / 10");
  if (!(v_reset < v_thresh)) throw Error(ErrorCode::InvalidParameter, "v_reset must be below v_thresh");
  if (!(refractory >= 0.0)) throw Error(ErrorCode::InvalidParameter, "refractory must be >= 0");
}

LifConfig SnnConfig::default_input_lif() {
  // Resting potential sits in the depression band of the VDSP mapping, so a
  // silent pixel weakens its synapse while a recently fired one (near reset)
  // strengthens it.
  return {.tau_mem = 0.1, .v_thresh = 1.0, .v_rest = 0.85, .v_reset = 0.0, .refractory = 5e-3, .dt = 1e-3};
}

LifConfig SnnConfig::default_output_lif() {
  return {.tau_mem = 0.15, .v_thresh = 1.0, .v_rest = 0.0, .v_reset = 0.0, .refractory = 5e-3, .dt = 1e-3};
}

void SnnConfig::validate() const {
  if (n_outputs < 1) throw Error(ErrorCode::InvalidParameter, "network needs at least one output");
  input.validate();
  output.validate();
  if (input.dt != output.dt) throw Error(ErrorCode::InvalidParameter, "input and output layers must share dt");
  if (!(synaptic_gain > 0.0)) throw Error(ErrorCode::InvalidParameter, "synaptic_gain must be positive");
  if (!(homeostasis.theta_plus >= 0.0) || !(homeostasis.tau_theta > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "homeostasis needs theta_plus >= 0 and tau_theta > 0");
  }
  if (!(init_weight_lo >= 0.0 && init_weight_lo <= init_weight_hi && init_weight_hi <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "initial weight range must lie in [0, 1]");
  }
}

TrainConfig TrainConfig::for_network_size(std::size_t n_outputs) {
  TrainConfig t;
  t.sf = vdsp::scaling_for_network_size(static_cast<int>(n_outputs));
  return t;
}

void TrainConfig::validate() const {
  vdsp.validate();
  sf.validate();
  if (!(presentation_time > 0.0) || !(rest_time >= 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "presentation_time must be > 0 and rest_time >= 0");
  }
  if (!(input_gain > 0.0)) throw Error(ErrorCode::InvalidParameter, "input_gain must be positive");
  if (min_output_spikes < 0 || max_retries < 0 || !(gain_step >= 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "retry settings must be non-negative");
  }
  if (epochs < 1) throw Error(ErrorCode::InvalidParameter, "epochs must be >= 1");
}

void Network::validate() const {
  if (n_outputs < 1) throw Error(ErrorCode::DimensionMismatch, "network has no outputs");
  if (weights.size() != kInputs * n_outputs || v_mem.size() != n_outputs || refractory.size() != n_outputs ||
      theta.size() != n_outputs || labels.size() != n_outputs) {
    throw Error(ErrorCode::DimensionMismatch, "network arrays disagree with n_outputs");
  }
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::OutOfRange, "weight outside [0, 1]");
  }
}

Network make_network(const SnnConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Network net;
  net.n_outputs = cfg.n_outputs;
  net.weights.resize(kInputs * cfg.n_outputs);
  Rng rng(seed);
  for (double& w : net.weights) w = rng.uniform(cfg.init_weight_lo, cfg.init_weight_hi);
  net.v_mem.assign(cfg.n_outputs, cfg.output.v_rest);
  net.refractory.assign(cfg.n_outputs, 0.0);
  net.theta.assign(cfg.n_outputs, 0.0);
  net.labels.assign(cfg.n_outputs, kUnassigned);
  return net;
}

// ---------------------------------------------------------------------------
// Input layer

InputLayer::InputLayer(const LifConfig& cfg)
    : cfg_(cfg),
      decay_(std::exp(-cfg.dt / cfg.tau_mem)),
      inv_span_(1.0 / (cfg.v_thresh - cfg.v_reset)),
      drive_(kInputs, 0.0),
      v_(kInputs, cfg.v_rest),
      refractory_(kInputs, 0.0),
      spikes_(kInputs, 0) {
  cfg_.validate();
}

void InputLayer::set_image(std::span<const std::uint8_t> pixels, double gain) {
  if (pixels.size() != kInputs) {
    throw Error(ErrorCode::BadShape, "image has " + std::to_string(pixels.size()) + " pixels, expected 784");
  }
  for (std::size_t i = 0; i < kInputs; ++i) drive_[i] = gain * static_cast<double>(pixels[i]) / 255.0;
}

void InputLayer::clear_drive() { std::fill(drive_.begin(), drive_.end(), 0.0); }

void InputLayer::reset() {
  clear_drive();
  std::fill(v_.begin(), v_.end(), cfg_.v_rest);
  std::fill(refractory_.begin(), refractory_.end(), 0.0);
  std::fill(spikes_.begin(), spikes_.end(), 0);
}

void InputLayer::step() {
  // Exact exponential update for a constant drive over one dt.
  for (std::size_t i = 0; i < kInputs; ++i) {
    spikes_[i] = 0;
    if (refractory_[i] > 0.0) {
      refractory_[i] -= cfg_.dt;
      if (refractory_[i] < 1e-12) refractory_[i] = 0.0;
      continue;
    }
    const double v_inf = cfg_.v_rest + drive_[i];
    v_[i] = v_inf + (v_[i] - v_inf) * decay_;
    if (v_[i] >= cfg_.v_thresh) {
      spikes_[i] = 1;
      v_[i] = cfg_.v_reset;
      refractory_[i] = cfg_.refractory;
    }
  }
}

std::vector<std::vector<double>> encode_image(std::span<const std::uint8_t> pixels, const LifConfig& cfg,
                                              double gain, double duration) {
  InputLayer layer(cfg);
  layer.set_image(pixels, gain);
  std::vector<std::vector<double>> trains(kInputs);
  const auto steps = static_cast<std::size_t>(std::llround(duration / cfg.dt));
  for (std::size_t s = 1; s <= steps; ++s) {
    layer.step();
    const auto spikes = layer.spikes();
    for (std::size_t i = 0; i < kInputs; ++i) {
      if (spikes[i]) trains[i].push_back(static_cast<double>(s) * cfg.dt);
    }
  }
  return trains;
}

// ---------------------------------------------------------------------------
// Output layer

namespace {

void check_frame(const Network& net, std::span<const std::uint8_t> spikes, std::span<const double> potentials,
                 const SnnConfig& cfg) {
  if (spikes.size() != kInputs || potentials.size() != kInputs) {
    throw Error(ErrorCode::DimensionMismatch, "input frame must be 784 wide");
  }
  if (net.n_outputs != cfg.n_outputs || net.weights.size() != kInputs * net.n_outputs ||
      net.v_mem.size() != net.n_outputs || net.theta.size() != net.n_outputs ||
      net.refractory.size() != net.n_outputs) {
    throw Error(ErrorCode::DimensionMismatch, "network shape disagrees with the configuration");
  }
}

// VDSP on every synapse into `post`. The presynaptic potential is normalized
// so that 0 is the reset level and 1 the firing threshold.
void apply_vdsp(Network& net, std::size_t post, std::span<const double> potentials, const SnnConfig& cfg,
                const TrainConfig& train) {
  const double inv_span = 1.0 / (cfg.input.v_thresh - cfg.input.v_reset);
  const std::size_t n = net.n_outputs;
  for (std::size_t i = 0; i < kInputs; ++i) {
    double& w = net.weights[i * n + post];
    const double v_mem = (potentials[i] - cfg.input.v_reset) * inv_span;
    w = std::clamp(w + vdsp::membrane_delta_w(v_mem, w, train.vdsp, train.sf), 0.0, 1.0);
  }
}

}  // namespace

StepResult step_network_inplace(Network& net, std::span<const std::uint8_t> input_spikes,
                                std::span<const double> input_potentials, const SnnConfig& cfg,
                                const TrainConfig* train) {
  check_frame(net, input_spikes, input_potentials, cfg);
  const std::size_t n = net.n_outputs;
  const auto& out = cfg.output;
  const double decay = std::exp(-out.dt / out.tau_mem);

  // Membranes before input arrival, used to order threshold crossings.
  thread_local std::vector<double> before;
  thread_local std::vector<std::uint8_t> frozen;
  before.resize(n);
  frozen.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    frozen[j] = net.refractory[j] > 0.0;
    if (frozen[j]) {
      net.refractory[j] -= out.dt;
      if (net.refractory[j] < 1e-12) net.refractory[j] = 0.0;
      before[j] = net.v_mem[j];
      continue;
    }
    net.v_mem[j] = out.v_rest + (net.v_mem[j] - out.v_rest) * decay;
    before[j] = net.v_mem[j];
  }
  for (std::size_t i = 0; i < kInputs; ++i) {
    if (!input_spikes[i]) continue;
    const double* row = net.weights.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) net.v_mem[j] += cfg.synaptic_gain * row[j];
  }

  // First to threshold wins: earliest crossing under linear interpolation
  // across the step, ties to the lowest index.
  StepResult result;
  double earliest = 2.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (frozen[j]) {
      net.v_mem[j] = before[j];
      continue;
    }
    const double threshold = out.v_thresh + net.theta[j];
    if (net.v_mem[j] < threshold) continue;
    const double rise = net.v_mem[j] - before[j];
    const double frac = rise > 0.0 ? std::max(0.0, (threshold - before[j]) / rise) : 0.0;
    if (frac < earliest) {
      earliest = frac;
      result.winner = j;
    }
  }

  if (result.winner) {
    // Hard winner-take-all: the winner fires, every output is reset.
    std::fill(net.v_mem.begin(), net.v_mem.end(), out.v_reset);
    net.refractory[*result.winner] = out.refractory;
    if (train) {
      apply_vdsp(net, *result.winner, input_potentials, cfg, *train);
      net.theta[*result.winner] += cfg.homeostasis.theta_plus;
    }
  }
  if (train) {
    const double theta_decay = std::exp(-out.dt / cfg.homeostasis.tau_theta);
    for (double& t : net.theta) t *= theta_decay;
  }
  return result;
}

std::pair<Network, StepResult> step_network(Network net, std::span<const std::uint8_t> input_spikes,
                                            std::span<const double> input_potentials, const SnnConfig& cfg,
                                            const TrainConfig* train) {
  const StepResult r = step_network_inplace(net, input_spikes, input_potentials, cfg, train);
  return {std::move(net), r};
}

// ---------------------------------------------------------------------------
// Datasets and presentations

void Dataset::push_back(std::span<const std::uint8_t> image, std::uint8_t label) {
  if (image.size() != kInputs) throw Error(ErrorCode::BadShape, "dataset images must have 784 pixels");
  pixels.insert(pixels.end(), image.begin(), image.end());
  labels.push_back(label);
}

Dataset make_dataset(const io::IdxImages& images, const io::IdxLabels& labels, std::size_t first,
                     std::size_t count) {
  io::check_paired(images, labels);
  if (images.rows * images.cols != kInputs) throw Error(ErrorCode::BadShape, "images are not 28x28");
  if (first > images.count || count > images.count - first) {
    throw Error(ErrorCode::DimensionMismatch, "requested range exceeds the IDX item count");
  }
  Dataset d;
  d.pixels.assign(images.pixels.begin() + static_cast<std::ptrdiff_t>(first * kInputs),
                  images.pixels.begin() + static_cast<std::ptrdiff_t>((first + count) * kInputs));
  d.labels.assign(labels.labels.begin() + static_cast<std::ptrdiff_t>(first),
                  labels.labels.begin() + static_cast<std::ptrdiff_t>(first + count));
  return d;
}

namespace {

std::size_t steps_for(double duration, double dt) { return static_cast<std::size_t>(std::llround(duration / dt)); }

// Shows one image (then the rest period) and returns per-output spike counts
// during the presentation window of the last attempt.
void run_presentation(Network& net, InputLayer& inputs, std::span<const std::uint8_t> image, const SnnConfig& cfg,
                      const TrainConfig& t, const TrainConfig* learn, std::vector<int>& counts) {
  const std::size_t on_steps = steps_for(t.presentation_time, cfg.input.dt);
  const std::size_t off_steps = steps_for(t.rest_time, cfg.input.dt);
  double gain = t.input_gain;
  for (int attempt = 0;; ++attempt) {
    counts.assign(net.n_outputs, 0);
    int total = 0;
    inputs.set_image(image, gain);
    for (std::size_t s = 0; s < on_steps; ++s) {
      inputs.step();
      const auto r = step_network_inplace(net, inputs.spikes(), inputs.potentials(), cfg, learn);
      if (r.winner) {
        ++counts[*r.winner];
        ++total;
      }
    }
    inputs.clear_drive();
    for (std::size_t s = 0; s < off_steps; ++s) {
      inputs.step();
      step_network_inplace(net, inputs.spikes(), inputs.potentials(), cfg, learn);
    }
    if (total >= t.min_output_spikes || attempt >= t.max_retries) return;
    gain += t.gain_step;
  }
}

TrainProgress weight_summary(const Network& net, std::size_t presented, double accuracy) {
  TrainProgress p{presented, accuracy, 0.0, 1.0, 0.0};
  double sum = 0.0;
  for (double w : net.weights) {
    sum += w;
    p.min_weight = std::min(p.min_weight, w);
    p.max_weight = std::max(p.max_weight, w);
  }
  p.mean_weight = sum / static_cast<double>(net.weights.size());
  return p;
}

}  // namespace

Network train(Network net, const Dataset& data, const SnnConfig& cfg, const TrainConfig& t,
              const ProgressFn& progress) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  cfg.validate();
  t.validate();
  net.validate();
  if (net.n_outputs != cfg.n_outputs) throw Error(ErrorCode::DimensionMismatch, "network size differs from config");

  InputLayer inputs(cfg.input);
  std::vector<int> counts;
  const std::size_t window = std::max<std::size_t>(t.log_every, 1);
  // Spike-count tallies per class for the progress metric only.
  std::vector<std::vector<int>> window_responses;
  std::vector<std::uint8_t> window_classes;
  std::vector<int> metric_labels(net.n_outputs, kUnassigned);
  std::size_t window_correct = 0;
  std::size_t presented = 0;

  for (int epoch = 0; epoch < t.epochs; ++epoch) {
    for (std::size_t k = 0; k < data.size(); ++k) {
      run_presentation(net, inputs, data.image(k), cfg, t, &t, counts);
      const int predicted = predict(counts, metric_labels);
      if (predicted == data.labels[k]) ++window_correct;
      window_responses.push_back(counts);
      window_classes.push_back(data.labels[k]);
      ++presented;
      if (window_responses.size() == window) {
        if (progress) {
          progress(weight_summary(net, presented, static_cast<double>(window_correct) / static_cast<double>(window)));
        }
        metric_labels = labels_from_responses(window_responses, window_classes);
        window_responses.clear();
        window_classes.clear();
        window_correct = 0;
      }
    }
  }
  return net;
}

std::vector<int> present(const Network& net, std::span<const std::uint8_t> image, const SnnConfig& cfg,
                         const TrainConfig& presentation) {
  Network copy = net;
  InputLayer inputs(cfg.input);
  std::vector<int> counts;
  run_presentation(copy, inputs, image, cfg, presentation, nullptr, counts);
  return counts;
}

std::vector<std::vector<int>> record_responses(const Network& net, const Dataset& data, const SnnConfig& cfg,
                                               const TrainConfig& presentation, unsigned threads) {
  net.validate();
  std::vector<std::vector<int>> responses(data.size());
  // Each image starts from the network's stored state, so images are
  // independent and can be split across workers.
  const auto worker = [&](std::size_t begin, std::size_t end) {
    InputLayer inputs(cfg.input);
    for (std::size_t k = begin; k < end; ++k) {
      Network copy = net;
      inputs.reset();
      run_presentation(copy, inputs, data.image(k), cfg, presentation, nullptr, responses[k]);
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(data.size())));
  if (n_threads == 1) {
    worker(0, data.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (data.size() + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(data.size(), b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
  }
  return responses;
}

std::vector<int> labels_from_responses(const std::vector<std::vector<int>>& responses,
                                       std::span<const std::uint8_t> classes) {
  if (responses.empty()) return {};
  const std::size_t n = responses.front().size();
  std::vector<std::array<double, kClasses>> sums(n, std::array<double, kClasses>{});
  std::array<std::size_t, kClasses> per_class{};
  for (std::size_t k = 0; k < responses.size(); ++k) {
    const auto c = classes[k];
    ++per_class[c];
    for (std::size_t j = 0; j < n; ++j) sums[j][c] += responses[k][j];
  }
  std::vector<int> labels(n, kUnassigned);
  for (std::size_t j = 0; j < n; ++j) {
    double best = 0.0;
    for (int c = 0; c < kClasses; ++c) {
      if (per_class[c] == 0) continue;
      const double mean = sums[j][c] / static_cast<double>(per_class[c]);
      if (mean > best) {
        best = mean;
        labels[j] = c;
      }
    }
  }
  return labels;
}

Network assign_labels(Network net, const Dataset& data, const SnnConfig& cfg, const TrainConfig& presentation,
                      unsigned threads) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "labeling set is empty");
  net.labels = labels_from_responses(record_responses(net, data, cfg, presentation, threads), data.labels);
  return net;
}

int predict(std::span<const int> counts, std::span<const int> labels) {
  int best_count = 0;
  int predicted = kAbstain;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (labels[j] == kUnassigned) continue;
    if (counts[j] > best_count) {
      best_count = counts[j];
      predicted = labels[j];
    }
  }
  return predicted;
}

Evaluation evaluate_responses(const std::vector<std::vector<int>>& responses, std::span<const int> labels,
                              std::span<const std::uint8_t> classes) {
  Evaluation ev;
  ev.total = responses.size();
  ev.predictions.reserve(responses.size());
  for (std::size_t k = 0; k < responses.size(); ++k) {
    const int p = predict(responses[k], labels);
    ev.predictions.push_back(p);
    if (p == kAbstain) {
      ++ev.abstained;
      ++ev.confusion[classes[k]][kClasses];
    } else {
      ++ev.confusion[classes[k]][static_cast<std::size_t>(p)];
      if (p == classes[k]) ++ev.correct;
    }
  }
  ev.accuracy = ev.total == 0 ? 0.0 : static_cast<double>(ev.correct) / static_cast<double>(ev.total);
  return ev;
}

Evaluation evaluate(const Network& net, const Dataset& data, const SnnConfig& cfg, const TrainConfig& presentation,
                    unsigned threads) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "evaluation set is empty");
  return evaluate_responses(record_responses(net, data, cfg, presentation, threads), net.labels, data.labels);
}

}  // namespace ferrosyn::snn
