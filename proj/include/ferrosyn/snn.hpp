#pragma once

// Single-layer unsupervised spiking network: 784 rate-encoding LIF inputs
// densely connected to N LIF outputs through VDSP-trained weights, with hard
// winner-take-all inhibition and adaptive thresholds.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ferrosyn/idx.hpp"
#include "ferrosyn/vdsp.hpp"

namespace ferrosyn::snn {

inline constexpr std::size_t kInputs = 784;
inline constexpr int kUnassigned = -1;
inline constexpr int kClasses = 10;

/// Leaky integrate-and-fire constants in normalized membrane units.
struct LifConfig {
  double tau_mem = 0.1;       // s
  double v_thresh = 1.0;
  double v_rest = 0.0;
  double v_reset = 0.0;
  double refractory = 5e-3;   // s
  double dt = 1e-3;           // s

  /// tau_mem, dt > 0; dt <= tau_mem / 10; v_reset < v_thresh.
  void validate() const;
};

struct HomeostasisConfig {
  double theta_plus = 0.02;  // threshold increment per output spike
  double tau_theta = 1e4;    // s, decay constant of the increment
};

struct SnnConfig {
  std::size_t n_outputs = 10;
  LifConfig input = default_input_lif();
  LifConfig output = default_output_lif();
  double synaptic_gain = 0.0625;  // membrane jump per unit weight per input spike
  HomeostasisConfig homeostasis{};
  double init_weight_lo = 0.3;
  double init_weight_hi = 0.7;

  static LifConfig default_input_lif();
  static LifConfig default_output_lif();
  void validate() const;
};

struct TrainConfig {
  vdsp::VdspParams vdsp{};
  vdsp::ScalingFactors sf{};
  double presentation_time = 0.35;  // s
  double rest_time = 0.1;           // s
  double input_gain = 4.0;          // drive per unit of normalized intensity
  // An image that evokes fewer than min_output_spikes is shown again with the
  // gain raised by gain_step, at most max_retries times.
  int min_output_spikes = 1;
  double gain_step = 2.0;
  int max_retries = 4;
  int epochs = 1;
  std::uint64_t seed = 1;
  std::size_t log_every = 1000;

  /// Tabulated scaling factors for the given output-layer size.
  static TrainConfig for_network_size(std::size_t n_outputs);
  void validate() const;
};

/// Whole-network state. Weights are stored input-major: weights[i * n + j]
/// couples input i to output j and always lies in [0, 1].
struct Network {
  std::size_t n_outputs = 0;
  std::vector<double> weights;
  std::vector<double> v_mem;        // output membrane potentials
  std::vector<double> refractory;   // remaining refractory time, s
  std::vector<double> theta;        // adaptive threshold offsets
  std::vector<int> labels;          // class per output or kUnassigned

  double weight(std::size_t input, std::size_t output) const { return weights[input * n_outputs + output]; }
  void validate() const;
  bool operator==(const Network&) const = default;
};

/// Weights drawn uniformly from [init_weight_lo, init_weight_hi) with the seed;
/// membranes at rest; no labels.
Network make_network(const SnnConfig& cfg, std::uint64_t seed);

/// Encoding layer state. Each input neuron integrates a constant current
/// proportional to its pixel intensity and fires at a rate that grows with it.
class InputLayer {
 public:
  explicit InputLayer(const LifConfig& cfg);

  /// Drive = gain * pixel / 255. Throws BadShape for a non-784 image.
  void set_image(std::span<const std::uint8_t> pixels, double gain);
  void clear_drive();
  void reset();
  void step();

  std::span<const std::uint8_t> spikes() const { return spikes_; }
  std::span<const double> potentials() const { return v_; }
  /// (v - v_reset) / (v_thresh - v_reset), the value sampled by VDSP.
  double normalized_potential(std::size_t i) const { return (v_[i] - cfg_.v_reset) * inv_span_; }

 private:
  LifConfig cfg_;
  double decay_;
  double inv_span_;
  std::vector<double> drive_;
  std::vector<double> v_;
  std::vector<double> refractory_;
  std::vector<std::uint8_t> spikes_;
};

/// Spike times (s) per input channel for one image shown for `duration`.
std::vector<std::vector<double>> encode_image(std::span<const std::uint8_t> pixels, const LifConfig& cfg,
                                              double gain, double duration);

/// One dt of network dynamics on a frame of input activity.
struct StepResult {
  std::optional<std::size_t> winner;  // output neuron that fired this step
};

/// Advances the output layer by one dt in place. With `train`, a post spike
/// updates every incoming synapse of the winner from the presynaptic
/// normalized membrane potentials (VDSP) and bumps its threshold.
/// Throws DimensionMismatch when the frame is not 784 wide or the network is
/// inconsistent with the config.
StepResult step_network_inplace(Network& net, std::span<const std::uint8_t> input_spikes,
                                std::span<const double> input_potentials, const SnnConfig& cfg,
                                const TrainConfig* train);

/// Value-semantics wrapper around step_network_inplace.
std::pair<Network, StepResult> step_network(Network net, std::span<const std::uint8_t> input_spikes,
                                            std::span<const double> input_potentials, const SnnConfig& cfg,
                                            const TrainConfig* train);

/// In-memory labeled image set.
struct Dataset {
  std::vector<std::uint8_t> pixels;  // size() * 784
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const std::uint8_t> image(std::size_t i) const { return {pixels.data() + i * kInputs, kInputs}; }
  void push_back(std::span<const std::uint8_t> image, std::uint8_t label);
};

/// Copies items [first, first + count) of an IDX pair.
Dataset make_dataset(const io::IdxImages& images, const io::IdxLabels& labels, std::size_t first,
                     std::size_t count);

struct TrainProgress {
  std::size_t image_index = 0;      // images presented so far
  double running_accuracy = 0.0;    // over the last log window, labels fitted on the previous one
  double mean_weight = 0.0;
  double min_weight = 0.0;
  double max_weight = 0.0;
};

using ProgressFn = std::function<void(const TrainProgress&)>;

/// Presents every image for presentation_time followed by rest_time with
/// learning on. Labels only feed the progress metric.
Network train(Network net, const Dataset& data, const SnnConfig& cfg, const TrainConfig& train,
              const ProgressFn& progress = {});

/// Spike counts of every output for one image with learning off.
std::vector<int> present(const Network& net, std::span<const std::uint8_t> image, const SnnConfig& cfg,
                         const TrainConfig& presentation);

/// Per-image spike counts over a dataset (images x outputs), optionally
/// spread over `threads` workers. Results do not depend on the thread count.
std::vector<std::vector<int>> record_responses(const Network& net, const Dataset& data, const SnnConfig& cfg,
                                               const TrainConfig& presentation, unsigned threads = 1);

/// Labels each output with the class of maximal mean spike count (ties to the
/// lowest class); outputs that never fire stay kUnassigned.
std::vector<int> labels_from_responses(const std::vector<std::vector<int>>& responses,
                                       std::span<const std::uint8_t> classes);

Network assign_labels(Network net, const Dataset& data, const SnnConfig& cfg, const TrainConfig& presentation,
                      unsigned threads = 1);

inline constexpr int kAbstain = -1;

struct Evaluation {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t abstained = 0;
  /// confusion[true][predicted], predicted index 10 = abstain.
  std::array<std::array<std::size_t, kClasses + 1>, kClasses> confusion{};
  std::vector<int> predictions;
};

/// Predicts the label of the assigned output with the most spikes (ties to
/// the lowest index); images with no assigned output firing abstain.
int predict(std::span<const int> counts, std::span<const int> labels);

Evaluation evaluate_responses(const std::vector<std::vector<int>>& responses, std::span<const int> labels,
                              std::span<const std::uint8_t> classes);

Evaluation evaluate(const Network& net, const Dataset& data, const SnnConfig& cfg, const TrainConfig& presentation,
                    unsigned threads = 1);

}  // namespace ferrosyn::snn
