#include "ferrosyn/experiment.hpp"

#include <chrono>
#include <cstdlib>

namespace ferrosyn {

std::filesystem::path data_dir(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') return env;
  return fallback;
}

Mnist load_mnist(const std::filesystem::path& dir) {
  Mnist m{io::load_idx_images(dir / "train-images-idx3-ubyte"), io::load_idx_labels(dir / "train-labels-idx1-ubyte"),
          io::load_idx_images(dir / "t10k-images-idx3-ubyte"), io::load_idx_labels(dir / "t10k-labels-idx1-ubyte")};
  io::check_paired(m.train_images, m.train_labels);
  io::check_paired(m.test_images, m.test_labels);
  return m;
}

ExperimentResult run_experiment(const Mnist& data, const snn::SnnConfig& cfg, const snn::TrainConfig& train,
                                const ExperimentSizes& sizes, const snn::ProgressFn& progress) {
  const auto start = std::chrono::steady_clock::now();
  const auto train_set = snn::make_dataset(data.train_images, data.train_labels, 0, sizes.train);
  const auto label_set = snn::make_dataset(data.train_images, data.train_labels, 0, sizes.label);
  const auto test_set = snn::make_dataset(data.test_images, data.test_labels, 0, sizes.test);

  ExperimentResult out;
  snn::TrainConfig t = train;
  out.network = snn::train(snn::make_network(cfg, train.seed), train_set, cfg, t, [&](const snn::TrainProgress& p) {
    if (p.min_weight < 0.0 || p.max_weight > 1.0) out.weights_bounded = false;
    if (progress) progress(p);
  });
  for (double w : out.network.weights) {
    if (w < 0.0 || w > 1.0) out.weights_bounded = false;
  }
  out.network = snn::assign_labels(std::move(out.network), label_set, cfg, t, sizes.threads);
  out.evaluation = snn::evaluate(out.network, test_set, cfg, t, sizes.threads);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace ferrosyn
