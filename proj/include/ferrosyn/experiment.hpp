#pragma once

// MNIST location and the train -> label -> evaluate pipeline shared by the
// command-line tool and the acceptance checks.

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "ferrosyn/idx.hpp"
#include "ferrosyn/snn.hpp"

namespace ferrosyn {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kDataDirEnv = "FERROSYN_DATA_DIR";

/// $FERROSYN_DATA_DIR when set, otherwise `fallback`.
std::filesystem::path data_dir(const std::filesystem::path& fallback);

struct Mnist {
  io::IdxImages train_images;
  io::IdxLabels train_labels;
  io::IdxImages test_images;
  io::IdxLabels test_labels;
};

/// Loads the four canonical IDX files (train-images-idx3-ubyte, ...) from dir.
Mnist load_mnist(const std::filesystem::path& dir);

struct ExperimentSizes {
  std::size_t train = 10000;  // first images of the training set
  std::size_t label = 10000;  // first training images, used to assign labels
  std::size_t test = 2000;    // first images of the test set
  unsigned threads = 1;
};

struct ExperimentResult {
  snn::Network network;
  snn::Evaluation evaluation;
  bool weights_bounded = true;  // every logged snapshot stayed inside [0, 1]
  double seconds = 0.0;
};

/// Trains a fresh network seeded with train.seed, labels it and evaluates it.
ExperimentResult run_experiment(const Mnist& data, const snn::SnnConfig& cfg, const snn::TrainConfig& train,
                                const ExperimentSizes& sizes, const snn::ProgressFn& progress = {});

}  // namespace ferrosyn
