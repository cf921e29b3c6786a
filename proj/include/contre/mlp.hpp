#pragma once

/// @file mlp.hpp
/// @brief Built-in reference classifier: a ReLU multilayer perceptron over
/// per-channel standardised pixels, trained with plain mini-batch SGD.
///
/// Everything is a pure function of (config, dataset): initial weights,
/// label noise and batch order are all drawn from engines seeded by
/// `init_seed`, and the arithmetic is single-threaded.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contre/image.hpp"

namespace contre {

struct ModelConfig {
  std::string model_id;
  std::vector<int> hidden_widths;  ///< empty = softmax regression
  int epochs = 20;
  double learning_rate = 0.05;
  double weight_decay = 1e-4;
  int batch_size = 32;
  std::uint64_t init_seed = 0;
  double label_noise = 0.0;  ///< fraction of training labels replaced by a different class

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  ///< out x in
  Eigen::VectorXd bias;
};

/// Per-channel standardisation fitted on the training images.
struct InputNormalizer {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> mean;    ///< per channel, in [0, 1] pixel units
  std::vector<double> stddev;  ///< per channel

  static InputNormalizer fit(std::span<const Image> images);
  /// Flattened, standardised pixels; throws ShapeMismatch.
  Eigen::VectorXd apply(const Image& image) const;
  Eigen::Index input_dim() const noexcept { return static_cast<Eigen::Index>(width) * height * channels; }
};

struct Prediction {
  int pred = 0;
  std::vector<double> logits;
};

/// Index of the largest value; ties go to the lowest index.
int argmax_lowest(std::span<const double> values);

class TrainedModel {
 public:
  TrainedModel(ModelConfig config, InputNormalizer normalizer, std::vector<DenseLayer> layers, int class_count);

  const ModelConfig& config() const noexcept { return config_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  const InputNormalizer& normalizer() const noexcept { return normalizer_; }
  int class_count() const noexcept { return class_count_; }
  double train_accuracy() const noexcept { return train_accuracy_; }
  void set_train_accuracy(double acc) noexcept { train_accuracy_ = acc; }

  Prediction predict(const Image& image) const;
  /// Activation feeding the classifier layer (the standardised input for
  /// softmax regression).
  std::vector<float> extract_features(const Image& image) const;
  Eigen::Index feature_dim() const noexcept;

  /// Hidden activation and logits in one pass.
  void forward(const Image& image, Eigen::VectorXd& features, Eigen::VectorXd& logits) const;

 private:
  ModelConfig config_;
  InputNormalizer normalizer_;
  std::vector<DenseLayer> layers_;
  int class_count_ = 0;
  double train_accuracy_ = 0.0;
};

/// Initial parameters only (what train() returns for epochs = 0).
TrainedModel initialise(const ModelConfig& config, std::span<const Image> images, int class_count);

/// `class_count` 0 means max(label) + 1. Throws EmptyDataset, ShapeMismatch,
/// InvalidArgument.
TrainedModel train(const ModelConfig& config, std::span<const Image> images, std::span<const int> labels,
                   int class_count = 0);

double accuracy(const TrainedModel& model, std::span<const Image> images, std::span<const int> labels);

}  // namespace contre
