#include "contre/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "contre/error.hpp"
#include "contre/rng.hpp"

namespace contre {
namespace {

constexpr std::uint64_t kLabelNoiseStream = 0x6c6162656c6e6f69ULL;
constexpr std::uint64_t kShuffleStream = 0x73687566666c6521ULL;

Eigen::MatrixXd uniform_matrix(Engine& eng, Eigen::Index rows, Eigen::Index cols, double limit) {
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = uniform_real(eng, -limit, limit);
  return m;
}

void check_shapes(std::span<const Image> images) {
  for (const auto& img : images) {
    if (!img.same_shape(images.front())) {
      throw Error(ErrorKind::ShapeMismatch, "training images must share one shape");
    }
  }
}

void softmax_inplace(Eigen::MatrixXd& logits) {
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    auto col = logits.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

}  // namespace

void ModelConfig::validate() const {
  for (int w : hidden_widths) {
    if (w < 1) throw Error(ErrorKind::InvalidArgument, model_id + ": hidden widths must be positive");
  }
  if (epochs < 0) throw Error(ErrorKind::InvalidArgument, model_id + ": epochs must be >= 0");
  if (!(learning_rate > 0)) throw Error(ErrorKind::InvalidArgument, model_id + ": learning_rate must be > 0");
  if (!(weight_decay >= 0)) throw Error(ErrorKind::InvalidArgument, model_id + ": weight_decay must be >= 0");
  if (batch_size < 1) throw Error(ErrorKind::InvalidArgument, model_id + ": batch_size must be >= 1");
  if (!(label_noise >= 0 && label_noise < 1)) {
    throw Error(ErrorKind::InvalidArgument, model_id + ": label_noise must be in [0, 1)");
  }
}

InputNormalizer InputNormalizer::fit(std::span<const Image> images) {
  if (images.empty()) throw Error(ErrorKind::EmptyDataset, "cannot fit a normaliser on no images");
  check_shapes(images);
  InputNormalizer n;
  n.width = images.front().width();
  n.height = images.front().height();
  n.channels = images.front().channels();
  std::vector<double> sum(n.channels, 0.0), sq(n.channels, 0.0);
  std::size_t per_channel = 0;
  for (const auto& img : images) {
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double v = px[i] / 255.0;
      sum[i % n.channels] += v;
      sq[i % n.channels] += v * v;
    }
    per_channel += px.size() / n.channels;
  }
  for (int c = 0; c < n.channels; ++c) {
    const double mean = sum[c] / per_channel;
    const double var = std::max(0.0, sq[c] / per_channel - mean * mean);
    n.mean.push_back(mean);
    n.stddev.push_back(std::max(std::sqrt(var), 1e-6));
  }
  return n;
}

Eigen::VectorXd InputNormalizer::apply(const Image& image) const {
  if (image.width() != width || image.height() != height || image.channels() != channels) {
    throw Error(ErrorKind::ShapeMismatch, "image is " + std::to_string(image.width()) + "x" +
                                              std::to_string(image.height()) + "x" + std::to_string(image.channels()) +
                                              ", model expects " + std::to_string(width) + "x" +
                                              std::to_string(height) + "x" + std::to_string(channels));
  }
  const auto px = image.pixels();
  Eigen::VectorXd x(static_cast<Eigen::Index>(px.size()));
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto c = i % channels;
    x(static_cast<Eigen::Index>(i)) = (px[i] / 255.0 - mean[c]) / stddev[c];
  }
  return x;
}

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

TrainedModel::TrainedModel(ModelConfig config, InputNormalizer normalizer, std::vector<DenseLayer> layers,
                           int class_count)
    : config_(std::move(config)),
      normalizer_(std::move(normalizer)),
      layers_(std::move(layers)),
      class_count_(class_count) {}

void TrainedModel::forward(const Image& image, Eigen::VectorXd& features, Eigen::VectorXd& logits) const {
  features = normalizer_.apply(image);
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    features = (layers_[l].weight * features + layers_[l].bias).cwiseMax(0.0);
  }
  logits = layers_.back().weight * features + layers_.back().bias;
}

Prediction TrainedModel::predict(const Image& image) const {
  Eigen::VectorXd features, logits;
  forward(image, features, logits);
  Prediction p;
  p.logits.assign(logits.data(), logits.data() + logits.size());
  p.pred = argmax_lowest(p.logits);
  return p;
}

std::vector<float> TrainedModel::extract_features(const Image& image) const {
  Eigen::VectorXd features, logits;
  forward(image, features, logits);
  std::vector<float> out(static_cast<std::size_t>(features.size()));
  for (Eigen::Index i = 0; i < features.size(); ++i) out[i] = static_cast<float>(features(i));
  return out;
}

Eigen::Index TrainedModel::feature_dim() const noexcept { return layers_.back().weight.cols(); }

TrainedModel initialise(const ModelConfig& config, std::span<const Image> images, int class_count) {
  config.validate();
  if (images.empty()) throw Error(ErrorKind::EmptyDataset, config.model_id + ": empty training set");
  if (class_count < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 classes");
  InputNormalizer normalizer = InputNormalizer::fit(images);

  Engine eng(config.init_seed);
  std::vector<DenseLayer> layers;
  Eigen::Index fan_in = normalizer.input_dim();
  for (int width : config.hidden_widths) {
    // He-uniform for ReLU layers
    layers.push_back({uniform_matrix(eng, width, fan_in, std::sqrt(6.0 / fan_in)), Eigen::VectorXd::Zero(width)});
    fan_in = width;
  }
  layers.push_back({uniform_matrix(eng, class_count, fan_in, std::sqrt(6.0 / (fan_in + class_count))),
                    Eigen::VectorXd::Zero(class_count)});
  return TrainedModel(config, std::move(normalizer), std::move(layers), class_count);
}

TrainedModel train(const ModelConfig& config, std::span<const Image> images, std::span<const int> labels,
                   int class_count) {
  if (images.empty()) throw Error(ErrorKind::EmptyDataset, config.model_id + ": empty training set");
  if (images.size() != labels.size()) throw Error(ErrorKind::LengthMismatch, "images and labels differ in count");
  for (int l : labels) {
    if (l < 0) throw Error(ErrorKind::InvalidArgument, "negative label");
  }
  if (class_count == 0) class_count = *std::max_element(labels.begin(), labels.end()) + 1;
  for (int l : labels) {
    if (l >= class_count) throw Error(ErrorKind::InvalidArgument, "label outside [0, class_count)");
  }

  TrainedModel model = initialise(config, images, class_count);
  auto layers = model.layers();
  const auto& normalizer = model.normalizer();

  const auto n = static_cast<Eigen::Index>(images.size());
  Eigen::MatrixXd inputs(normalizer.input_dim(), n);
  for (Eigen::Index i = 0; i < n; ++i) inputs.col(i) = normalizer.apply(images[i]);

  // Noisy labels are fixed once for the whole run.
  std::vector<int> targets(labels.begin(), labels.end());
  if (config.label_noise > 0) {
    Engine noise(config.init_seed ^ kLabelNoiseStream);
    for (auto& t : targets) {
      if (uniform_unit(noise) < config.label_noise) {
        const auto shift = 1 + static_cast<int>(uniform_index(noise, static_cast<std::uint64_t>(class_count - 1)));
        t = (t + shift) % class_count;
      }
    }
  }

  Engine shuffle(config.init_seed ^ kShuffleStream);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t depth = layers.size();
  std::vector<Eigen::MatrixXd> activations(depth);  // input to layer l
  std::vector<Eigen::MatrixXd> pre(depth);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[uniform_index(shuffle, i + 1)]);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto count = static_cast<Eigen::Index>(std::min<std::size_t>(config.batch_size, order.size() - start));
      Eigen::MatrixXd batch(inputs.rows(), count);
      Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(class_count, count);
      for (Eigen::Index b = 0; b < count; ++b) {
        batch.col(b) = inputs.col(order[start + b]);
        onehot(targets[order[start + b]], b) = 1.0;
      }

      activations[0] = std::move(batch);
      for (std::size_t l = 0; l < depth; ++l) {
        pre[l] = (layers[l].weight * activations[l]).colwise() + layers[l].bias;
        if (l + 1 < depth) activations[l + 1] = pre[l].cwiseMax(0.0);
      }
      Eigen::MatrixXd delta = pre[depth - 1];
      softmax_inplace(delta);
      delta = (delta - onehot) / static_cast<double>(count);

      for (std::size_t l = depth; l-- > 0;) {
        const Eigen::MatrixXd grad_w = delta * activations[l].transpose() + config.weight_decay * layers[l].weight;
        const Eigen::VectorXd grad_b = delta.rowwise().sum();
        if (l > 0) {
          Eigen::MatrixXd back = layers[l].weight.transpose() * delta;
          delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
        layers[l].weight -= config.learning_rate * grad_w;
        layers[l].bias -= config.learning_rate * grad_b;
      }
    }
  }

  TrainedModel trained(config, normalizer, std::move(layers), class_count);
  trained.set_train_accuracy(accuracy(trained, images, labels));
  return trained;
}

double accuracy(const TrainedModel& model, std::span<const Image> images, std::span<const int> labels) {
  if (images.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < images.size(); ++i) correct += model.predict(images[i]).pred == labels[i];
  return static_cast<double>(correct) / static_cast<double>(images.size());
}

}  // namespace contre
