#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ncdlab/expdesign.hpp"
#include "ncdlab/features.hpp"
#include "ncdlab/shapegen.hpp"

namespace ncdlab::nnet {

inline constexpr int kInputDim = shapegen::kPixelCount;

struct NetConfig {
  int input_dim = kInputDim;
  std::vector<int> hidden_widths{256, 64};
  int n_outputs = 2;
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;
  int batch_size = 128;
  int max_epochs = 200;
  double target_train_accuracy = 0.995;

  void validate() const;
};

struct LayerShape {
  int fan_in = 0;
  int fan_out = 0;
  std::size_t weight_offset = 0;  // column-major fan_out x fan_in block
  std::size_t bias_offset = 0;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

// Sum over layers of fan_in * fan_out + fan_out.
std::size_t count_parameters(int input_dim, const std::vector<int>& hidden_widths, int n_outputs);

// ReLU MLP with a softmax head. All parameters live in one flat vector;
// layer views map into it.
class Model {
 public:
  explicit Model(NetConfig config);

  const NetConfig& config() const { return config_; }
  const std::vector<LayerShape>& layers() const { return layers_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  int feature_dim() const { return config_.hidden_widths.back(); }
  std::size_t param_count() const { return static_cast<std::size_t>(params_.size()); }

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> weights(int layer);
  Eigen::Map<const Eigen::MatrixXd> weights(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  bool all_finite() const { return params_.allFinite(); }

  std::vector<EpochRecord> training_log;

 private:
  NetConfig config_;
  std::vector<LayerShape> layers_;
  Eigen::VectorXd params_;
};

using TrainedModel = Model;

// Row-major indices of the set pixels of one input.
using ActiveSet = std::vector<int>;
std::vector<ActiveSet> to_active_sets(std::span<const shapegen::BinaryImage> images);

// Weights ~ N(0, 1/fan_in), biases zero.
Model init_model(const NetConfig& cfg);

struct LossAndGrad {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // same layout as Model::parameters()
};

// Mean cross-entropy and its exact gradient. Labels must be in [0, n_outputs).
LossAndGrad loss_and_grad(const Model& model, std::span<const shapegen::BinaryImage> images,
                          std::span<const int> labels);
LossAndGrad loss_and_grad(const Model& model, std::span<const ActiveSet> inputs,
                          std::span<const int> labels);

// Forward-only mean cross-entropy.
double mean_loss(const Model& model, std::span<const ActiveSet> inputs, std::span<const int> labels);

// Fraction of inputs whose arg-max output equals the label.
double accuracy(const Model& model, std::span<const ActiveSet> inputs, std::span<const int> labels);

// Adam (0.9 / 0.999 / 1e-8) on shuffled mini-batches until training accuracy
// reaches cfg.target_train_accuracy or cfg.max_epochs is hit. Dataset labels are
// remapped to output indices in ascending label order.
Model train(Model model, const expdesign::LabeledDataset& train_set, const NetConfig& cfg);

// Output index -> dataset label mapping used by train().
std::vector<int> output_labels(const expdesign::LabeledDataset& train_set);

// Post-ReLU activations of the last hidden layer, one row per image.
FeatureMatrix extract_features(const Model& model, std::span<const shapegen::BinaryImage> images);
FeatureMatrix extract_features(const Model& model, const expdesign::LabeledDataset& data);

struct CapacityEntry {
  NetConfig config;
  std::size_t param_count = 0;
  double params_per_known_class = 0.0;
};

// One config per menu entry, copied from `base` with the widths replaced and
// n_outputs = n_known.
std::vector<CapacityEntry> capacity_grid(const std::vector<std::vector<int>>& widths_menu,
                                         int n_known, const NetConfig& base = {});

// Binary checkpoint; layout documented in docs/checkpoint_format.md.
void save_checkpoint(const Model& model, std::ostream& out);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(std::istream& in);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace ncdlab::nnet
