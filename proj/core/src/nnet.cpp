#include "ncdlab/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ncdlab/errors.hpp"
#include "ncdlab/rng.hpp"

namespace ncdlab::nnet {

namespace {

constexpr std::uint64_t kInitSalt = 0x696e6974ULL;
constexpr std::uint64_t kShuffleSalt = 0x73687566ULL;
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kDivergenceLoss = 1e3;
constexpr std::size_t kEvalBlock = 512;

using Batch = std::vector<const ActiveSet*>;

struct Activations {
  std::vector<Eigen::MatrixXd> pre;   // per layer, fan_out x B
  std::vector<Eigen::MatrixXd> post;  // ReLU outputs of hidden layers
};

void check_finite(const Eigen::MatrixXd& z, int layer) {
  if (z.allFinite()) return;
  Eigen::Index bad_row = 0;
  Eigen::Index bad_col = 0;
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index r = 0; r < z.rows(); ++r)
      if (!std::isfinite(z(r, c))) {
        bad_row = r;
        bad_col = c;
        c = z.cols();
        break;
      }
  std::ostringstream msg;
  msg << "non-finite pre-activation at layer " << layer << ", unit " << bad_row << ", batch row "
      << bad_col;
  throw NumericalError(msg.str());
}

// Runs layers [0, stop) and fills `act`. The first layer exploits binary input:
// its pre-activation is the bias plus the weight columns of the set pixels.
void forward(const Model& model, const Batch& batch, int stop, Activations& act) {
  const auto b_count = static_cast<Eigen::Index>(batch.size());
  act.pre.resize(stop);
  act.post.resize(stop);
  for (int l = 0; l < stop; ++l) {
    const auto& shape = model.layers()[l];
    auto w = model.weights(l);
    auto bias = model.bias(l);
    auto& z = act.pre[l];
    if (l == 0) {
      z.resize(shape.fan_out, b_count);
      for (Eigen::Index b = 0; b < b_count; ++b) {
        auto col = z.col(b);
        col = bias;
        for (int i : *batch[b]) col += w.col(i);
      }
    } else {
      z.noalias() = w * act.post[l - 1];
      z.colwise() += bias;
    }
    check_finite(z, l);
    if (l + 1 < model.layer_count()) act.post[l] = z.cwiseMax(0.0);
  }
}

struct BatchResult {
  double loss_sum = 0.0;
  int correct = 0;
};

// Softmax cross-entropy on the logits; optionally leaves dLoss/dlogits (for the
// mean loss) in `dlogits`.
BatchResult softmax_xent(const Eigen::MatrixXd& logits, std::span<const int> labels,
                         Eigen::MatrixXd* dlogits, double scale) {
  BatchResult r;
  if (dlogits) dlogits->resize(logits.rows(), logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    auto col = logits.col(b);
    Eigen::Index arg = 0;
    double mx = col.maxCoeff(&arg);
    double lse = mx + std::log((col.array() - mx).exp().sum());
    int y = labels[b];
    r.loss_sum += lse - col(y);
    if (arg == y) ++r.correct;
    if (dlogits) {
      auto d = dlogits->col(b);
      d = ((col.array() - lse).exp() * scale).matrix();
      d(y) -= scale;
    }
  }
  return r;
}

void check_labels(std::span<const int> labels, int n_outputs) {
  for (int y : labels)
    if (y < 0 || y >= n_outputs)
      throw ParameterError("label " + std::to_string(y) + " outside [0, " +
                           std::to_string(n_outputs) + ")");
}

// Mean loss over the batch; gradient (if requested) is written, not accumulated.
double forward_backward(const Model& model, const Batch& batch, std::span<const int> labels,
                        Eigen::VectorXd* grad, Activations& act) {
  const int n_layers = model.layer_count();
  forward(model, batch, n_layers, act);
  const double scale = 1.0 / static_cast<double>(batch.size());
  Eigen::MatrixXd dz;
  auto r = softmax_xent(act.pre.back(), labels, grad ? &dz : nullptr, scale);
  if (!grad) return r.loss_sum * scale;

  grad->setZero(static_cast<Eigen::Index>(model.param_count()));
  Eigen::MatrixXd da;
  for (int l = n_layers - 1; l >= 0; --l) {
    const auto& shape = model.layers()[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad->data() + shape.weight_offset, shape.fan_out, shape.fan_in);
    Eigen::Map<Eigen::VectorXd> gb(grad->data() + shape.bias_offset, shape.fan_out);
    gb = dz.rowwise().sum();
    if (l == 0) {
      for (std::size_t b = 0; b < batch.size(); ++b) {
        auto d = dz.col(static_cast<Eigen::Index>(b));
        for (int i : *batch[b]) gw.col(i) += d;
      }
    } else {
      gw.noalias() = dz * act.post[l - 1].transpose();
      da.noalias() = model.weights(l).transpose() * dz;
      dz = da.cwiseProduct((act.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return r.loss_sum * scale;
}

Batch all_rows(std::span<const ActiveSet> inputs) {
  Batch b;
  b.reserve(inputs.size());
  for (const auto& in : inputs) b.push_back(&in);
  return b;
}

void check_inputs(const Model& model, std::span<const ActiveSet> inputs, std::span<const int> labels) {
  if (inputs.size() != labels.size()) throw ParameterError("inputs and labels differ in length");
  if (inputs.empty()) throw ParameterError("empty batch");
  check_labels(labels, model.config().n_outputs);
  for (const auto& in : inputs)
    for (int i : in)
      if (i < 0 || i >= model.config().input_dim)
        throw ParameterError("input index outside the input dimension");
}

BatchResult evaluate_blocks(const Model& model, std::span<const ActiveSet> inputs,
                            std::span<const int> labels) {
  BatchResult total;
  Activations act;
  for (std::size_t start = 0; start < inputs.size(); start += kEvalBlock) {
    std::size_t end = std::min(inputs.size(), start + kEvalBlock);
    Batch batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&inputs[i]);
    forward(model, batch, model.layer_count(), act);
    auto r = softmax_xent(act.pre.back(), labels.subspan(start, end - start), nullptr, 1.0);
    total.loss_sum += r.loss_sum;
    total.correct += r.correct;
  }
  return total;
}

}  // namespace

void NetConfig::validate() const {
  if (input_dim <= 0) throw ParameterError("input_dim must be positive");
  if (hidden_widths.empty()) throw ParameterError("at least one hidden layer is required");
  for (int w : hidden_widths)
    if (w <= 0) throw ParameterError("hidden widths must be positive");
  if (n_outputs < 1) throw ParameterError("n_outputs must be positive");
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
  if (batch_size < 1) throw ParameterError("batch_size must be positive");
  if (max_epochs < 0) throw ParameterError("max_epochs must be non-negative");
  if (!(target_train_accuracy > 0.0 && target_train_accuracy <= 1.0))
    throw ParameterError("target_train_accuracy must lie in (0, 1]");
}

std::size_t count_parameters(int input_dim, const std::vector<int>& hidden_widths, int n_outputs) {
  std::size_t total = 0;
  int fan_in = input_dim;
  for (int w : hidden_widths) {
    total += static_cast<std::size_t>(fan_in) * w + w;
    fan_in = w;
  }
  total += static_cast<std::size_t>(fan_in) * n_outputs + n_outputs;
  return total;
}

Model::Model(NetConfig config) : config_(std::move(config)) {
  config_.validate();
  std::vector<int> widths = config_.hidden_widths;
  widths.push_back(config_.n_outputs);
  std::size_t offset = 0;
  int fan_in = config_.input_dim;
  for (int w : widths) {
    LayerShape s;
    s.fan_in = fan_in;
    s.fan_out = w;
    s.weight_offset = offset;
    offset += static_cast<std::size_t>(fan_in) * w;
    s.bias_offset = offset;
    offset += w;
    layers_.push_back(s);
    fan_in = w;
  }
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

Eigen::Map<Eigen::MatrixXd> Model::weights(int layer) {
  const auto& s = layers_.at(layer);
  return {params_.data() + s.weight_offset, s.fan_out, s.fan_in};
}

Eigen::Map<const Eigen::MatrixXd> Model::weights(int layer) const {
  const auto& s = layers_.at(layer);
  return {params_.data() + s.weight_offset, s.fan_out, s.fan_in};
}

Eigen::Map<Eigen::VectorXd> Model::bias(int layer) {
  const auto& s = layers_.at(layer);
  return {params_.data() + s.bias_offset, s.fan_out};
}

Eigen::Map<const Eigen::VectorXd> Model::bias(int layer) const {
  const auto& s = layers_.at(layer);
  return {params_.data() + s.bias_offset, s.fan_out};
}

std::vector<ActiveSet> to_active_sets(std::span<const shapegen::BinaryImage> images) {
  std::vector<ActiveSet> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(img.active_indices());
  return out;
}

Model init_model(const NetConfig& cfg) {
  Model model(cfg);
  Rng rng(derive_seed(cfg.seed, {kInitSalt}));
  for (int l = 0; l < model.layer_count(); ++l) {
    auto w = model.weights(l);
    const double s = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = s * rng.normal();
  }
  return model;
}

LossAndGrad loss_and_grad(const Model& model, std::span<const ActiveSet> inputs,
                          std::span<const int> labels) {
  check_inputs(model, inputs, labels);
  LossAndGrad out;
  Activations act;
  out.loss = forward_backward(model, all_rows(inputs), labels, &out.gradient, act);
  return out;
}

LossAndGrad loss_and_grad(const Model& model, std::span<const shapegen::BinaryImage> images,
                          std::span<const int> labels) {
  if (model.config().input_dim != kInputDim)
    throw ParameterError("image input needs input_dim = " + std::to_string(kInputDim));
  auto inputs = to_active_sets(images);
  return loss_and_grad(model, std::span<const ActiveSet>(inputs), labels);
}

double mean_loss(const Model& model, std::span<const ActiveSet> inputs, std::span<const int> labels) {
  check_inputs(model, inputs, labels);
  return evaluate_blocks(model, inputs, labels).loss_sum / static_cast<double>(inputs.size());
}

double accuracy(const Model& model, std::span<const ActiveSet> inputs, std::span<const int> labels) {
  check_inputs(model, inputs, labels);
  return static_cast<double>(evaluate_blocks(model, inputs, labels).correct) /
         static_cast<double>(inputs.size());
}

std::vector<int> output_labels(const expdesign::LabeledDataset& train_set) {
  std::set<int> distinct;
  for (const auto& s : train_set.samples) distinct.insert(s.label);
  return {distinct.begin(), distinct.end()};
}

Model train(Model model, const expdesign::LabeledDataset& train_set, const NetConfig& cfg) {
  cfg.validate();
  if (cfg.max_epochs == 0) return model;
  if (train_set.samples.empty()) throw ParameterError("empty training set");

  auto classes = output_labels(train_set);
  if (static_cast<int>(classes.size()) != model.config().n_outputs)
    throw ParameterError("training set has " + std::to_string(classes.size()) +
                         " classes but the model has " +
                         std::to_string(model.config().n_outputs) + " outputs");

  std::vector<ActiveSet> inputs;
  std::vector<int> labels;
  inputs.reserve(train_set.samples.size());
  labels.reserve(train_set.samples.size());
  for (const auto& s : train_set.samples) {
    inputs.push_back(s.image.active_indices());
    labels.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), s.label) -
                                      classes.begin()));
  }

  const auto n_params = static_cast<Eigen::Index>(model.param_count());
  Eigen::VectorXd grad(n_params);
  Eigen::ArrayXd m = Eigen::ArrayXd::Zero(n_params);
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(n_params);
  double beta1_t = 1.0;
  double beta2_t = 1.0;

  Rng rng(derive_seed(cfg.seed, {kShuffleSalt}));
  std::vector<int> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  Activations act;
  Batch batch;
  std::vector<int> batch_labels;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      batch_labels.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(&inputs[order[k]]);
        batch_labels.push_back(labels[order[k]]);
      }
      double loss;
      try {
        loss = forward_backward(model, batch, batch_labels, &grad, act);
      } catch (const NumericalError& e) {
        throw TrainingFailure(std::string("epoch ") + std::to_string(epoch) + ": " + e.what());
      }
      if (!std::isfinite(loss) || !grad.allFinite())
        throw TrainingFailure("non-finite loss or gradient at epoch " + std::to_string(epoch));

      beta1_t *= kBeta1;
      beta2_t *= kBeta2;
      auto g = grad.array();
      m = kBeta1 * m + (1.0 - kBeta1) * g;
      v = kBeta2 * v + (1.0 - kBeta2) * g.square();
      model.parameters().array() -=
          cfg.learning_rate * (m / (1.0 - beta1_t)) / ((v / (1.0 - beta2_t)).sqrt() + kAdamEps);
    }

    BatchResult r;
    try {
      r = evaluate_blocks(model, inputs, labels);
    } catch (const NumericalError& e) {
      throw TrainingFailure(std::string("epoch ") + std::to_string(epoch) + ": " + e.what());
    }
    EpochRecord rec{epoch, r.loss_sum / static_cast<double>(inputs.size()),
                    static_cast<double>(r.correct) / static_cast<double>(inputs.size())};
    model.training_log.push_back(rec);
    if (!std::isfinite(rec.loss) || rec.loss > kDivergenceLoss)
      throw TrainingFailure("training diverged at epoch " + std::to_string(epoch) +
                            " (loss = " + std::to_string(rec.loss) + ")");
    if (rec.accuracy >= cfg.target_train_accuracy) break;
  }
  return model;
}

FeatureMatrix extract_features(const Model& model, std::span<const shapegen::BinaryImage> images) {
  if (model.config().input_dim != kInputDim)
    throw ParameterError("image input needs input_dim = " + std::to_string(kInputDim));
  const int hidden = model.layer_count() - 1;
  FeatureMatrix out;
  out.values.resize(static_cast<Eigen::Index>(images.size()), model.feature_dim());
  Activations act;
  for (std::size_t start = 0; start < images.size(); start += kEvalBlock) {
    std::size_t end = std::min(images.size(), start + kEvalBlock);
    std::vector<ActiveSet> inputs;
    for (std::size_t i = start; i < end; ++i) inputs.push_back(images[i].active_indices());
    forward(model, all_rows(inputs), hidden, act);
    out.values.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(end - start)) =
        act.post[hidden - 1].transpose();
  }
  return out;
}

FeatureMatrix extract_features(const Model& model, const expdesign::LabeledDataset& data) {
  std::vector<shapegen::BinaryImage> images;
  images.reserve(data.samples.size());
  for (const auto& s : data.samples) images.push_back(s.image);
  auto out = extract_features(model, images);
  out.labels = data.labels();
  return out;
}

std::vector<CapacityEntry> capacity_grid(const std::vector<std::vector<int>>& widths_menu,
                                         int n_known, const NetConfig& base) {
  if (widths_menu.empty()) throw ParameterError("capacity menu is empty");
  if (n_known < 1) throw ParameterError("n_known must be positive");
  std::vector<CapacityEntry> out;
  for (const auto& widths : widths_menu) {
    CapacityEntry e;
    e.config = base;
    e.config.hidden_widths = widths;
    e.config.n_outputs = n_known;
    e.config.validate();
    e.param_count = count_parameters(e.config.input_dim, widths, n_known);
    e.params_per_known_class = static_cast<double>(e.param_count) / n_known;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace ncdlab::nnet
