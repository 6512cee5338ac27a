#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "driverid/error.hpp"
#include "driverid/models.hpp"
#include "driverid/seed.hpp"
#include "model_internal.hpp"

namespace driverid {

namespace {

void activate(Activation a, Eigen::MatrixXd& z) {
  if (a == Activation::relu) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.array().tanh().matrix();
  }
}

/// Column-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    const double lse = m + std::log((logits.col(j).array() - m).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

void check_labels(const MlpNetwork& net, const Eigen::MatrixXd& inputs,
                  std::span<const std::size_t> labels) {
  if (static_cast<std::size_t>(inputs.cols()) != labels.size()) {
    throw DataError("input columns and labels disagree");
  }
  if (static_cast<std::size_t>(inputs.rows()) != net.input_size()) {
    throw SchemaMismatch("network input has the wrong dimension");
  }
  for (auto l : labels) {
    if (l >= net.output_size()) throw DataError("label index out of range");
  }
}

}  // namespace

std::string_view activation_name(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

std::optional<Activation> parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  return std::nullopt;
}

std::string_view optimizer_name(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

std::optional<Optimizer> parse_optimizer(std::string_view name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "sgd") return Optimizer::sgd;
  return std::nullopt;
}

void MlpConfig::validate() const {
  for (auto h : hidden_layers) {
    if (h == 0) throw ConfigError("hidden layer sizes must be >= 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (early_stop_patience == 0) throw ConfigError("early_stop_patience must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction <= 0.5)) {
    throw ConfigError("validation_fraction must be in (0, 0.5]");
  }
}

MlpNetwork MlpNetwork::init(std::span<const std::size_t> layer_sizes, Activation activation,
                            std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ConfigError("a network needs at least two layers");
  for (auto s : layer_sizes) {
    if (s == 0) throw ConfigError("layer sizes must be >= 1");
  }
  detail::Rng rng(seed);
  MlpNetwork net;
  net.activation = activation;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(layer_sizes[l]);
    const auto out = static_cast<Eigen::Index>(layer_sizes[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index j = 0; j < in; ++j) {
      for (Eigen::Index i = 0; i < out; ++i) w(i, j) = rng.uniform(-limit, limit);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return net;
}

std::vector<std::size_t> MlpNetwork::layer_sizes() const {
  std::vector<std::size_t> out;
  if (weights.empty()) return out;
  out.push_back(input_size());
  for (const auto& w : weights) out.push_back(static_cast<std::size_t>(w.rows()));
  return out;
}

std::size_t MlpNetwork::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

Eigen::MatrixXd MlpNetwork::forward(const Eigen::MatrixXd& inputs) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
    throw SchemaMismatch("network input has the wrong dimension");
  }
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::MatrixXd z = (weights[l] * a).colwise() + biases[l];
    if (l + 1 < weights.size()) activate(activation, z);
    a = std::move(z);
  }
  return log_softmax(a).array().exp().matrix();
}

double MlpNetwork::loss(const Eigen::MatrixXd& inputs, std::span<const std::size_t> labels) const {
  check_labels(*this, inputs, labels);
  if (labels.empty()) return 0.0;
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::MatrixXd z = (weights[l] * a).colwise() + biases[l];
    if (l + 1 < weights.size()) activate(activation, z);
    a = std::move(z);
  }
  const Eigen::MatrixXd lp = log_softmax(a);
  double total = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    total -= lp(static_cast<Eigen::Index>(labels[j]), static_cast<Eigen::Index>(j));
  }
  return total / static_cast<double>(labels.size());
}

double MlpNetwork::loss_and_gradient(const Eigen::MatrixXd& inputs,
                                     std::span<const std::size_t> labels,
                                     std::vector<double>& gradient) const {
  check_labels(*this, inputs, labels);
  const std::size_t layers = weights.size();
  gradient.assign(parameter_count(), 0.0);
  if (labels.empty()) return 0.0;
  const double batch = static_cast<double>(labels.size());

  std::vector<Eigen::MatrixXd> acts;  // acts[l] is the input to layer l
  acts.reserve(layers + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (weights[l] * acts.back()).colwise() + biases[l];
    if (l + 1 < layers) activate(activation, z);
    acts.push_back(std::move(z));
  }
  const Eigen::MatrixXd lp = log_softmax(acts.back());
  double total = 0.0;
  Eigen::MatrixXd delta = lp.array().exp().matrix();
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const auto r = static_cast<Eigen::Index>(labels[j]);
    const auto c = static_cast<Eigen::Index>(j);
    total -= lp(r, c);
    delta(r, c) -= 1.0;
  }
  delta /= batch;

  std::vector<Eigen::MatrixXd> grad_w(layers);
  std::vector<Eigen::VectorXd> grad_b(layers);
  for (std::size_t l = layers; l-- > 0;) {
    grad_w[l] = delta * acts[l].transpose();
    grad_b[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = weights[l].transpose() * delta;
    const Eigen::MatrixXd& a = acts[l];
    if (activation == Activation::relu) {
      back = back.array() * (a.array() > 0.0).cast<double>();
    } else {
      back = back.array() * (1.0 - a.array().square());
    }
    delta = std::move(back);
  }

  std::size_t k = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    std::copy(grad_w[l].data(), grad_w[l].data() + grad_w[l].size(), gradient.begin() + k);
    k += static_cast<std::size_t>(grad_w[l].size());
    std::copy(grad_b[l].data(), grad_b[l].data() + grad_b[l].size(), gradient.begin() + k);
    k += static_cast<std::size_t>(grad_b[l].size());
  }
  return total / batch;
}

std::vector<double> MlpNetwork::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.insert(out.end(), weights[l].data(), weights[l].data() + weights[l].size());
    out.insert(out.end(), biases[l].data(), biases[l].data() + biases[l].size());
  }
  return out;
}

void MlpNetwork::unflatten(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw SchemaMismatch("parameter vector has " + std::to_string(params.size()) +
                         " entries, network needs " + std::to_string(parameter_count()));
  }
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    std::copy_n(params.begin() + k, weights[l].size(), weights[l].data());
    k += static_cast<std::size_t>(weights[l].size());
    std::copy_n(params.begin() + k, biases[l].size(), biases[l].data());
    k += static_cast<std::size_t>(biases[l].size());
  }
}

std::vector<double> MlpNetwork::predict_proba(std::span<const double> x) const {
  if (x.size() != input_size()) throw SchemaMismatch("network input has the wrong dimension");
  Eigen::MatrixXd in(static_cast<Eigen::Index>(x.size()), 1);
  std::copy(x.begin(), x.end(), in.data());
  const Eigen::MatrixXd p = forward(in);
  return {p.data(), p.data() + p.size()};
}

std::size_t MlpNetwork::predict(std::span<const double> x) const {
  const auto p = predict_proba(x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

namespace {

Eigen::MatrixXd gather_columns(const Matrix& features, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(features.cols),
                      static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    auto r = features.row(rows[j]);
    std::copy(r.begin(), r.end(), out.col(static_cast<Eigen::Index>(j)).data());
  }
  return out;
}

class ParameterUpdate {
 public:
  ParameterUpdate(const MlpConfig& cfg, std::size_t n)
      : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    if (cfg_.optimizer == Optimizer::sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg_.learning_rate * grad[i];
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }

 private:
  const MlpConfig& cfg_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace

TrainedModel mlp_train(const LabeledDataset& data, const MlpConfig& cfg, MlpTrainingLog* log) {
  cfg.validate();
  data.validate_for_training(1);
  detail::notify_training_observer(data);

  const std::size_t n_classes = data.class_list.size();
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < data.rows(); ++i) by_class[data.labels[i]].push_back(i);
  std::vector<std::size_t> fit_rows, val_rows;
  for (const auto& rows : by_class) {
    const auto n_val = static_cast<std::size_t>(
        std::floor(cfg.validation_fraction * static_cast<double>(rows.size())));
    const std::size_t n_fit = rows.size() - n_val;
    fit_rows.insert(fit_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_fit));
    val_rows.insert(val_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_fit), rows.end());
  }
  std::sort(fit_rows.begin(), fit_rows.end());
  std::sort(val_rows.begin(), val_rows.end());

  std::vector<std::size_t> sizes{data.cols()};
  sizes.insert(sizes.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
  sizes.push_back(n_classes);
  const std::uint64_t init_seed = splitmix64(cfg.seed);
  MlpNetwork net = MlpNetwork::init(sizes, cfg.activation, init_seed);
  detail::Rng rng(splitmix64(init_seed));

  const bool use_val = !val_rows.empty();
  const auto& monitor_rows = use_val ? val_rows : fit_rows;
  const Eigen::MatrixXd monitor_x = gather_columns(data.features, monitor_rows);
  std::vector<std::size_t> monitor_y;
  for (auto r : monitor_rows) monitor_y.push_back(data.labels[r]);

  std::vector<double> params = net.flatten();
  std::vector<double> best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0, since_best = 0, epoch = 0;
  ParameterUpdate update(cfg, params.size());
  std::vector<double> grad;
  std::vector<std::size_t> order = fit_rows;
  std::vector<std::size_t> batch_y;

  for (epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      const Eigen::MatrixXd x = gather_columns(data.features, rows);
      batch_y.clear();
      for (auto r : rows) batch_y.push_back(data.labels[r]);
      const double l = net.loss_and_gradient(x, batch_y, grad);
      if (!std::isfinite(l)) {
        throw TrainingError("MLP training diverged at epoch " + std::to_string(epoch));
      }
      update.step(params, grad);
      net.unflatten(params);
    }
    const double monitor = net.loss(monitor_x, monitor_y);
    if (!std::isfinite(monitor)) {
      throw TrainingError("MLP training diverged at epoch " + std::to_string(epoch));
    }
    if (monitor < best_loss) {
      best_loss = monitor;
      best = params;
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      break;
    }
  }
  net.unflatten(best);

  if (log != nullptr) {
    log->epochs_run = std::min(epoch, cfg.max_epochs);
    log->best_epoch = best_epoch;
    log->best_monitor_loss = best_loss;
    log->validation_rows = val_rows.size();
  }

  TrainedModel out;
  out.kind = ModelKind::mlp;
  out.params = std::move(net);
  out.class_list = data.class_list;
  out.schema = data.schema;
  return out;
}

}  // namespace driverid
